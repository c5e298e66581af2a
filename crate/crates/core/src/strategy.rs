//! Offer-generation strategies and their constraint-aware adaptations.
//!
//! Two strategies are provided. The random sampler (zero intelligence) draws
//! each issue independently from a per-issue distribution until it finds a
//! self-acceptable offer or exhausts its per-turn sample budget. The
//! concession enumerator yields offers lazily in non-increasing utility order
//! (ties broken by ascending offer index) until the best remaining offer
//! falls below the reservation threshold.
//!
//! Constraints adapt both: the sampler zeroes the probability of ruled-out
//! values and renormalises, while the enumerator overwrites the ruled-out
//! cell's evaluation with a sink low enough that no offer containing it can
//! reach a nonnegative threshold.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::AtomicConstraint;
use crate::model::{AgentProfile, NegotiationSpace, Offer, StrategyKind, UtilityFunction};

/// Per-turn sample budget of the random strategy.
pub const DEFAULT_SAMPLE_BUDGET: usize = 1000;

/// Random-sampling (zero intelligence) offer generator.
#[derive(Debug, Clone)]
pub struct RandomSampler {
    weights: Vec<Vec<f64>>,
    dists: Vec<Option<WeightedIndex<f64>>>,
    utility: UtilityFunction,
    threshold: f64,
    budget: usize,
    rng: ChaCha8Rng,
    draws: u64,
}

impl RandomSampler {
    /// Uniform distribution over each issue's values.
    pub fn new(
        space: &NegotiationSpace,
        utility: UtilityFunction,
        threshold: f64,
        budget: usize,
        seed: u64,
    ) -> Self {
        let weights: Vec<Vec<f64>> = space
            .sizes()
            .iter()
            .map(|&m| vec![1.0 / m as f64; m])
            .collect();
        let dists = weights
            .iter()
            .map(|w| WeightedIndex::new(w.iter().copied()).ok())
            .collect();
        Self {
            weights,
            dists,
            utility,
            threshold,
            budget,
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Zeroes the ruled-out value's probability and renormalises the issue's
    /// remaining weights. Idempotent. If every value of the issue is ruled
    /// out the state goes dead.
    pub fn apply_constraint(&mut self, constraint: AtomicConstraint) {
        let row = &mut self.weights[constraint.issue];
        row[constraint.value] = 0.0;
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            for w in row.iter_mut() {
                *w /= total;
            }
        }
        self.dists[constraint.issue] = WeightedIndex::new(row.iter().copied()).ok();
    }

    /// True when some issue has every value excluded.
    pub fn is_dead(&self) -> bool {
        self.dists.iter().any(Option::is_none)
    }

    pub fn issue_weights(&self, issue: usize) -> &[f64] {
        &self.weights[issue]
    }

    /// Offers sampled so far, across all turns.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// One draw from the current distributions, ignoring acceptability.
    /// `None` when the state is dead.
    pub fn sample_raw(&mut self) -> Option<Offer> {
        let mut values = Vec::with_capacity(self.dists.len());
        for dist in &self.dists {
            values.push(dist.as_ref()?.sample(&mut self.rng));
        }
        self.draws += 1;
        Some(Offer::new(values))
    }

    /// First self-acceptable offer within the per-turn budget, or `None`
    /// (exhausted) when the budget is spent or the state is dead. Draws are
    /// independent; duplicates are resampled without memory.
    pub fn next_offer(&mut self) -> Option<Offer> {
        if self.is_dead() {
            return None;
        }
        for _ in 0..self.budget {
            let offer = self.sample_raw()?;
            if self.utility.utility(&offer) >= self.threshold {
                return Some(offer);
            }
        }
        None
    }
}

/// Heap entry for the concession frontier, ordered by utility descending then
/// offer index ascending.
#[derive(Debug, Clone)]
struct Candidate {
    utility: f64,
    offer_index: u64,
    ranks: Vec<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.offer_index == other.offer_index
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.utility
            .total_cmp(&other.utility)
            .then_with(|| other.offer_index.cmp(&self.offer_index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Concession offer generator: lazy k-best enumeration over the product
/// space.
///
/// Each issue's values are ranked by their evaluation, best first. The
/// frontier starts at the all-best offer; popping a candidate pushes the
/// offers obtained by advancing exactly one issue to its next-ranked value.
/// For linearly additive utilities this yields every offer in non-increasing
/// utility order, with exact (utility desc, offer index asc) tie-breaking.
#[derive(Debug, Clone)]
pub struct ConcessionEnumerator {
    space: NegotiationSpace,
    effective: UtilityFunction,
    threshold: f64,
    sink: f64,
    ranked: Vec<Vec<usize>>,
    frontier: BinaryHeap<Candidate>,
    seen: HashSet<u64>,
    emitted: HashSet<u64>,
}

impl ConcessionEnumerator {
    pub fn new(space: &NegotiationSpace, utility: UtilityFunction, threshold: f64) -> Self {
        // Sink magnitude is fixed from the original utility so repeated
        // overrides stay consistent: strictly below minus the best utility,
        // scaled by the issue count.
        let sink = -(utility.max_utility().abs() * space.issue_count() as f64) - 1000.0;
        let mut this = Self {
            space: space.clone(),
            effective: utility,
            threshold,
            sink,
            ranked: Vec::new(),
            frontier: BinaryHeap::new(),
            seen: HashSet::new(),
            emitted: HashSet::new(),
        };
        this.reseed();
        this
    }

    /// The utility function the enumerator currently orders by, with all
    /// applied constraint overrides.
    pub fn effective_utility(&self) -> &UtilityFunction {
        &self.effective
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn reseed(&mut self) {
        self.ranked = self
            .effective
            .evaluations()
            .iter()
            .map(|row| {
                let mut order: Vec<usize> = (0..row.len()).collect();
                order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                order
            })
            .collect();
        self.frontier.clear();
        self.seen.clear();
        let origin = vec![0usize; self.space.issue_count()];
        let cand = self.candidate(origin);
        self.seen.insert(cand.offer_index);
        self.frontier.push(cand);
    }

    fn candidate(&self, ranks: Vec<usize>) -> Candidate {
        let values: Vec<usize> = ranks
            .iter()
            .enumerate()
            .map(|(i, &r)| self.ranked[i][r])
            .collect();
        let offer = Offer::new(values);
        Candidate {
            utility: self.effective.utility(&offer),
            offer_index: self.space.offer_index(&offer),
            ranks,
        }
    }

    fn offer_of(&self, cand: &Candidate) -> Offer {
        let values: Vec<usize> = cand
            .ranks
            .iter()
            .enumerate()
            .map(|(i, &r)| self.ranked[i][r])
            .collect();
        Offer::new(values)
    }

    /// Overwrites the ruled-out cell with the sink value and rebuilds the
    /// frontier. Offers already emitted stay emitted.
    pub fn apply_constraint(&mut self, constraint: AtomicConstraint) {
        self.effective
            .set_evaluation(constraint.issue, constraint.value, self.sink);
        self.reseed();
    }

    /// Next not-yet-emitted offer with maximal effective utility, or `None`
    /// once the best remaining offer falls below the threshold or the space
    /// is exhausted.
    pub fn next_offer(&mut self) -> Option<Offer> {
        while let Some(cand) = self.frontier.pop() {
            if cand.utility < self.threshold {
                return None;
            }
            for issue in 0..cand.ranks.len() {
                if cand.ranks[issue] + 1 < self.space.size_of(issue) {
                    let mut ranks = cand.ranks.clone();
                    ranks[issue] += 1;
                    let succ = self.candidate(ranks);
                    if self.seen.insert(succ.offer_index) {
                        self.frontier.push(succ);
                    }
                }
            }
            if self.emitted.insert(cand.offer_index) {
                return Some(self.offer_of(&cand));
            }
        }
        None
    }
}

/// A session-local strategy state: one of the two generators.
#[derive(Debug, Clone)]
pub enum StrategyState {
    Random(RandomSampler),
    Concession(ConcessionEnumerator),
}

impl StrategyState {
    /// Builds the state matching the profile's strategy kind, against the
    /// profile's own utility and acceptance threshold.
    pub fn for_profile(space: &NegotiationSpace, profile: &AgentProfile, seed: u64) -> Self {
        let threshold = profile.acceptance_threshold();
        match profile.strategy {
            StrategyKind::RandomSampling => StrategyState::Random(RandomSampler::new(
                space,
                profile.utility.clone(),
                threshold,
                DEFAULT_SAMPLE_BUDGET,
                seed,
            )),
            StrategyKind::Concession => StrategyState::Concession(ConcessionEnumerator::new(
                space,
                profile.utility.clone(),
                threshold,
            )),
        }
    }

    pub fn next_offer(&mut self) -> Option<Offer> {
        match self {
            StrategyState::Random(s) => s.next_offer(),
            StrategyState::Concession(s) => s.next_offer(),
        }
    }

    pub fn apply_constraint(&mut self, constraint: AtomicConstraint) {
        match self {
            StrategyState::Random(s) => s.apply_constraint(constraint),
            StrategyState::Concession(s) => s.apply_constraint(constraint),
        }
    }
}

/// What an agent does with its turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Counter(Offer),
    Terminate,
}

/// Accept-first turn logic: accept the incoming offer when it meets the
/// agent's own threshold, otherwise counter with the strategy's next offer,
/// otherwise terminate.
pub fn decide(
    profile: &AgentProfile,
    state: &mut StrategyState,
    incoming: Option<&Offer>,
) -> Decision {
    if let Some(offer) = incoming {
        if profile.is_acceptable(offer) {
            return Decision::Accept;
        }
    }
    match state.next_offer() {
        Some(offer) => Decision::Counter(offer),
        None => Decision::Terminate,
    }
}
