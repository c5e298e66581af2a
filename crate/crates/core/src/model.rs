//! Negotiation spaces, offers, linearly additive utilities and acceptability.
//!
//! A negotiation space is the finite product of issues, each issue carrying an
//! ordered list of value labels. Offers pick one value index per issue.
//! Utilities are linearly additive: `u(offer) = sum_i w_i * e_i(offer_i)` with
//! weights summing to one. Acceptability compares an offer's utility against
//! `reservation_fraction * max_utility`, inclusively.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when validating that weights sum to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("negotiation space must have at least one issue")]
    EmptySpace,
    #[error("issue {0} must have at least one value")]
    EmptyIssue(usize),
    #[error("issue {issue} has duplicate value label {label:?}")]
    DuplicateValueLabel { issue: usize, label: String },
    #[error("total offer count overflows u64")]
    OfferCountOverflow,
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weight {index} = {value} is outside [0, 1]")]
    WeightRange { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOLERANCE}")]
    WeightSum { sum: f64 },
    #[error("evaluation table has wrong shape at issue {issue}: expected {expected} entries, got {got}")]
    EvaluationShape {
        issue: usize,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} evaluation rows, got {got}")]
    EvaluationRows { expected: usize, got: usize },
    #[error("offer has {got} assignments, space has {expected} issues")]
    OfferLength { expected: usize, got: usize },
    #[error("offer assigns value {value} to issue {issue}, which only has {size} values")]
    ValueIndex {
        issue: usize,
        value: usize,
        size: usize,
    },
    #[error("offer index {index} out of range, space has {count} offers")]
    IndexOutOfRange { index: u64, count: u64 },
    #[error("reservation fraction {0} is outside [0, 1]")]
    ReservationRange(f64),
}

/// One issue: a name and its ordered value labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueSpec {
    pub name: String,
    pub values: Vec<String>,
}

impl IssueSpec {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// The finite product of issues over which agents negotiate.
///
/// Values are referenced by index everywhere in the engine; labels exist only
/// for I/O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegotiationSpace {
    issues: Vec<IssueSpec>,
    sizes: Vec<usize>,
    offer_count: u64,
}

impl NegotiationSpace {
    pub fn new(issues: Vec<IssueSpec>) -> Result<Self, ModelError> {
        if issues.is_empty() {
            return Err(ModelError::EmptySpace);
        }
        let mut offer_count: u64 = 1;
        for (i, issue) in issues.iter().enumerate() {
            if issue.values.is_empty() {
                return Err(ModelError::EmptyIssue(i));
            }
            for (a, label) in issue.values.iter().enumerate() {
                if issue.values[..a].contains(label) {
                    return Err(ModelError::DuplicateValueLabel {
                        issue: i,
                        label: label.clone(),
                    });
                }
            }
            offer_count = offer_count
                .checked_mul(issue.values.len() as u64)
                .ok_or(ModelError::OfferCountOverflow)?;
        }
        let sizes = issues.iter().map(|s| s.values.len()).collect();
        Ok(Self {
            issues,
            sizes,
            offer_count,
        })
    }

    /// A space of `n_issues` issues with `n_values` values each, with
    /// generated labels (`issue0`.., `v0`..).
    pub fn uniform(n_issues: usize, n_values: usize) -> Result<Self, ModelError> {
        let issues = (0..n_issues)
            .map(|i| IssueSpec {
                name: format!("issue{i}"),
                values: (0..n_values).map(|v| format!("v{v}")).collect(),
            })
            .collect();
        Self::new(issues)
    }

    pub fn issues(&self) -> &[IssueSpec] {
        &self.issues
    }

    /// Number of issues N.
    pub fn issue_count(&self) -> usize {
        self.issues.len()
    }

    /// Per-issue value counts M_i.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size_of(&self, issue: usize) -> usize {
        self.sizes[issue]
    }

    /// Total number of offers, the product of all M_i.
    pub fn offer_count(&self) -> u64 {
        self.offer_count
    }

    pub fn validate_offer(&self, offer: &Offer) -> Result<(), ModelError> {
        if offer.values().len() != self.issue_count() {
            return Err(ModelError::OfferLength {
                expected: self.issue_count(),
                got: offer.values().len(),
            });
        }
        for (i, &v) in offer.values().iter().enumerate() {
            if v >= self.sizes[i] {
                return Err(ModelError::ValueIndex {
                    issue: i,
                    value: v,
                    size: self.sizes[i],
                });
            }
        }
        Ok(())
    }

    /// Mixed-radix rank of an offer; lexicographic in issue order (issue 0 is
    /// the most significant digit). Inverse of [`NegotiationSpace::index_offer`].
    pub fn offer_index(&self, offer: &Offer) -> u64 {
        let mut index: u64 = 0;
        for (i, &v) in offer.values().iter().enumerate() {
            index = index * self.sizes[i] as u64 + v as u64;
        }
        index
    }

    /// Offer with the given rank; inverse of [`NegotiationSpace::offer_index`].
    pub fn index_offer(&self, mut index: u64) -> Result<Offer, ModelError> {
        if index >= self.offer_count {
            return Err(ModelError::IndexOutOfRange {
                index,
                count: self.offer_count,
            });
        }
        let mut values = vec![0usize; self.issue_count()];
        for i in (0..self.issue_count()).rev() {
            let m = self.sizes[i] as u64;
            values[i] = (index % m) as usize;
            index /= m;
        }
        Ok(Offer::new(values))
    }

    /// Iterates every offer in index order using an odometer walk.
    pub fn offers(&self) -> OfferIter<'_> {
        OfferIter {
            space: self,
            current: Some(vec![0; self.issue_count()]),
        }
    }
}

/// Odometer-style iterator over a full negotiation space.
pub struct OfferIter<'a> {
    space: &'a NegotiationSpace,
    current: Option<Vec<usize>>,
}

impl Iterator for OfferIter<'_> {
    type Item = Offer;

    fn next(&mut self) -> Option<Offer> {
        let current = self.current.take()?;
        let out = Offer::new(current.clone());
        let mut next = current;
        for i in (0..next.len()).rev() {
            next[i] += 1;
            if next[i] < self.space.sizes[i] {
                self.current = Some(next);
                return Some(out);
            }
            next[i] = 0;
        }
        // wrapped past the last offer
        Some(out)
    }
}

/// One point of the negotiation space: a value index per issue.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Offer(Vec<usize>);

impl Offer {
    pub fn new(values: Vec<usize>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn value_at(&self, issue: usize) -> usize {
        self.0[issue]
    }
}

impl From<Vec<usize>> for Offer {
    fn from(values: Vec<usize>) -> Self {
        Self(values)
    }
}

/// Linearly additive utility: per-issue evaluation tables plus importance
/// weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityFunction {
    weights: Vec<f64>,
    evaluations: Vec<Vec<f64>>,
}

impl UtilityFunction {
    pub fn new(
        space: &NegotiationSpace,
        weights: Vec<f64>,
        evaluations: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let n = space.issue_count();
        if weights.len() != n {
            return Err(ModelError::WeightCount {
                expected: n,
                got: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(&w) || w.is_nan() {
                return Err(ModelError::WeightRange { index: i, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ModelError::WeightSum { sum });
        }
        if evaluations.len() != n {
            return Err(ModelError::EvaluationRows {
                expected: n,
                got: evaluations.len(),
            });
        }
        for (i, row) in evaluations.iter().enumerate() {
            if row.len() != space.size_of(i) {
                return Err(ModelError::EvaluationShape {
                    issue: i,
                    expected: space.size_of(i),
                    got: row.len(),
                });
            }
        }
        Ok(Self {
            weights,
            evaluations,
        })
    }

    /// Builds a utility with uniform weights `w_i = 1/N`.
    pub fn with_uniform_weights(
        space: &NegotiationSpace,
        evaluations: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let n = space.issue_count();
        Self::new(space, vec![1.0 / n as f64; n], evaluations)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn evaluations(&self) -> &[Vec<f64>] {
        &self.evaluations
    }

    pub fn evaluation(&self, issue: usize, value: usize) -> f64 {
        self.evaluations[issue][value]
    }

    /// Overwrites one evaluation cell. Shape is unchanged, so the function
    /// stays valid for its space.
    pub fn set_evaluation(&mut self, issue: usize, value: usize, eval: f64) {
        self.evaluations[issue][value] = eval;
    }

    /// `sum_i w_i * e_i(offer_i)`. The offer must be valid for the space the
    /// table was built against.
    pub fn utility(&self, offer: &Offer) -> f64 {
        debug_assert_eq!(offer.values().len(), self.weights.len());
        let mut total = 0.0;
        for (i, &v) in offer.values().iter().enumerate() {
            total += self.weights[i] * self.evaluations[i][v];
        }
        total
    }

    /// Utility of the best offer: `sum_i w_i * max_v e_i(v)`.
    ///
    /// Computed by materialising the per-issue-argmax offer and evaluating it,
    /// so the result is bit-identical to `utility(best_offer())`.
    pub fn max_utility(&self) -> f64 {
        self.utility(&self.best_offer())
    }

    /// The per-issue-argmax offer, taking the lowest value index on ties.
    pub fn best_offer(&self) -> Offer {
        let values = self
            .evaluations
            .iter()
            .map(|row| {
                let mut best = 0;
                for (v, &e) in row.iter().enumerate() {
                    if e > row[best] {
                        best = v;
                    }
                }
                best
            })
            .collect();
        Offer::new(values)
    }
}

/// Which offer-generation strategy an agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    RandomSampling,
    Concession,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 2] = [StrategyKind::RandomSampling, StrategyKind::Concession];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::RandomSampling => "random",
            StrategyKind::Concession => "concession",
        }
    }
}

/// Which protocol governs a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Aop,
    Acop,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Aop, Protocol::Acop];

    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Aop => "aop",
            Protocol::Acop => "acop",
        }
    }
}

/// Everything one agent brings to a session: its utility, reservation
/// fraction, strategy and protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentProfile {
    pub utility: UtilityFunction,
    pub reservation_fraction: f64,
    pub strategy: StrategyKind,
    pub protocol: Protocol,
}

impl AgentProfile {
    pub fn new(
        utility: UtilityFunction,
        reservation_fraction: f64,
        strategy: StrategyKind,
        protocol: Protocol,
    ) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&reservation_fraction) || reservation_fraction.is_nan() {
            return Err(ModelError::ReservationRange(reservation_fraction));
        }
        Ok(Self {
            utility,
            reservation_fraction,
            strategy,
            protocol,
        })
    }

    /// Minimum utility an offer must reach to be acceptable:
    /// `reservation_fraction * max_utility`.
    pub fn acceptance_threshold(&self) -> f64 {
        self.reservation_fraction * self.utility.max_utility()
    }

    /// Inclusive comparison: an offer exactly at the threshold is acceptable.
    pub fn is_acceptable(&self, offer: &Offer) -> bool {
        self.utility.utility(offer) >= self.acceptance_threshold()
    }
}

/// On-disk scenario format.
///
/// ```json
/// {"issues": [{"name": "...", "values": ["...", "..."]}],
///  "agents": {"A": {"weights": [...], "evaluations": [[...]], "reservation": 0.5},
///             "B": {...}}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub issues: Vec<IssueSpec>,
    pub agents: ScenarioAgents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAgents {
    #[serde(rename = "A")]
    pub a: ScenarioAgent,
    #[serde(rename = "B")]
    pub b: ScenarioAgent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAgent {
    pub weights: Vec<f64>,
    pub evaluations: Vec<Vec<f64>>,
    pub reservation: f64,
}

impl ScenarioFile {
    pub fn new(
        space: &NegotiationSpace,
        utility_a: &UtilityFunction,
        reservation_a: f64,
        utility_b: &UtilityFunction,
        reservation_b: f64,
    ) -> Self {
        let agent = |u: &UtilityFunction, reservation: f64| ScenarioAgent {
            weights: u.weights().to_vec(),
            evaluations: u.evaluations().to_vec(),
            reservation,
        };
        Self {
            issues: space.issues().to_vec(),
            agents: ScenarioAgents {
                a: agent(utility_a, reservation_a),
                b: agent(utility_b, reservation_b),
            },
        }
    }

    /// Validates the file against the model invariants and splits it into the
    /// engine types. Errors signal a malformed scenario.
    pub fn into_parts(self) -> Result<ScenarioParts, ModelError> {
        let space = NegotiationSpace::new(self.issues)?;
        let utility_a = UtilityFunction::new(&space, self.agents.a.weights, self.agents.a.evaluations)?;
        let utility_b = UtilityFunction::new(&space, self.agents.b.weights, self.agents.b.evaluations)?;
        for r in [self.agents.a.reservation, self.agents.b.reservation] {
            if !(0.0..=1.0).contains(&r) || r.is_nan() {
                return Err(ModelError::ReservationRange(r));
            }
        }
        Ok(ScenarioParts {
            space,
            utility_a,
            reservation_a: self.agents.a.reservation,
            utility_b,
            reservation_b: self.agents.b.reservation,
        })
    }
}

/// A validated scenario file split into engine types.
#[derive(Debug, Clone)]
pub struct ScenarioParts {
    pub space: NegotiationSpace,
    pub utility_a: UtilityFunction,
    pub reservation_a: f64,
    pub utility_b: UtilityFunction,
    pub reservation_b: f64,
}
