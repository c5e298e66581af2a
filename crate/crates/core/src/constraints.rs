//! Atomic constraints: deduction, bookkeeping and impossibility detection.
//!
//! An atomic constraint declares one (issue, value) assignment unacceptable.
//! Agents deduce their own constraints from their utility function and
//! acceptance threshold with a depth-1 branch-and-bound bound: an assignment
//! is ruled out exactly when even its best completion falls below the
//! threshold. For linearly additive utilities this bound is exact, so the
//! deduced set is both sound and complete at the atomic level.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{NegotiationSpace, Offer, UtilityFunction};

/// One (issue, value) assignment declared unacceptable.
///
/// Serializes as a two-element array `[issue, value]` in wire messages and
/// transcript logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct AtomicConstraint {
    pub issue: usize,
    pub value: usize,
}

impl AtomicConstraint {
    pub fn new(issue: usize, value: usize) -> Self {
        Self { issue, value }
    }

    /// True when the offer assigns the ruled-out value to the issue.
    pub fn violated_by(&self, offer: &Offer) -> bool {
        offer.value_at(self.issue) == self.value
    }
}

impl From<(usize, usize)> for AtomicConstraint {
    fn from((issue, value): (usize, usize)) -> Self {
        Self { issue, value }
    }
}

impl From<AtomicConstraint> for (usize, usize) {
    fn from(c: AtomicConstraint) -> Self {
        (c.issue, c.value)
    }
}

/// When an agent transmits its known constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintPolicy {
    /// Send a constraint only once the opponent proposes an offer violating it.
    Reactive,
    /// Send every not-yet-sent constraint with each proposal.
    Eager,
}

/// Per-agent constraint bookkeeping: what it knows, what it heard, what it
/// already told the opponent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintStore {
    own: BTreeSet<AtomicConstraint>,
    received: BTreeSet<AtomicConstraint>,
    sent: BTreeSet<AtomicConstraint>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn own(&self) -> &BTreeSet<AtomicConstraint> {
        &self.own
    }

    pub fn received(&self) -> &BTreeSet<AtomicConstraint> {
        &self.received
    }

    pub fn sent(&self) -> &BTreeSet<AtomicConstraint> {
        &self.sent
    }

    /// Adds deduced or apriori constraints, returning the ones not already
    /// known.
    pub fn record_own<I: IntoIterator<Item = AtomicConstraint>>(
        &mut self,
        constraints: I,
    ) -> Vec<AtomicConstraint> {
        constraints
            .into_iter()
            .filter(|c| self.own.insert(*c))
            .collect()
    }

    /// Unions constraints communicated by the opponent into the received set,
    /// returning the ones that were new. Idempotent.
    pub fn record_received<'a, I: IntoIterator<Item = &'a AtomicConstraint>>(
        &mut self,
        constraints: I,
    ) -> Vec<AtomicConstraint> {
        constraints
            .into_iter()
            .filter(|c| self.received.insert(**c))
            .copied()
            .collect()
    }

    /// Everything this agent knows is ruled out, own and received together.
    pub fn known(&self) -> BTreeSet<AtomicConstraint> {
        self.own.union(&self.received).copied().collect()
    }

    /// True when some issue has every value covered by own or received
    /// constraints; agreement is then provably impossible.
    pub fn is_dead(&self, space: &NegotiationSpace) -> bool {
        // own and received may overlap, so count distinct cells per issue
        let mut covered = vec![0usize; space.issue_count()];
        let mut seen = BTreeSet::new();
        for c in self.own.iter().chain(self.received.iter()) {
            if c.issue < covered.len() && seen.insert(*c) {
                covered[c.issue] += 1;
            }
        }
        covered
            .iter()
            .enumerate()
            .any(|(i, &n)| n == space.size_of(i))
    }

    /// Which constraints to attach to the next proposal under the given
    /// policy. The caller must mark the returned ones as sent once the
    /// proposal goes out.
    pub fn constraints_to_send(
        &self,
        policy: ConstraintPolicy,
        last_incoming: Option<&Offer>,
    ) -> Vec<AtomicConstraint> {
        match policy {
            ConstraintPolicy::Eager => self.own.difference(&self.sent).copied().collect(),
            ConstraintPolicy::Reactive => match last_incoming {
                None => Vec::new(),
                Some(offer) => self
                    .own
                    .difference(&self.sent)
                    .filter(|c| c.violated_by(offer))
                    .copied()
                    .collect(),
            },
        }
    }

    pub fn mark_sent<I: IntoIterator<Item = AtomicConstraint>>(&mut self, constraints: I) {
        for c in constraints {
            debug_assert!(self.own.contains(&c), "sent must be a subset of own");
            self.sent.insert(c);
        }
    }
}

/// Deduces every atomic constraint implied by the utility function and
/// threshold: the set of (issue, value) whose best completion has utility
/// strictly below the threshold.
///
/// The bound is evaluated by materialising the completion offer (per-issue
/// argmax everywhere else) and calling `utility` on it, so comparisons agree
/// bit-for-bit with any oracle that maximises `utility` over offers.
pub fn deduce_atomic_constraints(
    space: &NegotiationSpace,
    utility: &UtilityFunction,
    threshold: f64,
) -> BTreeSet<AtomicConstraint> {
    let mut constraints = BTreeSet::new();
    let best = utility.best_offer();
    for issue in 0..space.issue_count() {
        let mut completion = best.clone();
        for value in 0..space.size_of(issue) {
            let mut values = completion.values().to_vec();
            values[issue] = value;
            completion = Offer::new(values);
            if utility.utility(&completion) < threshold {
                constraints.insert(AtomicConstraint::new(issue, value));
            }
        }
    }
    constraints
}
