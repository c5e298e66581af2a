//! Session engine: turn alternation, message validation, timeout and
//! early-termination, outcome recording.
//!
//! One negotiation is driven through two [`AgentEndpoint`]s. The in-process
//! driver [`run_session`] connects them directly; the wire layer connects the
//! same endpoint type over a byte stream, so both paths execute identical
//! turn logic. Agent A always opens. Each turn runs: incorporate incoming
//! constraints, dead-store check, accept check, timeout check, then offer
//! generation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{
    deduce_atomic_constraints, AtomicConstraint, ConstraintPolicy, ConstraintStore,
};
use crate::model::{AgentProfile, ModelError, NegotiationSpace, Offer, Protocol, StrategyKind};
use crate::strategy::StrategyState;

/// Default total proposal budget for one session (200 per agent).
pub const DEFAULT_MAX_PROPOSALS_TOTAL: usize = 400;

/// Which side of the table an agent sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::A => Role::B,
            Role::B => Role::A,
        }
    }

    /// Seed-derivation tag for this agent's random stream.
    pub fn seed_tag(self) -> u64 {
        match self {
            Role::A => 0,
            Role::B => 1,
        }
    }
}

/// The protocol alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    Propose,
    Accept,
    Terminate,
}

/// One protocol message. `offer` is the proposal for `propose`, an echo of
/// the accepted offer for `accept`, and absent for `terminate`. `constraints`
/// is present only on constrained-protocol proposals (possibly empty).
/// `terminate` carries the sender's reason so both sides record the same
/// outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub kind: MessageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offer: Option<Offer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<AtomicConstraint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<TerminationReason>,
}

impl Message {
    pub fn propose(offer: Offer, constraints: Option<Vec<AtomicConstraint>>) -> Self {
        Self {
            kind: MessageKind::Propose,
            offer: Some(offer),
            constraints,
            reason: None,
        }
    }

    pub fn accept(offer: Offer) -> Self {
        Self {
            kind: MessageKind::Accept,
            offer: Some(offer),
            constraints: None,
            reason: None,
        }
    }

    pub fn terminate(reason: TerminationReason) -> Self {
        Self {
            kind: MessageKind::Terminate,
            offer: None,
            constraints: None,
            reason: Some(reason),
        }
    }
}

/// One transcript line: `{"t": .., "from": .., "kind": .., ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub t: u64,
    pub from: Role,
    #[serde(flatten)]
    pub message: Message,
}

/// Why a session ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Accepted,
    Exhausted,
    Timeout,
    DeadStore,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::Accepted => "accepted",
            TerminationReason::Exhausted => "exhausted",
            TerminationReason::Timeout => "timeout",
            TerminationReason::DeadStore => "dead_store",
        }
    }
}

/// Outcome of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationRecord {
    pub success: bool,
    pub message_count: u64,
    pub utility_a: f64,
    pub utility_b: f64,
    pub termination_reason: TerminationReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<TranscriptEntry>>,
}

/// Everything needed to run one session deterministically.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub space: NegotiationSpace,
    pub profile_a: AgentProfile,
    pub profile_b: AgentProfile,
    pub protocol: Protocol,
    pub max_proposals_total: usize,
    pub per_agent_proposal_cap: usize,
    pub seed: u64,
    pub constraint_policy: ConstraintPolicy,
    pub record_transcript: bool,
}

impl SessionConfig {
    /// Both profiles must agree on the protocol; caps default to 400 total,
    /// 200 per agent; policy defaults to reactive.
    pub fn new(
        space: NegotiationSpace,
        profile_a: AgentProfile,
        profile_b: AgentProfile,
        seed: u64,
    ) -> Result<Self, SessionError> {
        if profile_a.protocol != profile_b.protocol {
            return Err(SessionError::ProtocolMismatch);
        }
        for utility in [&profile_a.utility, &profile_b.utility] {
            if utility.weights().len() != space.issue_count()
                || utility
                    .evaluations()
                    .iter()
                    .zip(space.sizes())
                    .any(|(row, &m)| row.len() != m)
            {
                return Err(SessionError::Model(ModelError::EvaluationRows {
                    expected: space.issue_count(),
                    got: utility.evaluations().len(),
                }));
            }
        }
        let protocol = profile_a.protocol;
        Ok(Self {
            space,
            profile_a,
            profile_b,
            protocol,
            max_proposals_total: DEFAULT_MAX_PROPOSALS_TOTAL,
            per_agent_proposal_cap: DEFAULT_MAX_PROPOSALS_TOTAL / 2,
            seed,
            constraint_policy: ConstraintPolicy::Reactive,
            record_transcript: false,
        })
    }

    pub fn with_policy(mut self, policy: ConstraintPolicy) -> Self {
        self.constraint_policy = policy;
        self
    }

    pub fn with_transcript(mut self, record: bool) -> Self {
        self.record_transcript = record;
        self
    }

    /// Sets the per-agent proposal cap; the total is always twice it.
    pub fn with_proposal_cap(mut self, per_agent: usize) -> Self {
        self.per_agent_proposal_cap = per_agent;
        self.max_proposals_total = per_agent * 2;
        self
    }
}

/// Reason codes for malformed or out-of-order messages.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolViolation {
    #[error("constraints are not part of the unconstrained protocol alphabet")]
    ConstraintsUnderAop,
    #[error("{0:?} requires an offer")]
    MissingOffer(MessageKind),
    #[error("terminate must not carry an offer")]
    OfferOnTerminate,
    #[error("only proposals may carry constraints")]
    ConstraintsOutsidePropose,
    #[error("only terminate may carry a reason")]
    ReasonOutsideTerminate,
    #[error("accept must echo the opponent's most recent offer")]
    StaleAccept,
    #[error("constraint ({issue}, {value}) is out of range for the space")]
    ConstraintOutOfRange { issue: usize, value: usize },
}

/// Errors from running a session. A protocol violation signals an
/// implementation bug in a strategy or driver, never recoverable state.
#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("agent profiles disagree on the protocol")]
    ProtocolMismatch,
    #[error("protocol violation: {0}")]
    Violation(#[from] ProtocolViolation),
    #[error("malformed scenario: {0}")]
    Model(#[from] ModelError),
}

/// Enforces the message invariants and turn order for one incoming or
/// outgoing message. `last_offer_from_opponent` is the most recent offer the
/// message's sender has received.
pub fn validate_message(
    protocol: Protocol,
    msg: &Message,
    last_offer_from_opponent: Option<&Offer>,
) -> Result<(), ProtocolViolation> {
    if protocol == Protocol::Aop && msg.constraints.is_some() {
        return Err(ProtocolViolation::ConstraintsUnderAop);
    }
    if msg.kind != MessageKind::Terminate && msg.reason.is_some() {
        return Err(ProtocolViolation::ReasonOutsideTerminate);
    }
    match msg.kind {
        MessageKind::Propose => {
            if msg.offer.is_none() {
                return Err(ProtocolViolation::MissingOffer(MessageKind::Propose));
            }
        }
        MessageKind::Accept => {
            if msg.constraints.is_some() {
                return Err(ProtocolViolation::ConstraintsOutsidePropose);
            }
            match (&msg.offer, last_offer_from_opponent) {
                (Some(echo), Some(last)) if echo == last => {}
                (None, _) => return Err(ProtocolViolation::MissingOffer(MessageKind::Accept)),
                _ => return Err(ProtocolViolation::StaleAccept),
            }
        }
        MessageKind::Terminate => {
            if msg.offer.is_some() {
                return Err(ProtocolViolation::OfferOnTerminate);
            }
            if msg.constraints.is_some() {
                return Err(ProtocolViolation::ConstraintsOutsidePropose);
            }
        }
    }
    Ok(())
}

/// Deterministic avalanche mixing of (master seed, configuration index,
/// agent tag) into a 64-bit stream seed.
///
/// The mixer is pinned bit-exactly: two splitmix64 finalizer rounds over the
/// inputs, each input folded in with the golden-ratio multiplier. Same inputs
/// always give the same output, on every platform.
pub fn derive_agent_seed(master_seed: u64, config_index: u64, agent_tag: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

    fn finalize(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    let mut h = master_seed;
    h = finalize(h ^ config_index.wrapping_mul(GOLDEN).wrapping_add(1));
    h = finalize(h ^ agent_tag.wrapping_mul(GOLDEN).wrapping_add(2));
    h
}

/// What an agent does with its turn.
#[derive(Debug, Clone, PartialEq)]
pub enum TurnOutcome {
    Propose {
        offer: Offer,
        constraints: Option<Vec<AtomicConstraint>>,
    },
    Accept {
        offer: Offer,
    },
    Terminate {
        reason: TerminationReason,
    },
    /// Proposal budget is spent; the session ends with no further message.
    Timeout,
}

impl TurnOutcome {
    pub fn to_message(&self) -> Option<Message> {
        match self {
            TurnOutcome::Propose { offer, constraints } => {
                Some(Message::propose(offer.clone(), constraints.clone()))
            }
            TurnOutcome::Accept { offer } => Some(Message::accept(offer.clone())),
            TurnOutcome::Terminate { reason } => Some(Message::terminate(*reason)),
            TurnOutcome::Timeout => None,
        }
    }
}

/// One agent's half of a session: strategy state, constraint store and turn
/// logic. The same endpoint drives in-process and wire sessions.
#[derive(Debug, Clone)]
pub struct AgentEndpoint {
    role: Role,
    space: NegotiationSpace,
    profile: AgentProfile,
    policy: ConstraintPolicy,
    state: StrategyState,
    store: ConstraintStore,
    max_proposals_total: usize,
    own_proposals: usize,
    opp_proposals: usize,
    last_incoming: Option<Offer>,
    last_outgoing: Option<Offer>,
}

impl AgentEndpoint {
    /// Builds the endpoint and, under the constrained protocol, deduces the
    /// agent's own constraints up front and folds them into its strategy
    /// state.
    pub fn new(
        space: &NegotiationSpace,
        profile: AgentProfile,
        role: Role,
        policy: ConstraintPolicy,
        session_seed: u64,
        max_proposals_total: usize,
    ) -> Self {
        let agent_seed = derive_agent_seed(session_seed, 0, role.seed_tag());
        let state = StrategyState::for_profile(space, &profile, agent_seed);
        let mut endpoint = Self {
            role,
            space: space.clone(),
            profile,
            policy,
            state,
            store: ConstraintStore::new(),
            max_proposals_total,
            own_proposals: 0,
            opp_proposals: 0,
            last_incoming: None,
            last_outgoing: None,
        };
        if endpoint.profile.protocol == Protocol::Acop {
            let threshold = endpoint.profile.acceptance_threshold();
            let deduced =
                deduce_atomic_constraints(space, &endpoint.profile.utility, threshold);
            let fresh = endpoint.store.record_own(deduced);
            for c in fresh {
                endpoint.state.apply_constraint(c);
            }
        }
        endpoint
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn protocol(&self) -> Protocol {
        self.profile.protocol
    }

    pub fn store(&self) -> &ConstraintStore {
        &self.store
    }

    pub fn last_incoming(&self) -> Option<&Offer> {
        self.last_incoming.as_ref()
    }

    pub fn last_outgoing(&self) -> Option<&Offer> {
        self.last_outgoing.as_ref()
    }

    /// Proposals seen so far, both directions.
    pub fn total_proposals(&self) -> usize {
        self.own_proposals + self.opp_proposals
    }

    pub fn proposal_budget(&self) -> usize {
        self.max_proposals_total
    }

    /// True utility of an offer under this agent's profile.
    pub fn utility_of(&self, offer: &Offer) -> f64 {
        self.profile.utility.utility(offer)
    }

    /// Validates and incorporates an opponent message: counts proposals,
    /// records the offer, folds any attached constraints into the store and
    /// strategy state, and (for concession agents) re-runs deduction on the
    /// updated effective utility.
    pub fn observe(&mut self, msg: &Message) -> Result<(), ProtocolViolation> {
        validate_message(self.profile.protocol, msg, self.last_outgoing.as_ref())?;
        if msg.kind != MessageKind::Propose {
            return Ok(());
        }
        self.opp_proposals += 1;
        self.last_incoming = msg.offer.clone();
        if let Some(constraints) = &msg.constraints {
            for c in constraints {
                if c.issue >= self.space.issue_count() || c.value >= self.space.size_of(c.issue)
                {
                    return Err(ProtocolViolation::ConstraintOutOfRange {
                        issue: c.issue,
                        value: c.value,
                    });
                }
            }
            let fresh = self.store.record_received(constraints.iter());
            if !fresh.is_empty() {
                for c in fresh {
                    self.state.apply_constraint(c);
                }
                self.re_deduce();
            }
        }
        Ok(())
    }

    /// Concession agents re-run deduction after their effective utility
    /// changed; the random strategy's own acceptability is unchanged by
    /// received constraints, so it does not re-deduce.
    fn re_deduce(&mut self) {
        if self.profile.strategy != StrategyKind::Concession {
            return;
        }
        if let StrategyState::Concession(enumerator) = &self.state {
            let deduced = deduce_atomic_constraints(
                &self.space,
                enumerator.effective_utility(),
                enumerator.threshold(),
            );
            let fresh = self.store.record_own(deduced);
            for c in fresh {
                self.state.apply_constraint(c);
            }
        }
    }

    /// Runs one turn: dead-store check, accept check, timeout check, then
    /// offer generation with constraint attachment.
    pub fn take_turn(&mut self) -> TurnOutcome {
        if self.profile.protocol == Protocol::Acop && self.store.is_dead(&self.space) {
            return TurnOutcome::Terminate {
                reason: TerminationReason::DeadStore,
            };
        }
        if let Some(incoming) = &self.last_incoming {
            if self.profile.is_acceptable(incoming) {
                return TurnOutcome::Accept {
                    offer: incoming.clone(),
                };
            }
        }
        if self.own_proposals + self.opp_proposals >= self.max_proposals_total {
            return TurnOutcome::Timeout;
        }
        match self.state.next_offer() {
            Some(offer) => {
                let constraints = if self.profile.protocol == Protocol::Acop {
                    let batch = self
                        .store
                        .constraints_to_send(self.policy, self.last_incoming.as_ref());
                    self.store.mark_sent(batch.iter().copied());
                    Some(batch)
                } else {
                    None
                };
                self.own_proposals += 1;
                self.last_outgoing = Some(offer.clone());
                TurnOutcome::Propose { offer, constraints }
            }
            None => TurnOutcome::Terminate {
                reason: TerminationReason::Exhausted,
            },
        }
    }
}

/// Runs one bilateral session in process. Deterministic given the config,
/// including the seed.
pub fn run_session(config: &SessionConfig) -> Result<NegotiationRecord, SessionError> {
    let mut a = AgentEndpoint::new(
        &config.space,
        config.profile_a.clone(),
        Role::A,
        config.constraint_policy,
        config.seed,
        config.max_proposals_total,
    );
    let mut b = AgentEndpoint::new(
        &config.space,
        config.profile_b.clone(),
        Role::B,
        config.constraint_policy,
        config.seed,
        config.max_proposals_total,
    );

    let mut transcript: Option<Vec<TranscriptEntry>> =
        config.record_transcript.then(Vec::new);
    let mut message_count: u64 = 0;
    let mut turn = Role::A;

    let (reason, accepted_offer) = loop {
        let (me, other) = match turn {
            Role::A => (&mut a, &mut b),
            Role::B => (&mut b, &mut a),
        };
        let outcome = me.take_turn();
        let Some(msg) = outcome.to_message() else {
            break (TerminationReason::Timeout, None);
        };
        validate_message(config.protocol, &msg, me.last_incoming())?;
        if let Some(entries) = &mut transcript {
            entries.push(TranscriptEntry {
                t: message_count,
                from: turn,
                message: msg.clone(),
            });
        }
        message_count += 1;
        other.observe(&msg)?;
        match outcome {
            TurnOutcome::Propose { .. } => {}
            TurnOutcome::Accept { offer } => break (TerminationReason::Accepted, Some(offer)),
            TurnOutcome::Terminate { reason } => break (reason, None),
            TurnOutcome::Timeout => unreachable!("timeout produces no message"),
        }
        turn = turn.other();
    };

    let success = reason == TerminationReason::Accepted;
    let (utility_a, utility_b) = match &accepted_offer {
        Some(offer) => (
            config.profile_a.utility.utility(offer),
            config.profile_b.utility.utility(offer),
        ),
        None => (0.0, 0.0),
    };
    Ok(NegotiationRecord {
        success,
        message_count,
        utility_a,
        utility_b,
        termination_reason: reason,
        transcript,
    })
}
