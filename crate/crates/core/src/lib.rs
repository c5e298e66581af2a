//! Bilateral automated-negotiation engine.
//!
//! Implements the alternating offers protocol (AOP) and its constraint-bearing
//! extension (ACOP), in which a proposal may carry atomic constraints that
//! declare single (issue, value) assignments unacceptable. The crate provides
//! the negotiation model (spaces, offers, linearly additive utilities), the
//! two reference strategies (random sampling and concession), constraint
//! deduction via a depth-1 branch-and-bound bound, a deterministic session
//! engine, scenario generation with constraint injection, and a line-delimited
//! JSON wire format so two agents can negotiate across a byte stream.

pub mod constraints;
pub mod fixtures;
pub mod model;
pub mod protocol;
pub mod scenario;
pub mod strategy;
pub mod wire;

pub use constraints::{AtomicConstraint, ConstraintPolicy, ConstraintStore};
pub use model::{
    AgentProfile, IssueSpec, ModelError, NegotiationSpace, Offer, Protocol, ScenarioFile,
    StrategyKind, UtilityFunction,
};
pub use protocol::{
    derive_agent_seed, run_session, Message, MessageKind, NegotiationRecord, Role, SessionConfig,
    SessionError, TerminationReason, TranscriptEntry,
};
pub use scenario::{Configuration, GridKind, Scenario, ScenarioError, ValueRange};
pub use strategy::{decide, ConcessionEnumerator, Decision, RandomSampler, StrategyState};
pub use wire::{DecodeError, WireFrame, PROTOCOL_VERSION};
