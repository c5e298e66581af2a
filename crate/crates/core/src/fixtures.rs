//! Reference scenarios used by tests, demos and the acceptance suite.

use crate::model::{
    AgentProfile, NegotiationSpace, Protocol, StrategyKind, UtilityFunction,
};

/// A hand-built 3-issue, 6-value scenario with a single deducible constraint.
///
/// At reservation fraction 1/3, agent A's huge penalty on (issue 1, value 1)
/// means no acceptable offer can assign that value, so A deduces exactly one
/// atomic constraint. Agent B's favourite offer violates it. Under the
/// constrained protocol with reactive sending and concession on both sides,
/// the session runs: A proposes, B proposes its favourite, A counters and
/// attaches the constraint, B reroutes around it, A accepts. Five messages.
pub fn example_trace_tables() -> (NegotiationSpace, UtilityFunction, UtilityFunction) {
    let space = NegotiationSpace::uniform(3, 6).unwrap();
    let a_rows = vec![
        vec![0.0, 35.0, 10.0, 20.0, 40.0, 90.0],
        vec![0.0, -1000.0, 10.0, 20.0, 40.0, 90.0],
        vec![0.0, 35.0, 10.0, 20.0, 40.0, 90.0],
    ];
    let b_rows = vec![
        vec![40.0, 90.0, 0.0, 0.0, 20.0, 0.0],
        vec![0.0, 90.0, 0.0, 0.0, 40.0, 0.0],
        vec![40.0, 90.0, 0.0, 0.0, 20.0, 0.0],
    ];
    let utility_a = UtilityFunction::with_uniform_weights(&space, a_rows).unwrap();
    let utility_b = UtilityFunction::with_uniform_weights(&space, b_rows).unwrap();
    (space, utility_a, utility_b)
}

/// Reservation fraction both agents use in the example trace scenario.
pub const EXAMPLE_TRACE_RESERVATION: f64 = 1.0 / 3.0;

/// Concession profiles for the example trace scenario under the given
/// protocol.
pub fn example_trace_profiles(protocol: Protocol) -> (NegotiationSpace, AgentProfile, AgentProfile) {
    let (space, utility_a, utility_b) = example_trace_tables();
    let a = AgentProfile::new(
        utility_a,
        EXAMPLE_TRACE_RESERVATION,
        StrategyKind::Concession,
        protocol,
    )
    .unwrap();
    let b = AgentProfile::new(
        utility_b,
        EXAMPLE_TRACE_RESERVATION,
        StrategyKind::Concession,
        protocol,
    )
    .unwrap();
    (space, a, b)
}
