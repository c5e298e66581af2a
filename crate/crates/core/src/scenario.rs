//! Scenario generation, constraint injection, reservation grids and
//! brute-force oracles.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{NegotiationSpace, UtilityFunction};

/// Evaluation cells overwritten by constraint injection get this value; it is
/// below minus the maximum utility of any generated table.
pub const CONSTRAINT_SENTINEL: f64 = -1000.0;

/// Exhaustive oracles refuse spaces larger than this.
pub const ORACLE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("cannot inject {n} constraints, the table only has {max} cells")]
    InjectionCount { n: usize, max: usize },
    #[error("space has {count} offers, exhaustive oracle budget is {ORACLE_BUDGET}")]
    SpaceTooLarge { count: u64 },
}

/// Integer range evaluation entries are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueRange {
    ZeroTo100,
    ZeroTo25,
}

impl ValueRange {
    pub fn upper(&self) -> u32 {
        match self {
            ValueRange::ZeroTo100 => 100,
            ValueRange::ZeroTo25 => 25,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ValueRange::ZeroTo100 => "100",
            ValueRange::ZeroTo25 => "25",
        }
    }
}

/// How a scenario was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub value_range: ValueRange,
    pub master_seed: u64,
    pub base_index: usize,
    pub injected_per_agent: usize,
}

/// A pair of utility functions over one space.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: NegotiationSpace,
    pub utility_a: UtilityFunction,
    pub utility_b: UtilityFunction,
    pub provenance: Provenance,
}

/// A scenario plus a pair of reservation fractions; the unit experiments run
/// on.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub scenario: Arc<Scenario>,
    pub reservation_a: f64,
    pub reservation_b: f64,
    pub id: String,
}

impl Configuration {
    pub fn threshold_a(&self) -> f64 {
        self.reservation_a * self.scenario.utility_a.max_utility()
    }

    pub fn threshold_b(&self) -> f64 {
        self.reservation_b * self.scenario.utility_b.max_utility()
    }
}

/// Draws both agents' evaluation tables i.i.d. uniform from the range, with
/// uniform weights. Entries are generated row-major, agent A first, so the
/// result is a pure function of the rng state.
pub fn generate_scenario(
    space: &NegotiationSpace,
    value_range: ValueRange,
    rng: &mut ChaCha8Rng,
) -> Scenario {
    let table = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        space
            .sizes()
            .iter()
            .map(|&m| {
                (0..m)
                    .map(|_| rng.gen_range(0..=value_range.upper()) as f64)
                    .collect()
            })
            .collect()
    };
    let rows_a = table(rng);
    let rows_b = table(rng);
    Scenario {
        space: space.clone(),
        utility_a: UtilityFunction::with_uniform_weights(space, rows_a).unwrap(),
        utility_b: UtilityFunction::with_uniform_weights(space, rows_b).unwrap(),
        provenance: Provenance {
            value_range,
            master_seed: 0,
            base_index: 0,
            injected_per_agent: 0,
        },
    }
}

/// Cells of a utility table ranked by weighted contribution descending, ties
/// by issue index then value index.
fn favourite_cells(u: &UtilityFunction) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (0..u.evaluations().len())
        .flat_map(|i| (0..u.evaluations()[i].len()).map(move |v| (i, v)))
        .collect();
    cells.sort_by(|&(i1, v1), &(i2, v2)| {
        let c1 = u.weights()[i1] * u.evaluation(i1, v1);
        let c2 = u.weights()[i2] * u.evaluation(i2, v2);
        c2.total_cmp(&c1).then(i1.cmp(&i2)).then(v1.cmp(&v2))
    });
    cells
}

/// Overwrites each agent's evaluations at the opponent's `n` most favourable
/// assignments with the constraint sentinel. Rankings are taken from the
/// original tables; weights are untouched.
pub fn inject_constraints(scenario: &Scenario, n_per_agent: usize) -> Result<Scenario, ScenarioError> {
    let cells: usize = scenario.space.sizes().iter().sum();
    if n_per_agent > cells {
        return Err(ScenarioError::InjectionCount {
            n: n_per_agent,
            max: cells,
        });
    }
    let favourites_of_b = favourite_cells(&scenario.utility_b);
    let favourites_of_a = favourite_cells(&scenario.utility_a);
    let mut utility_a = scenario.utility_a.clone();
    let mut utility_b = scenario.utility_b.clone();
    for &(i, v) in favourites_of_b.iter().take(n_per_agent) {
        utility_a.set_evaluation(i, v, CONSTRAINT_SENTINEL);
    }
    for &(i, v) in favourites_of_a.iter().take(n_per_agent) {
        utility_b.set_evaluation(i, v, CONSTRAINT_SENTINEL);
    }
    Ok(Scenario {
        space: scenario.space.clone(),
        utility_a,
        utility_b,
        provenance: Provenance {
            injected_per_agent: n_per_agent,
            ..scenario.provenance.clone()
        },
    })
}

/// The two reservation-fraction grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Linear,
    Log,
}

impl GridKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridKind::Linear => "lin",
            GridKind::Log => "log",
        }
    }
}

/// Ten reservation fractions: linear `1/2 + i/20`, or log-spaced
/// `10^(log10(1/2) - i*log10(1/2)/10)`.
pub fn reservation_grid(kind: GridKind) -> Vec<f64> {
    match kind {
        GridKind::Linear => (0..10).map(|i| 0.5 + i as f64 / 20.0).collect(),
        GridKind::Log => {
            let l = 0.5f64.log10();
            (0..10).map(|i| 10f64.powf(l - i as f64 * l / 10.0)).collect()
        }
    }
}

/// Exact number of offers acceptable to both agents (inclusive thresholds).
/// Refuses spaces beyond the oracle budget.
pub fn count_solutions(config: &Configuration) -> Result<u64, ScenarioError> {
    let space = &config.scenario.space;
    if space.offer_count() > ORACLE_BUDGET {
        return Err(ScenarioError::SpaceTooLarge {
            count: space.offer_count(),
        });
    }
    let ta = config.threshold_a();
    let tb = config.threshold_b();
    let ua = &config.scenario.utility_a;
    let ub = &config.scenario.utility_b;
    let mut count = 0;
    for offer in space.offers() {
        if ua.utility(&offer) >= ta && ub.utility(&offer) >= tb {
            count += 1;
        }
    }
    Ok(count)
}

/// Parameters for assembling a configuration batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchParams {
    pub n_issues: usize,
    pub n_values: usize,
    pub n_base_scenarios: usize,
    pub ranges: Vec<ValueRange>,
    pub constraint_counts: Vec<usize>,
    pub grids: Vec<GridKind>,
    pub master_seed: u64,
}

impl BatchParams {
    /// Number of configurations the batch will contain, without building it.
    pub fn configuration_count(&self) -> u64 {
        self.n_base_scenarios as u64
            * self.constraint_counts.len() as u64
            * grid_pairs(&self.grids).len() as u64
    }
}

/// One injected variant of a base scenario.
#[derive(Debug, Clone)]
pub struct ScenarioVariant {
    pub base_index: usize,
    pub n_injected: usize,
    pub scenario: Arc<Scenario>,
}

/// A fully assembled batch: scenario variants plus the configuration grid.
#[derive(Debug, Clone)]
pub struct Batch {
    pub space: NegotiationSpace,
    pub variants: Vec<ScenarioVariant>,
    pub configurations: Vec<Configuration>,
}

/// Reservation pairs from the union of the selected grids' squares, with
/// stable ids. Exact duplicates across grids (the (1/2, 1/2) corner) are kept
/// once.
pub fn grid_pairs(grids: &[GridKind]) -> Vec<(String, f64, f64)> {
    let mut out: Vec<(String, f64, f64)> = Vec::new();
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for kind in grids {
        let grid = reservation_grid(*kind);
        for (i, &ra) in grid.iter().enumerate() {
            for (j, &rb) in grid.iter().enumerate() {
                if seen.iter().any(|&(a, b)| a == ra && b == rb) {
                    continue;
                }
                seen.push((ra, rb));
                out.push((format!("{}-{i}-{j}", kind.as_str()), ra, rb));
            }
        }
    }
    out
}

/// Builds the full Cartesian batch: unique base scenarios, constraint-count
/// variants, reservation pairs. Deterministic under the master seed;
/// configuration ids encode (base, count, pair).
pub fn build_batch(params: &BatchParams) -> Result<Batch, ScenarioError> {
    let space = NegotiationSpace::uniform(params.n_issues, params.n_values)
        .expect("batch space dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(params.master_seed);
    let mut bases: Vec<Scenario> = Vec::with_capacity(params.n_base_scenarios);
    for base_index in 0..params.n_base_scenarios {
        let range = params.ranges[base_index % params.ranges.len()];
        // uniqueness by rejection on full-table equality
        let scenario = loop {
            let mut s = generate_scenario(&space, range, &mut rng);
            let duplicate = bases.iter().any(|existing| {
                existing.utility_a == s.utility_a && existing.utility_b == s.utility_b
            });
            if !duplicate {
                s.provenance.master_seed = params.master_seed;
                s.provenance.base_index = base_index;
                break s;
            }
        };
        bases.push(scenario);
    }

    let pairs = grid_pairs(&params.grids);
    let mut variants = Vec::new();
    let mut configurations = Vec::new();
    for (base_index, base) in bases.iter().enumerate() {
        for &n in &params.constraint_counts {
            let injected = inject_constraints(base, n)?;
            let scenario = Arc::new(injected);
            variants.push(ScenarioVariant {
                base_index,
                n_injected: n,
                scenario: Arc::clone(&scenario),
            });
            for (pair_id, ra, rb) in &pairs {
                configurations.push(Configuration {
                    scenario: Arc::clone(&scenario),
                    reservation_a: *ra,
                    reservation_b: *rb,
                    id: format!("s{base_index:03}-n{n:02}-{pair_id}"),
                });
            }
        }
    }
    Ok(Batch {
        space,
        variants,
        configurations,
    })
}

/// Every evaluation cell currently holding the constraint sentinel.
pub fn sentinel_cells(u: &UtilityFunction) -> BTreeSet<(usize, usize)> {
    let mut cells = BTreeSet::new();
    for (i, row) in u.evaluations().iter().enumerate() {
        for (v, &e) in row.iter().enumerate() {
            if e == CONSTRAINT_SENTINEL {
                cells.insert((i, v));
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{deduce_atomic_constraints, AtomicConstraint};
    use crate::model::Offer;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn generated_entries_stay_in_range() {
        let space = NegotiationSpace::uniform(5, 5).unwrap();
        let mut r = rng(1);
        for _ in 0..20 {
            let s = generate_scenario(&space, ValueRange::ZeroTo25, &mut r);
            for u in [&s.utility_a, &s.utility_b] {
                for row in u.evaluations() {
                    for &e in row {
                        assert!((0.0..=25.0).contains(&e));
                        assert_eq!(e, e.trunc());
                    }
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let space = NegotiationSpace::uniform(5, 5).unwrap();
        let a = generate_scenario(&space, ValueRange::ZeroTo100, &mut rng(9));
        let b = generate_scenario(&space, ValueRange::ZeroTo100, &mut rng(9));
        assert_eq!(a, b);
    }

    #[test]
    fn generated_mean_near_range_midpoint() {
        let space = NegotiationSpace::uniform(5, 5).unwrap();
        let mut r = rng(2);
        let n = 10_000usize;
        let mut sum = 0.0;
        for _ in 0..n / 50 {
            let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut r);
            for u in [&s.utility_a, &s.utility_b] {
                sum += u.evaluations().iter().flatten().sum::<f64>();
            }
        }
        let mean = sum / n as f64;
        // uniform on {0..100}: mean 50, sd ~29.15
        let se = 29.15 / (n as f64).sqrt();
        assert!((mean - 50.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn inject_zero_is_identity() {
        let space = NegotiationSpace::uniform(3, 3).unwrap();
        let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut rng(3));
        let injected = inject_constraints(&s, 0).unwrap();
        assert_eq!(injected.utility_a, s.utility_a);
        assert_eq!(injected.utility_b, s.utility_b);
    }

    #[test]
    fn inject_one_hits_the_opponents_best_cell() {
        let space = NegotiationSpace::uniform(2, 2).unwrap();
        let ua = UtilityFunction::with_uniform_weights(
            &space,
            vec![vec![10.0, 20.0], vec![30.0, 5.0]],
        )
        .unwrap();
        let ub = UtilityFunction::with_uniform_weights(
            &space,
            vec![vec![1.0, 2.0], vec![3.0, 99.0]],
        )
        .unwrap();
        let s = Scenario {
            space,
            utility_a: ua,
            utility_b: ub,
            provenance: Provenance {
                value_range: ValueRange::ZeroTo100,
                master_seed: 0,
                base_index: 0,
                injected_per_agent: 0,
            },
        };
        let injected = inject_constraints(&s, 1).unwrap();
        // B's unique best cell is (1,1); A's table takes the sentinel there
        assert_eq!(injected.utility_a.evaluation(1, 1), CONSTRAINT_SENTINEL);
        // A's unique best cell is (1,0); B mirrors
        assert_eq!(injected.utility_b.evaluation(1, 0), CONSTRAINT_SENTINEL);
        // weights untouched, exactly one cell per agent changed
        assert_eq!(injected.utility_a.weights(), s.utility_a.weights());
        assert_eq!(sentinel_cells(&injected.utility_a).len(), 1);
        assert_eq!(sentinel_cells(&injected.utility_b).len(), 1);
    }

    #[test]
    fn injected_cells_are_always_deduced_at_grid_thresholds() {
        let space = NegotiationSpace::uniform(5, 5).unwrap();
        let mut r = rng(4);
        for n in [1usize, 4, 12] {
            let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut r);
            let injected = inject_constraints(&s, n).unwrap();
            for rho in reservation_grid(GridKind::Linear) {
                for u in [&injected.utility_a, &injected.utility_b] {
                    let threshold = rho * u.max_utility();
                    let deduced = deduce_atomic_constraints(&injected.space, u, threshold);
                    for (i, v) in sentinel_cells(u) {
                        assert!(
                            deduced.contains(&AtomicConstraint::new(i, v)),
                            "injected cell ({i},{v}) missing at rho {rho}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn injection_count_is_validated() {
        let space = NegotiationSpace::uniform(2, 2).unwrap();
        let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut rng(5));
        assert!(inject_constraints(&s, 4).is_ok());
        assert_eq!(
            inject_constraints(&s, 5).unwrap_err(),
            ScenarioError::InjectionCount { n: 5, max: 4 }
        );
    }

    #[test]
    fn linear_grid_endpoints() {
        let grid = reservation_grid(GridKind::Linear);
        assert_eq!(grid.len(), 10);
        assert_eq!(grid[0], 0.5);
        assert_eq!(grid[9], 0.95);
        for w in grid.windows(2) {
            assert!((w[1] - w[0] - 0.05).abs() < 1e-12, "arithmetic step 0.05");
        }
    }

    #[test]
    fn log_grid_endpoints_and_ratio() {
        let grid = reservation_grid(GridKind::Log);
        assert_eq!(grid.len(), 10);
        assert!((grid[0] - 0.5).abs() < 1e-15);
        assert!((grid[9] - 0.5f64.powf(0.1)).abs() < 1e-12);
        let ratio = 0.5f64.powf(-0.1);
        for w in grid.windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-12, "geometric ratio");
        }
        for &x in &grid {
            assert!((0.5..1.0).contains(&x));
        }
    }

    fn config_of(scenario: Scenario, ra: f64, rb: f64) -> Configuration {
        Configuration {
            scenario: Arc::new(scenario),
            reservation_a: ra,
            reservation_b: rb,
            id: "test".into(),
        }
    }

    #[test]
    fn count_solutions_everything_acceptable_at_zero_reservation() {
        let space = NegotiationSpace::uniform(3, 3).unwrap();
        let s = generate_scenario(&space, ValueRange::ZeroTo25, &mut rng(6));
        let config = config_of(s, 0.0, 0.0);
        assert_eq!(count_solutions(&config).unwrap(), 27);
    }

    #[test]
    fn count_solutions_zero_when_threshold_above_max() {
        // all-negative table: rho * max is above max for rho < 1
        let space = NegotiationSpace::uniform(2, 2).unwrap();
        let ua = UtilityFunction::with_uniform_weights(&space, vec![vec![-10.0, -10.0]; 2])
            .unwrap();
        let ub =
            UtilityFunction::with_uniform_weights(&space, vec![vec![5.0, 5.0]; 2]).unwrap();
        let s = Scenario {
            space,
            utility_a: ua,
            utility_b: ub,
            provenance: Provenance {
                value_range: ValueRange::ZeroTo100,
                master_seed: 0,
                base_index: 0,
                injected_per_agent: 0,
            },
        };
        let config = config_of(s, 0.5, 0.0);
        assert_eq!(count_solutions(&config).unwrap(), 0);
    }

    #[test]
    fn count_solutions_double_entry_oracle() {
        let space = NegotiationSpace::uniform(5, 5).unwrap();
        let mut r = rng(7);
        for _ in 0..5 {
            let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut r);
            let config = config_of(s, 0.7, 0.6);
            let main = count_solutions(&config).unwrap();
            // independent route: iterate ranks through index_offer
            let ta = config.threshold_a();
            let tb = config.threshold_b();
            let mut other = 0;
            for k in 0..config.scenario.space.offer_count() {
                let offer = config.scenario.space.index_offer(k).unwrap();
                if config.scenario.utility_a.utility(&offer) >= ta
                    && config.scenario.utility_b.utility(&offer) >= tb
                {
                    other += 1;
                }
            }
            assert_eq!(main, other);
        }
    }

    #[test]
    fn count_solutions_symmetric_under_agent_swap() {
        let space = NegotiationSpace::uniform(4, 3).unwrap();
        let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut rng(8));
        let swapped = Scenario {
            space: s.space.clone(),
            utility_a: s.utility_b.clone(),
            utility_b: s.utility_a.clone(),
            provenance: s.provenance.clone(),
        };
        let c1 = count_solutions(&config_of(s, 0.6, 0.8)).unwrap();
        let c2 = count_solutions(&config_of(swapped, 0.8, 0.6)).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn count_solutions_refuses_oversized_spaces() {
        let space = NegotiationSpace::uniform(10, 8).unwrap(); // 8^10 > 1e6
        let s = generate_scenario(&space, ValueRange::ZeroTo25, &mut rng(9));
        assert!(matches!(
            count_solutions(&config_of(s, 0.5, 0.5)),
            Err(ScenarioError::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn batch_counts_match_the_product() {
        let params = BatchParams {
            n_issues: 2,
            n_values: 2,
            n_base_scenarios: 1,
            ranges: vec![ValueRange::ZeroTo100],
            constraint_counts: vec![0],
            grids: vec![GridKind::Linear],
            master_seed: 1,
        };
        assert_eq!(params.configuration_count(), 100);
        assert_eq!(build_batch(&params).unwrap().configurations.len(), 100);

        let params2 = BatchParams {
            n_base_scenarios: 2,
            constraint_counts: vec![0, 1],
            ..params
        };
        assert_eq!(params2.configuration_count(), 400);
        let batch = build_batch(&params2).unwrap();
        assert_eq!(batch.configurations.len(), 400);
        assert_eq!(batch.variants.len(), 4);
    }

    #[test]
    fn both_grids_union_drops_the_shared_corner() {
        let pairs = grid_pairs(&[GridKind::Linear, GridKind::Log]);
        assert_eq!(pairs.len(), 199, "only (1/2, 1/2) coincides");
        let params = BatchParams {
            n_issues: 2,
            n_values: 2,
            n_base_scenarios: 3,
            ranges: vec![ValueRange::ZeroTo100, ValueRange::ZeroTo25],
            constraint_counts: (0..=12).collect(),
            grids: vec![GridKind::Linear, GridKind::Log],
            master_seed: 0,
        };
        assert_eq!(params.configuration_count(), 3 * 13 * 199);
    }

    #[test]
    fn batch_is_deterministic_and_ids_are_stable() {
        let params = BatchParams {
            n_issues: 3,
            n_values: 3,
            n_base_scenarios: 2,
            ranges: vec![ValueRange::ZeroTo100],
            constraint_counts: vec![0, 2],
            grids: vec![GridKind::Linear],
            master_seed: 77,
        };
        let b1 = build_batch(&params).unwrap();
        let b2 = build_batch(&params).unwrap();
        let ids1: Vec<&str> = b1.configurations.iter().map(|c| c.id.as_str()).collect();
        let ids2: Vec<&str> = b2.configurations.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids1, ids2);
        assert_eq!(ids1[0], "s000-n00-lin-0-0");
        assert!(ids1.len() == 400 && ids1.iter().collect::<BTreeSet<_>>().len() == 400);
        for (c1, c2) in b1.configurations.iter().zip(&b2.configurations) {
            assert_eq!(c1.scenario.utility_a, c2.scenario.utility_a);
            assert_eq!(c1.reservation_a, c2.reservation_a);
        }
    }

    #[test]
    fn base_scenarios_are_unique() {
        let params = BatchParams {
            n_issues: 1,
            n_values: 2,
            n_base_scenarios: 8,
            ranges: vec![ValueRange::ZeroTo25],
            constraint_counts: vec![0],
            grids: vec![GridKind::Linear],
            master_seed: 5,
        };
        let batch = build_batch(&params).unwrap();
        for (i, v1) in batch.variants.iter().enumerate() {
            for v2 in &batch.variants[i + 1..] {
                assert!(
                    v1.scenario.utility_a != v2.scenario.utility_a
                        || v1.scenario.utility_b != v2.scenario.utility_b
                );
            }
        }
    }

    #[test]
    fn possible_configurations_reach_agreement_under_concession() {
        use crate::model::{AgentProfile, Protocol, StrategyKind};
        use crate::protocol::{run_session, SessionConfig, TerminationReason};
        // on small spaces: if a solution exists, deterministic concession
        // sessions end in acceptance or timeout, never premature exhaustion
        let space = NegotiationSpace::uniform(3, 4).unwrap();
        let mut r = rng(10);
        for trial in 0..30 {
            let s = generate_scenario(&space, ValueRange::ZeroTo100, &mut r);
            let config = config_of(s, 0.6, 0.6);
            let n = count_solutions(&config).unwrap();
            for protocol in [Protocol::Aop, Protocol::Acop] {
                let a = AgentProfile::new(
                    config.scenario.utility_a.clone(),
                    config.reservation_a,
                    StrategyKind::Concession,
                    protocol,
                )
                .unwrap();
                let b = AgentProfile::new(
                    config.scenario.utility_b.clone(),
                    config.reservation_b,
                    StrategyKind::Concession,
                    protocol,
                )
                .unwrap();
                let sc = SessionConfig::new(space.clone(), a, b, trial).unwrap();
                let record = run_session(&sc).unwrap();
                if n >= 1 {
                    assert!(
                        matches!(
                            record.termination_reason,
                            TerminationReason::Accepted | TerminationReason::Timeout
                        ),
                        "possible config ended {:?}",
                        record.termination_reason
                    );
                } else {
                    assert!(!record.success);
                }
            }
        }
    }

    // offers iterate in index order; keep the odometer honest against the
    // bijection on an asymmetric space
    #[test]
    fn odometer_agrees_with_index_bijection() {
        let space = NegotiationSpace::uniform(3, 2).unwrap();
        for (k, offer) in space.offers().enumerate() {
            assert_eq!(space.index_offer(k as u64).unwrap(), offer);
            assert_eq!(space.offer_index(&offer), k as u64);
        }
        let _ = Offer::new(vec![0, 0, 0]);
    }
}
