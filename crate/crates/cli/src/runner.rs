//! Executes the 4-way strategy x protocol comparison over a configuration
//! batch.
//!
//! Seeds are derived, never scheduled: each configuration's session seed
//! comes from (master seed, configuration index), shared by its four
//! sessions so the protocols are compared under common random numbers.
//! Output rows are sorted at the end, so worker count never affects the
//! bytes written.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use acop_core::scenario::count_solutions;
use acop_core::{
    derive_agent_seed, run_session, AgentProfile, Configuration, ConstraintPolicy, Protocol,
    SessionConfig, StrategyKind,
};

use crate::results::{read_rows, rows_to_csv, sort_rows, write_rows, ResultRow, CSV_HEADER};

/// Seed-derivation tag for a configuration's session seed. Tags 0 and 1 are
/// the per-agent streams derived inside a session.
pub const SESSION_SEED_TAG: u64 = 2;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub master_seed: u64,
    pub policy: ConstraintPolicy,
    pub workers: usize,
}

/// Runs all four (strategy, protocol) sessions for one configuration.
pub fn run_configuration(
    config: &Configuration,
    config_index: usize,
    master_seed: u64,
    policy: ConstraintPolicy,
) -> Result<Vec<ResultRow>> {
    let scenario = &config.scenario;
    let n_solutions = count_solutions(config)?;
    let session_seed = derive_agent_seed(master_seed, config_index as u64, SESSION_SEED_TAG);
    let mut rows = Vec::with_capacity(4);
    for strategy in StrategyKind::ALL {
        for protocol in Protocol::ALL {
            let profile_a = AgentProfile::new(
                scenario.utility_a.clone(),
                config.reservation_a,
                strategy,
                protocol,
            )?;
            let profile_b = AgentProfile::new(
                scenario.utility_b.clone(),
                config.reservation_b,
                strategy,
                protocol,
            )?;
            let session = SessionConfig::new(
                scenario.space.clone(),
                profile_a,
                profile_b,
                session_seed,
            )?
            .with_policy(policy);
            let record = run_session(&session)?;
            rows.push(ResultRow {
                config_id: config.id.clone(),
                strategy: strategy.as_str().to_string(),
                protocol: protocol.as_str().to_string(),
                success: record.success,
                message_count: record.message_count,
                utility_a: record.utility_a,
                utility_b: record.utility_b,
                termination_reason: record.termination_reason.as_str().to_string(),
                n_constraints_injected: scenario.provenance.injected_per_agent,
                rho_a: config.reservation_a,
                rho_b: config.reservation_b,
                n_solutions,
                seed: session_seed,
            });
        }
    }
    Ok(rows)
}

/// Runs a whole batch in memory and returns the sorted rows.
pub fn run_batch(configs: &[Configuration], options: &RunOptions) -> Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .context("build worker pool")?;
    let mut rows: Vec<ResultRow> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, config)| {
                run_configuration(config, index, options.master_seed, options.policy)
            })
            .collect::<Result<Vec<Vec<ResultRow>>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn journal_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".journal");
    PathBuf::from(p)
}

fn partial_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".partial");
    PathBuf::from(p)
}

/// Runs a batch to a CSV file, journalling completed configuration ids so an
/// interrupted run resumes where it stopped. The final CSV is sorted and
/// byte-identical no matter how the work was chunked or resumed.
pub fn run_batch_to_file(
    configs: &[Configuration],
    options: &RunOptions,
    out: &Path,
) -> Result<usize> {
    let journal = journal_path(out);
    let partial = partial_path(out);

    let mut done: HashSet<String> = HashSet::new();
    let mut rows: Vec<ResultRow> = Vec::new();
    if journal.exists() && partial.exists() {
        for line in fs::read_to_string(&journal)?.lines() {
            done.insert(line.to_string());
        }
        rows = read_rows(&partial)?;
        rows.retain(|r| done.contains(&r.config_id));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .context("build worker pool")?;

    let pending: Vec<(usize, &Configuration)> = configs
        .iter()
        .enumerate()
        .filter(|(_, c)| !done.contains(&c.id))
        .collect();

    let mut journal_file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&journal)?;
    let mut partial_file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&partial)?;
    if partial_file.metadata()?.len() == 0 {
        writeln!(partial_file, "{CSV_HEADER}")?;
    }

    for chunk in pending.chunks(256) {
        let chunk_rows: Vec<Vec<ResultRow>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|(index, config)| {
                    run_configuration(config, *index, options.master_seed, options.policy)
                })
                .collect::<Result<_>>()
        })?;
        for config_rows in chunk_rows {
            let csv = rows_to_csv(&config_rows)?;
            let body = std::str::from_utf8(&csv)?
                .split_once('\n')
                .map(|(_, rest)| rest.to_string())
                .unwrap_or_default();
            partial_file.write_all(body.as_bytes())?;
            writeln!(journal_file, "{}", config_rows[0].config_id)?;
            rows.extend(config_rows);
        }
        partial_file.flush()?;
        journal_file.flush()?;
    }

    sort_rows(&mut rows);
    write_rows(out, &rows)?;
    let _ = fs::remove_file(&journal);
    let _ = fs::remove_file(&partial);
    Ok(rows.len())
}
