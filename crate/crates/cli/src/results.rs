//! Result rows and the CSV schema they are stored in.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Exact column order of the results CSV.
pub const CSV_HEADER: &str = "config_id,strategy,protocol,success,message_count,utility_a,utility_b,termination_reason,n_constraints_injected,rho_a,rho_b,n_solutions,seed";

/// One session's outcome: one row per (configuration, strategy, protocol).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_id: String,
    pub strategy: String,
    pub protocol: String,
    pub success: bool,
    pub message_count: u64,
    pub utility_a: f64,
    pub utility_b: f64,
    pub termination_reason: String,
    pub n_constraints_injected: usize,
    pub rho_a: f64,
    pub rho_b: f64,
    pub n_solutions: u64,
    pub seed: u64,
}

impl ResultRow {
    /// Stable sort key for reproducible output.
    pub fn sort_key(&self) -> (String, String, String) {
        (
            self.config_id.clone(),
            self.strategy.clone(),
            self.protocol.clone(),
        )
    }
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by_key(|row| row.sort_key());
}

/// Serializes rows to CSV bytes with the pinned header.
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().context("flush csv buffer")?;
    Ok(bytes)
}

pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let bytes = rows_to_csv(rows)?;
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(&bytes)?;
    file.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut contents = String::new();
    BufReader::new(File::open(path).with_context(|| format!("open {}", path.display()))?)
        .read_to_string(&mut contents)?;
    read_rows_from_str(&contents)
}

pub fn read_rows_from_str(contents: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(contents.as_bytes());
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
