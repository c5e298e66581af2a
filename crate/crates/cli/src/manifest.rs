//! Batch manifests and scenario files on disk.
//!
//! `generate` writes one scenario file per (base, constraint count) variant
//! plus a manifest listing generation parameters, the master seed and every
//! configuration id. Scenario files use the canonical scenario format; their
//! `reservation` fields hold a placeholder of 1/2 and batch runs take the
//! per-configuration reservations from the manifest.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use acop_core::scenario::{build_batch, BatchParams, Provenance, Scenario};
use acop_core::{Configuration, ScenarioFile};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const SCENARIO_DIR: &str = "scenarios";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub params: BatchParams,
    pub scenario_files: Vec<String>,
    pub configurations: Vec<ManifestConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestConfig {
    pub id: String,
    pub scenario: String,
    pub base_index: usize,
    pub n_injected: usize,
    pub rho_a: f64,
    pub rho_b: f64,
}

/// Builds the batch and writes scenario files plus the manifest under
/// `out_dir`. Returns the number of configurations written.
pub fn write_batch(params: &BatchParams, out_dir: &Path) -> Result<usize> {
    let batch = build_batch(params)?;
    let scenario_dir = out_dir.join(SCENARIO_DIR);
    fs::create_dir_all(&scenario_dir)?;

    let mut scenario_files = Vec::new();
    let mut file_of_variant: HashMap<(usize, usize), String> = HashMap::new();
    for variant in &batch.variants {
        let name = format!("s{:03}-n{:02}.json", variant.base_index, variant.n_injected);
        let file = ScenarioFile::new(
            &variant.scenario.space,
            &variant.scenario.utility_a,
            0.5,
            &variant.scenario.utility_b,
            0.5,
        );
        let json = serde_json::to_string_pretty(&file)?;
        fs::write(scenario_dir.join(&name), json)?;
        file_of_variant.insert((variant.base_index, variant.n_injected), name.clone());
        scenario_files.push(name);
    }

    let configurations: Vec<ManifestConfig> = batch
        .configurations
        .iter()
        .map(|config| {
            let base_index = config.scenario.provenance.base_index;
            let n = config.scenario.provenance.injected_per_agent;
            ManifestConfig {
                id: config.id.clone(),
                scenario: file_of_variant[&(base_index, n)].clone(),
                base_index,
                n_injected: n,
                rho_a: config.reservation_a,
                rho_b: config.reservation_b,
            }
        })
        .collect();

    let manifest = Manifest {
        params: params.clone(),
        scenario_files,
        configurations,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(out_dir.join(MANIFEST_NAME), json)?;
    Ok(manifest.configurations.len())
}

pub fn read_manifest(path: &Path) -> Result<(Manifest, PathBuf)> {
    let manifest_path = if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&manifest_path)
        .with_context(|| format!("read manifest {}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let base_dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    Ok((manifest, base_dir))
}

/// Loads every referenced scenario file and materialises the configuration
/// list in manifest order.
pub fn load_configurations(manifest: &Manifest, base_dir: &Path) -> Result<Vec<Configuration>> {
    let scenario_dir = base_dir.join(SCENARIO_DIR);
    let mut variant_of: HashMap<&str, (usize, usize)> = HashMap::new();
    for entry in &manifest.configurations {
        variant_of
            .entry(entry.scenario.as_str())
            .or_insert((entry.base_index, entry.n_injected));
    }
    let mut scenarios: HashMap<String, Arc<Scenario>> = HashMap::new();
    for name in &manifest.scenario_files {
        let path = scenario_dir.join(name);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("read scenario {}", path.display()))?;
        let file: ScenarioFile = serde_json::from_str(&text)?;
        let parts = file.into_parts()?;
        let (base_index, n_injected) =
            variant_of.get(name.as_str()).copied().unwrap_or((0, 0));
        let ranges = &manifest.params.ranges;
        let scenario = Scenario {
            space: parts.space,
            utility_a: parts.utility_a,
            utility_b: parts.utility_b,
            provenance: Provenance {
                value_range: ranges[base_index % ranges.len()],
                master_seed: manifest.params.master_seed,
                base_index,
                injected_per_agent: n_injected,
            },
        };
        scenarios.insert(name.clone(), Arc::new(scenario));
    }

    let mut configurations = Vec::with_capacity(manifest.configurations.len());
    for entry in &manifest.configurations {
        let Some(scenario) = scenarios.get(&entry.scenario) else {
            bail!("configuration {} references unknown scenario {}", entry.id, entry.scenario);
        };
        configurations.push(Configuration {
            scenario: Arc::clone(scenario),
            reservation_a: entry.rho_a,
            reservation_b: entry.rho_b,
            id: entry.id.clone(),
        });
    }
    Ok(configurations)
}
