//! `acop`: generate negotiation batches, run the strategy x protocol
//! comparison, summarise results, or drive one agent over TCP.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use acop_cli::{analysis, manifest, peer, results, runner, write_plot_data};
use acop_core::scenario::{BatchParams, GridKind, ValueRange};
use acop_core::{ConstraintPolicy, Protocol, Role, StrategyKind};

#[derive(Parser)]
#[command(name = "acop", version, about = "Bilateral negotiation experiments under the alternating offers protocol, with and without constraint exchange")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a batch of scenarios and its manifest.
    Generate(GenerateArgs),
    /// Run the 4-way strategy x protocol comparison over a batch.
    Run(RunArgs),
    /// Summarise a results CSV and emit plot-ready data.
    Analyze(AnalyzeArgs),
    /// Negotiate as one agent over TCP against a remote peer.
    Peer(PeerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Lin,
    Log,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    #[value(name = "100")]
    R100,
    #[value(name = "25")]
    R25,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Reactive,
    Eager,
}

impl From<PolicyArg> for ConstraintPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Reactive => ConstraintPolicy::Reactive,
            PolicyArg::Eager => ConstraintPolicy::Eager,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Random,
    Concession,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Aop,
    Acop,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for the manifest and scenario files.
    #[arg(long, default_value = "batch")]
    out: PathBuf,
    /// Master seed; everything downstream derives from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of unique base scenarios.
    #[arg(long, default_value_t = 50)]
    scenarios: usize,
    /// Constraint counts per agent: "0..12", "3", or "0,2,4".
    #[arg(long, default_value = "0..12")]
    constraint_counts: String,
    #[arg(long, value_enum, default_value_t = GridArg::Lin)]
    grid: GridArg,
    #[arg(long, value_enum, default_value_t = RangeArg::R100)]
    range: RangeArg,
    #[arg(long, default_value_t = 5)]
    issues: usize,
    #[arg(long, default_value_t = 5)]
    values: usize,
    /// Full-scale preset: 300 bases, counts 0..12, both grids, both ranges.
    #[arg(long)]
    paper_scale: bool,
    /// Print the configuration count without writing anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Manifest file or the directory containing it.
    #[arg(long, default_value = "batch")]
    manifest: PathBuf,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Master seed for session derivation; defaults to the manifest's.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Reactive)]
    policy: PolicyArg,
    /// Worker threads; 0 means one per CPU.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Only run configurations whose id contains this substring.
    #[arg(long)]
    filter: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, default_value = "results.csv")]
    results: PathBuf,
    /// Directory for plot-ready CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also break the utility comparison down per agent.
    #[arg(long)]
    per_agent: bool,
}

#[derive(Args)]
struct PeerArgs {
    #[arg(long, value_enum)]
    role: RoleArg,
    /// Scenario file holding both agents' tables and reservations.
    #[arg(long)]
    scenario: PathBuf,
    /// Bind address for role B (port 0 picks one; it is announced on stdout).
    #[arg(long)]
    listen: Option<String>,
    /// Peer address for role A.
    #[arg(long)]
    connect: Option<String>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Concession)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Acop)]
    protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Reactive)]
    policy: PolicyArg,
    /// Session seed; both peers must pass the same value.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Session id; both peers must pass the same value.
    #[arg(long, default_value = "session-0")]
    sid: String,
    /// Write the transcript as JSONL to this file.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

fn parse_constraint_counts(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().context("constraint count range start")?;
        let hi: usize = hi.trim().parse().context("constraint count range end")?;
        if hi < lo {
            bail!("empty constraint count range {spec:?}");
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|part| part.trim().parse::<usize>().context("constraint count"))
        .collect()
}

fn grids_of(arg: GridArg) -> Vec<GridKind> {
    match arg {
        GridArg::Lin => vec![GridKind::Linear],
        GridArg::Log => vec![GridKind::Log],
        GridArg::Both => vec![GridKind::Linear, GridKind::Log],
    }
}

fn ranges_of(arg: RangeArg) -> Vec<ValueRange> {
    match arg {
        RangeArg::R100 => vec![ValueRange::ZeroTo100],
        RangeArg::R25 => vec![ValueRange::ZeroTo25],
        RangeArg::Both => vec![ValueRange::ZeroTo100, ValueRange::ZeroTo25],
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let params = if args.paper_scale {
        BatchParams {
            n_issues: args.issues,
            n_values: args.values,
            n_base_scenarios: 300,
            ranges: ranges_of(RangeArg::Both),
            constraint_counts: (0..=12).collect(),
            grids: grids_of(GridArg::Both),
            master_seed: args.seed,
        }
    } else {
        BatchParams {
            n_issues: args.issues,
            n_values: args.values,
            n_base_scenarios: args.scenarios,
            ranges: ranges_of(args.range),
            constraint_counts: parse_constraint_counts(&args.constraint_counts)?,
            grids: grids_of(args.grid),
            master_seed: args.seed,
        }
    };
    let count = params.configuration_count();
    if args.dry_run {
        println!(
            "{} configurations ({} bases x {} counts x {} reservation pairs); {} sessions",
            count,
            params.n_base_scenarios,
            params.constraint_counts.len(),
            acop_core::scenario::grid_pairs(&params.grids).len(),
            count * 4
        );
        return Ok(());
    }
    let written = manifest::write_batch(&params, &args.out)?;
    println!(
        "wrote {written} configurations to {}",
        args.out.join(manifest::MANIFEST_NAME).display()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let (manifest, base_dir) = manifest::read_manifest(&args.manifest)?;
    let mut configs = manifest::load_configurations(&manifest, &base_dir)?;
    if let Some(filter) = &args.filter {
        configs.retain(|c| c.id.contains(filter.as_str()));
    }
    if configs.is_empty() {
        bail!("no configurations to run");
    }
    let options = runner::RunOptions {
        master_seed: args.seed.unwrap_or(manifest.params.master_seed),
        policy: args.policy.into(),
        workers: args.workers,
    };
    let rows = runner::run_batch_to_file(&configs, &options, &args.out)?;
    println!("wrote {rows} rows to {}", args.out.display());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let rows = results::read_rows(&args.results)?;
    let report = analysis::analyze(&rows, args.per_agent)?;
    print!("{}", report.render_text());
    if let Some(dir) = &args.out {
        write_plot_data(&report, dir)?;
        println!("plot data written to {}", dir.display());
    }
    Ok(())
}

fn cmd_peer(args: PeerArgs) -> Result<()> {
    let options = peer::PeerOptions {
        role: match args.role {
            RoleArg::A => Role::A,
            RoleArg::B => Role::B,
        },
        scenario_path: args.scenario,
        listen: args.listen,
        connect: args.connect,
        strategy: match args.strategy {
            StrategyArg::Random => StrategyKind::RandomSampling,
            StrategyArg::Concession => StrategyKind::Concession,
        },
        protocol: match args.protocol {
            ProtocolArg::Aop => Protocol::Aop,
            ProtocolArg::Acop => Protocol::Acop,
        },
        policy: args.policy.into(),
        seed: args.seed,
        sid: args.sid,
        record_transcript: args.transcript.is_some(),
    };
    let report = peer::run_peer(&options)?;
    if let Some(path) = &args.transcript {
        let mut out = String::new();
        for entry in report.record.transcript.as_deref().unwrap_or_default() {
            out.push_str(&serde_json::to_string(entry)?);
            out.push('\n');
        }
        std::fs::write(path, out)?;
    }
    let mut record = report.record.clone();
    record.transcript = None;
    println!("RECORD {}", serde_json::to_string(&record)?);
    println!("STATS {}", serde_json::to_string(&report.stats)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Peer(args) => cmd_peer(args),
    }
}
