//! Two-process negotiation over TCP: one endpoint per process, line-delimited
//! JSON frames on the socket.

use std::fs;
use std::io::{BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};

use acop_core::protocol::{AgentEndpoint, DEFAULT_MAX_PROPOSALS_TOTAL};
use acop_core::wire::{run_wire_session, WireStats};
use acop_core::{
    AgentProfile, ConstraintPolicy, NegotiationRecord, Protocol, Role, ScenarioFile,
    StrategyKind, TerminationReason,
};

#[derive(Debug, Clone)]
pub struct PeerOptions {
    pub role: Role,
    pub scenario_path: PathBuf,
    /// Address to bind and wait on (role B).
    pub listen: Option<String>,
    /// Address to connect to (role A).
    pub connect: Option<String>,
    pub strategy: StrategyKind,
    pub protocol: Protocol,
    pub policy: ConstraintPolicy,
    pub seed: u64,
    pub sid: String,
    pub record_transcript: bool,
}

#[derive(Debug, Clone)]
pub struct PeerReport {
    pub record: NegotiationRecord,
    pub stats: WireStats,
}

fn connect_with_retry(addr: &str) -> Result<TcpStream> {
    let mut last_err = None;
    for _ in 0..100 {
        match TcpStream::connect(addr) {
            Ok(stream) => return Ok(stream),
            Err(e) => {
                last_err = Some(e);
                std::thread::sleep(Duration::from_millis(50));
            }
        }
    }
    bail!("could not connect to {addr}: {}", last_err.unwrap());
}

/// Runs one session over the wire and assembles the full record. The record's
/// utilities come from the scenario file, which carries both sides; the
/// negotiation itself only ever uses this peer's own profile.
pub fn run_peer(options: &PeerOptions) -> Result<PeerReport> {
    let text = fs::read_to_string(&options.scenario_path)
        .with_context(|| format!("read scenario {}", options.scenario_path.display()))?;
    let file: ScenarioFile = serde_json::from_str(&text)?;
    let parts = file.into_parts()?;

    let (utility, reservation) = match options.role {
        Role::A => (parts.utility_a.clone(), parts.reservation_a),
        Role::B => (parts.utility_b.clone(), parts.reservation_b),
    };
    let profile = AgentProfile::new(utility, reservation, options.strategy, options.protocol)?;
    let endpoint = AgentEndpoint::new(
        &parts.space,
        profile,
        options.role,
        options.policy,
        options.seed,
        DEFAULT_MAX_PROPOSALS_TOTAL,
    );

    let stream = match options.role {
        Role::B => {
            let addr = options.listen.as_deref().unwrap_or("127.0.0.1:0");
            let listener = TcpListener::bind(addr)
                .with_context(|| format!("bind {addr}"))?;
            // announce the bound address so a driver can start the other peer
            println!("LISTENING {}", listener.local_addr()?);
            std::io::stdout().flush()?;
            let (stream, _) = listener.accept()?;
            stream
        }
        Role::A => {
            let Some(addr) = options.connect.as_deref() else {
                bail!("role A needs --connect");
            };
            connect_with_retry(addr)?
        }
    };
    stream.set_nodelay(true)?;

    let reader = BufReader::new(stream.try_clone()?);
    let outcome = run_wire_session(
        endpoint,
        reader,
        stream,
        &options.sid,
        options.record_transcript,
    )?;

    let (utility_a, utility_b) = match &outcome.accepted_offer {
        Some(offer) => (
            parts.utility_a.utility(offer),
            parts.utility_b.utility(offer),
        ),
        None => (0.0, 0.0),
    };
    let record = NegotiationRecord {
        success: outcome.termination_reason == TerminationReason::Accepted,
        message_count: outcome.message_count,
        utility_a,
        utility_b,
        termination_reason: outcome.termination_reason,
        transcript: outcome.transcript,
    };
    Ok(PeerReport {
        record,
        stats: outcome.stats,
    })
}
