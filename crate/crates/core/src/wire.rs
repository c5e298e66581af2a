//! Line-delimited JSON wire format so two agents can negotiate across a byte
//! stream.
//!
//! One frame per message, one LF-terminated line per frame:
//! `{"v": 1, "sid": "...", "seq": 0, "msg": {"kind": "propose", "offer": [..],
//! "constraints": [[i, v], ..]}}`. `seq` increases by one per direction
//! starting at zero. The exchange is strictly alternating half-duplex,
//! mirroring the protocol's turn order, so blocking reads suffice.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Offer, Protocol};
use crate::protocol::{
    validate_message, AgentEndpoint, Message, MessageKind, ProtocolViolation, Role,
    TerminationReason, TranscriptEntry, TurnOutcome,
};

pub const PROTOCOL_VERSION: u32 = 1;

/// One decoded frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireFrame {
    pub v: u32,
    pub sid: String,
    pub seq: u64,
    pub msg: Message,
}

/// Distinct decode failure codes.
#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("unknown message kind {0:?}")]
    UnknownKind(String),
    #[error("frame version {got}, expected {PROTOCOL_VERSION}")]
    VersionMismatch { got: u32 },
    #[error("protocol violation in frame: {0}")]
    Protocol(#[from] ProtocolViolation),
}

/// Raw shape used to keep kind validation separate from JSON parsing, so
/// unknown kinds get their own error code.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    v: u32,
    sid: String,
    seq: u64,
    msg: RawMessage,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMessage {
    kind: String,
    #[serde(default)]
    offer: Option<Vec<usize>>,
    #[serde(default)]
    constraints: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    reason: Option<TerminationReason>,
}

/// Encodes one message as a single LF-terminated line. Field order is fixed:
/// v, sid, seq, msg. JSON string escaping guarantees no embedded newline.
pub fn encode(msg: &Message, sid: &str, seq: u64) -> String {
    let frame = WireFrame {
        v: PROTOCOL_VERSION,
        sid: sid.to_string(),
        seq,
        msg: msg.clone(),
    };
    let mut line = serde_json::to_string(&frame).expect("frame serialization cannot fail");
    line.push('\n');
    line
}

/// Parses and validates one line against the message invariants and the
/// expected protocol (constraints are rejected under the unconstrained
/// protocol).
pub fn decode(line: &str, expected_protocol: Protocol) -> Result<WireFrame, DecodeError> {
    let trimmed = line.trim_end_matches(['\n', '\r']);
    let raw: RawFrame =
        serde_json::from_str(trimmed).map_err(|e| DecodeError::Malformed(e.to_string()))?;
    if raw.v != PROTOCOL_VERSION {
        return Err(DecodeError::VersionMismatch { got: raw.v });
    }
    let kind = match raw.msg.kind.as_str() {
        "propose" => MessageKind::Propose,
        "accept" => MessageKind::Accept,
        "terminate" => MessageKind::Terminate,
        other => return Err(DecodeError::UnknownKind(other.to_string())),
    };
    let msg = Message {
        kind,
        offer: raw.msg.offer.map(Offer::new),
        constraints: raw
            .msg
            .constraints
            .map(|cs| cs.into_iter().map(Into::into).collect()),
        reason: raw.msg.reason,
    };
    // structural checks that need no session context
    match msg.kind {
        MessageKind::Propose | MessageKind::Accept => {
            if msg.offer.is_none() {
                return Err(ProtocolViolation::MissingOffer(msg.kind).into());
            }
        }
        MessageKind::Terminate => {
            if msg.offer.is_some() {
                return Err(ProtocolViolation::OfferOnTerminate.into());
            }
        }
    }
    if expected_protocol == Protocol::Aop && msg.constraints.is_some() {
        return Err(ProtocolViolation::ConstraintsUnderAop.into());
    }
    if msg.kind != MessageKind::Propose && msg.constraints.is_some() {
        return Err(ProtocolViolation::ConstraintsOutsidePropose.into());
    }
    if msg.kind != MessageKind::Terminate && msg.reason.is_some() {
        return Err(ProtocolViolation::ReasonOutsideTerminate.into());
    }
    Ok(WireFrame {
        v: raw.v,
        sid: raw.sid,
        seq: raw.seq,
        msg,
    })
}

/// Byte and frame accounting for one wire session, per direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireStats {
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub frames_sent: u64,
    pub frames_received: u64,
}

impl WireStats {
    pub fn bytes_total(&self) -> u64 {
        self.bytes_sent + self.bytes_received
    }
}

/// Session-level outcome of one wire run, from this peer's perspective. The
/// caller supplies utilities (it knows the scenario) to build a full record.
#[derive(Debug, Clone, PartialEq)]
pub struct WireOutcome {
    pub termination_reason: TerminationReason,
    pub accepted_offer: Option<Offer>,
    pub message_count: u64,
    pub transcript: Option<Vec<TranscriptEntry>>,
    pub stats: WireStats,
}

#[derive(Debug, Error)]
pub enum WireSessionError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("protocol violation: {0}")]
    Violation(#[from] ProtocolViolation),
    #[error("session id mismatch: expected {expected:?}, got {got:?}")]
    SidMismatch { expected: String, got: String },
    #[error("sequence gap: expected {expected}, got {got}")]
    SeqGap { expected: u64, got: u64 },
    #[error("peer closed the stream mid-session")]
    UnexpectedEof,
}

/// Drives one endpoint over a byte stream until the session ends.
///
/// Half-duplex: agent A writes the first frame, then the peers strictly
/// alternate. A peer whose proposal budget is spent closes its stream without
/// a frame; the reader maps that EOF to a timeout. Given equal seeds this
/// produces exactly the messages of the in-process driver.
pub fn run_wire_session<R: BufRead, W: Write>(
    mut endpoint: AgentEndpoint,
    mut reader: R,
    mut writer: W,
    sid: &str,
    record_transcript: bool,
) -> Result<WireOutcome, WireSessionError> {
    let mut stats = WireStats::default();
    let mut transcript: Option<Vec<TranscriptEntry>> = record_transcript.then(Vec::new);
    let mut message_count: u64 = 0;
    let mut out_seq: u64 = 0;
    let mut in_seq: u64 = 0;
    let mut my_turn = endpoint.role() == Role::A;

    let (reason, accepted_offer) = loop {
        if my_turn {
            let outcome = endpoint.take_turn();
            let Some(msg) = outcome.to_message() else {
                // silent timeout: close without a frame
                break (TerminationReason::Timeout, None);
            };
            validate_message(endpoint.protocol(), &msg, endpoint.last_incoming())?;
            let line = encode(&msg, sid, out_seq);
            writer.write_all(line.as_bytes())?;
            writer.flush()?;
            stats.bytes_sent += line.len() as u64;
            stats.frames_sent += 1;
            out_seq += 1;
            if let Some(entries) = &mut transcript {
                entries.push(TranscriptEntry {
                    t: message_count,
                    from: endpoint.role(),
                    message: msg.clone(),
                });
            }
            message_count += 1;
            match outcome {
                TurnOutcome::Propose { .. } => my_turn = false,
                TurnOutcome::Accept { offer } => {
                    break (TerminationReason::Accepted, Some(offer))
                }
                TurnOutcome::Terminate { reason } => break (reason, None),
                TurnOutcome::Timeout => unreachable!("timeout produces no message"),
            }
        } else {
            let mut line = String::new();
            let n = reader.read_line(&mut line)?;
            if n == 0 {
                if endpoint.total_proposals() >= endpoint.proposal_budget() {
                    break (TerminationReason::Timeout, None);
                }
                return Err(WireSessionError::UnexpectedEof);
            }
            let frame = decode(&line, endpoint.protocol())?;
            if frame.sid != sid {
                return Err(WireSessionError::SidMismatch {
                    expected: sid.to_string(),
                    got: frame.sid,
                });
            }
            if frame.seq != in_seq {
                return Err(WireSessionError::SeqGap {
                    expected: in_seq,
                    got: frame.seq,
                });
            }
            in_seq += 1;
            stats.bytes_received += n as u64;
            stats.frames_received += 1;
            endpoint.observe(&frame.msg)?;
            if let Some(entries) = &mut transcript {
                entries.push(TranscriptEntry {
                    t: message_count,
                    from: endpoint.role().other(),
                    message: frame.msg.clone(),
                });
            }
            message_count += 1;
            match frame.msg.kind {
                MessageKind::Propose => my_turn = true,
                MessageKind::Accept => {
                    let offer = endpoint
                        .last_outgoing()
                        .cloned()
                        .expect("accept echo validated against last outgoing");
                    break (TerminationReason::Accepted, Some(offer));
                }
                MessageKind::Terminate => {
                    break (
                        frame.msg.reason.unwrap_or(TerminationReason::Exhausted),
                        None,
                    )
                }
            }
        }
    };

    Ok(WireOutcome {
        termination_reason: reason,
        accepted_offer,
        message_count,
        transcript,
        stats,
    })
}
