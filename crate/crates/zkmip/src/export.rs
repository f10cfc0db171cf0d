//! Tab-separated exports.
//!
//! Transcripts are written one message per line:
//!
//! ```text
//! round <TAB> from <TAB> to <TAB> step <TAB> hex payload <TAB> byte_len
//! ```
//!
//! Rounds count from 0; parties are `V1`, `V2`, `P1`, `P2`; steps are
//! `query`, `commit`, `challenge`, `answer`.
//!
//! Command reports use `key <TAB> value` lines.

use std::fmt::Write as _;

use zkmip_core::session::{PartyId, Statement, Step, Transcript};
use zkmip_core::wire::Payload;

pub fn transcript_tsv(t: &Transcript) -> String {
    let mut out = String::new();
    for msg in &t.messages {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            msg.round,
            msg.from,
            msg.to,
            msg.step.tag(),
            hex::encode(&msg.bytes),
            msg.byte_len()
        );
    }
    out
}

/// One parsed transcript line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedMessage {
    pub round: u64,
    pub from: PartyId,
    pub to: PartyId,
    pub step: Step,
    pub payload: Payload,
    pub byte_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transcript line {line}: {message}")]
pub struct TranscriptParseError {
    pub line: usize,
    pub message: String,
}

fn party(text: &str) -> Option<PartyId> {
    PartyId::ALL.into_iter().find(|p| p.to_string() == text)
}

fn step(text: &str) -> Option<Step> {
    [Step::Query, Step::Commit, Step::Challenge, Step::Answer].into_iter().find(|s| s.tag() == text)
}

/// Parses an exported transcript back into typed messages, decoding each
/// payload against the statement's shape.
pub fn parse_transcript(stmt: &Statement, text: &str) -> Result<Vec<ExportedMessage>, TranscriptParseError> {
    let shape = stmt.shape();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fail = |message: String| TranscriptParseError { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [round, from, to, tag, payload, byte_len] = fields[..] else {
            return Err(fail(format!("expected 6 fields, found {}", fields.len())));
        };
        let round = round.parse().map_err(|_| fail(format!("bad round `{round}`")))?;
        let from = party(from).ok_or_else(|| fail(format!("unknown party `{from}`")))?;
        let to = party(to).ok_or_else(|| fail(format!("unknown party `{to}`")))?;
        let step = step(tag).ok_or_else(|| fail(format!("unknown step `{tag}`")))?;
        let bytes = hex::decode(payload).map_err(|e| fail(e.to_string()))?;
        let byte_len: usize = byte_len.parse().map_err(|_| fail(format!("bad length `{byte_len}`")))?;
        if byte_len != bytes.len() {
            return Err(fail(format!("length {byte_len} but payload has {} bytes", bytes.len())));
        }
        let payload = shape.decode(stmt.payload_kind(step), &bytes).map_err(|e| fail(e.to_string()))?;
        out.push(ExportedMessage { round, from, to, step, payload, byte_len });
    }
    Ok(out)
}

pub fn report_tsv(entries: &[(String, String)]) -> String {
    entries.iter().fold(String::new(), |mut out, (k, v)| {
        let _ = writeln!(out, "{k}\t{v}");
        out
    })
}

/// Parses `key <TAB> value` lines, keeping the order.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines().filter_map(|l| l.split_once('\t')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}
