//! Four-party round harness.
//!
//! Parties are state machines that only ever see messages addressed to
//! them. The harness routes messages over the two permitted channels
//! (V1 <-> P1 and V2 <-> P2), enforces the step order of a round, records a
//! transcript with the encoded bytes of every message, and lets the
//! verifiers judge each round.
//!
//! Prover isolation is structural: P2 is never handed anything that came
//! from V1, and P1 never sees the challenge. [`isolation_check`] audits a
//! transcript for this using the causal links recorded per message.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::field::{Field, FieldElement};
use crate::protocol::{Challenge, Verdict};
use crate::subset_sum::{self, ProverSharedState, SubsetSum, SubsetSumWitness};
use crate::three_sat::{self, Assignment, PositionWitness, SatSharedState, ThreeSat};
use crate::wire::{Payload, PayloadKind, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartyId {
    V1,
    V2,
    P1,
    P2,
}

impl PartyId {
    pub const ALL: [PartyId; 4] = [PartyId::V1, PartyId::V2, PartyId::P1, PartyId::P2];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The only party this one may talk to.
    pub fn peer(self) -> PartyId {
        match self {
            PartyId::V1 => PartyId::P1,
            PartyId::P1 => PartyId::V1,
            PartyId::V2 => PartyId::P2,
            PartyId::P2 => PartyId::V2,
        }
    }

    fn step(self) -> Step {
        match self {
            PartyId::V1 => Step::Query,
            PartyId::P1 => Step::Commit,
            PartyId::V2 => Step::Challenge,
            PartyId::P2 => Step::Answer,
        }
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartyId::V1 => "V1",
            PartyId::V2 => "V2",
            PartyId::P1 => "P1",
            PartyId::P2 => "P2",
        })
    }
}

/// The four steps of a round, in protocol order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Query = 1,
    Commit = 2,
    Challenge = 3,
    Answer = 4,
}

impl Step {
    pub fn tag(self) -> &'static str {
        match self {
            Step::Query => "query",
            Step::Commit => "commit",
            Step::Challenge => "challenge",
            Step::Answer => "answer",
        }
    }
}

/// The statement being proved, with its field.
#[derive(Debug, Clone)]
pub enum Statement {
    SubsetSum(SubsetSum),
    ThreeSat(ThreeSat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    SubsetSum(SubsetSumWitness),
    ThreeSat(Assignment),
}

impl Statement {
    pub fn field(&self) -> &Field {
        match self {
            Statement::SubsetSum(s) => s.field(),
            Statement::ThreeSat(s) => s.field(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Statement::SubsetSum(_) => "subset-sum",
            Statement::ThreeSat(_) => "3sat",
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Statement::SubsetSum(s) => Shape { field: s.field().clone(), n: s.n(), m: 0 },
            Statement::ThreeSat(s) => {
                Shape { field: s.field().clone(), n: s.formula().num_vars(), m: s.formula().num_clauses() }
            }
        }
    }

    /// Payload kind carried at `step` of a round.
    pub fn payload_kind(&self, step: Step) -> PayloadKind {
        match (self, step) {
            (_, Step::Query) => PayloadKind::Query,
            (_, Step::Challenge) => PayloadKind::Challenge,
            (Statement::SubsetSum(_), Step::Commit) => PayloadKind::SsCommit,
            (Statement::SubsetSum(_), Step::Answer) => PayloadKind::SsAnswer,
            (Statement::ThreeSat(_), Step::Commit) => PayloadKind::SatCommit,
            (Statement::ThreeSat(_), Step::Answer) => PayloadKind::SatAnswer,
        }
    }

    /// Bits the efficiency formula charges for a round with this challenge.
    pub fn formula_bits(&self, challenge: Challenge) -> f64 {
        let log_q = self.field().log2_modulus();
        match self {
            Statement::SubsetSum(s) => subset_sum::round_bits_for(s.n(), log_q, challenge),
            Statement::ThreeSat(s) => {
                three_sat::round_bits_for(s.formula().num_vars(), s.formula().num_clauses(), log_q, challenge)
            }
        }
    }

    /// Expectation of [`Statement::formula_bits`] over a uniform challenge.
    pub fn expected_formula_bits(&self) -> f64 {
        Challenge::BOTH.iter().map(|&c| self.formula_bits(c)).sum::<f64>() / 2.0
    }

    fn verify(&self, a: &FieldElement, commit: &Payload, challenge: Challenge, answer: &Payload) -> Verdict {
        match (self, commit, answer) {
            (Statement::SubsetSum(s), Payload::SsCommit(r1), Payload::SsAnswer(r2)) => {
                subset_sum::verify_round(s, a, r1, challenge, r2)
            }
            (Statement::ThreeSat(s), Payload::SatCommit(r1), Payload::SatAnswer(r2)) => {
                three_sat::verify_round(s, a, r1, challenge, r2)
            }
            // Kinds are checked when messages are routed.
            _ => unreachable!("payload kinds checked at routing"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub round: u64,
    pub step: Step,
    pub from: PartyId,
    pub to: PartyId,
    pub payload: Payload,
    /// Encoded payload; its length is what crosses the channel.
    pub bytes: Vec<u8>,
    /// Transcript indices of the messages the sender had received in this
    /// round when it produced this one.
    pub causes: Vec<usize>,
}

impl Message {
    pub fn byte_len(&self) -> usize {
        self.bytes.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub verdicts: Vec<Verdict>,
    pub challenges: Vec<Challenge>,
}

impl Transcript {
    /// Every round accepted (and there was at least one).
    pub fn accepted(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(Verdict::is_accept)
    }

    pub fn accepted_rounds(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_accept()).count()
    }
}

/// A message a party wants to send.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub to: PartyId,
    pub payload: Payload,
}

pub trait Party {
    /// Called for every party at the start of each round.
    fn start_round(&mut self, _round: u64) -> Vec<Outgoing> {
        Vec::new()
    }

    fn receive(&mut self, msg: &Message) -> Vec<Outgoing>;
}

pub struct Parties {
    pub v1: Box<dyn Party>,
    pub v2: Box<dyn Party>,
    pub p1: Box<dyn Party>,
    pub p2: Box<dyn Party>,
}

impl Parties {
    fn get(&mut self, id: PartyId) -> &mut dyn Party {
        match id {
            PartyId::V1 => self.v1.as_mut(),
            PartyId::V2 => self.v2.as_mut(),
            PartyId::P1 => self.p1.as_mut(),
            PartyId::P2 => self.p2.as_mut(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("round {round}: {from} tried to send to {to}")]
    ForbiddenChannel { round: u64, from: PartyId, to: PartyId },
    #[error("round {round}: {from} sent {step:?} out of order")]
    StepOrder { round: u64, from: PartyId, step: Step },
    #[error("round {round}: {from} sent a payload of the wrong kind")]
    ProtocolMismatch { round: u64, from: PartyId },
    #[error("round {round} ended before all four messages were exchanged")]
    Incomplete { round: u64 },
    #[error("at least one round is required")]
    NoRounds,
}

/// Runs `rounds` independent rounds. The overall verdict is
/// [`Transcript::accepted`].
pub fn run_protocol(stmt: &Statement, parties: &mut Parties, rounds: u64) -> Result<Transcript, SessionError> {
    if rounds == 0 {
        return Err(SessionError::NoRounds);
    }
    let mut t = Transcript::default();
    for round in 0..rounds {
        run_round(stmt, parties, round, &mut t)?;
    }
    Ok(t)
}

fn run_round(stmt: &Statement, parties: &mut Parties, round: u64, t: &mut Transcript) -> Result<(), SessionError> {
    let first = t.messages.len();
    let mut inbox: [Vec<usize>; 4] = Default::default();
    // Index of the message seen at each step, if any.
    let mut seen: [Option<usize>; 4] = [None; 4];
    let mut queue = VecDeque::new();

    for id in [PartyId::P1, PartyId::P2, PartyId::V1] {
        queue.extend(parties.get(id).start_round(round).into_iter().map(|o| (id, o, Vec::new())));
    }
    let mut v2_started = false;
    loop {
        let Some((from, out, causes)) = queue.pop_front() else {
            if v2_started {
                break;
            }
            // The second channel opens once the first is quiet; the order is
            // a scheduling choice and never visible to either prover.
            v2_started = true;
            queue.extend(parties.get(PartyId::V2).start_round(round).into_iter().map(|o| (PartyId::V2, o, Vec::new())));
            continue;
        };
        if out.to != from.peer() {
            return Err(SessionError::ForbiddenChannel { round, from, to: out.to });
        }
        let step = from.step();
        let slot = step as usize - 1;
        let ready = match step {
            Step::Query | Step::Challenge => true,
            Step::Commit | Step::Answer => seen[slot - 1].is_some(),
        };
        if !ready || seen[slot].is_some() {
            return Err(SessionError::StepOrder { round, from, step });
        }
        if out.payload.kind() != stmt.payload_kind(step) {
            return Err(SessionError::ProtocolMismatch { round, from });
        }
        let idx = t.messages.len();
        seen[slot] = Some(idx);
        inbox[out.to.index()].push(idx);
        let bytes = out.payload.encode();
        t.messages.push(Message { round, step, from, to: out.to, payload: out.payload, bytes, causes });
        let replies = parties.get(out.to).receive(&t.messages[idx]);
        let causes = inbox[out.to.index()].clone();
        queue.extend(replies.into_iter().map(|o| (out.to, o, causes.clone())));
    }

    let [Some(q), Some(c), Some(ch), Some(ans)] = seen else {
        t.messages.truncate(first);
        return Err(SessionError::Incomplete { round });
    };
    let Payload::Query(a) = &t.messages[q].payload else { unreachable!() };
    let Payload::Challenge(challenge) = t.messages[ch].payload else { unreachable!() };
    let verdict = stmt.verify(a, &t.messages[c].payload, challenge, &t.messages[ans].payload);
    t.verdicts.push(verdict);
    t.challenges.push(challenge);
    Ok(())
}

/// Causality audit: no message from a prover may depend, directly or
/// through earlier messages, on anything sent on the other channel, and
/// every message must use a permitted channel.
pub fn isolation_check(t: &Transcript) -> bool {
    let side = |id: PartyId| matches!(id, PartyId::V1 | PartyId::P1);
    for (idx, msg) in t.messages.iter().enumerate() {
        if msg.to != msg.from.peer() {
            return false;
        }
        let mut stack: Vec<usize> = msg.causes.clone();
        let mut visited = Vec::new();
        while let Some(c) = stack.pop() {
            if c >= idx || visited.contains(&c) {
                if c >= idx {
                    return false;
                }
                continue;
            }
            visited.push(c);
            let cause = &t.messages[c];
            if cause.round != msg.round || side(cause.from) != side(msg.from) {
                return false;
            }
            stack.extend(&cause.causes);
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ByteReport {
    /// Bytes sent, indexed by [`PartyId::index`].
    pub sent_by: [u64; 4],
    pub per_round: Vec<u64>,
    pub total: u64,
    /// Formula bits for each round given the challenge actually drawn.
    pub formula_bits_per_round: Vec<f64>,
    /// Formula bits averaged over the challenge.
    pub expected_formula_bits: f64,
}

pub fn byte_accounting(stmt: &Statement, t: &Transcript) -> ByteReport {
    let mut report = ByteReport {
        per_round: alloc::vec![0; t.verdicts.len()],
        formula_bits_per_round: t.challenges.iter().map(|&c| stmt.formula_bits(c)).collect(),
        ..ByteReport::default()
    };
    if !t.verdicts.is_empty() {
        report.expected_formula_bits = stmt.expected_formula_bits();
    }
    for msg in &t.messages {
        let len = msg.byte_len() as u64;
        report.sent_by[msg.from.index()] += len;
        report.total += len;
        if let Some(r) = report.per_round.get_mut(msg.round as usize) {
            *r += len;
        }
    }
    report
}

/// The seeds a run hands out at setup: one shared by the provers and one
/// private to each verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub shared: [u8; 32],
    pub v1: [u8; 32],
    pub v2: [u8; 32],
}

impl Seeds {
    pub fn derive(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Seeds { shared: rng.gen(), v1: rng.gen(), v2: rng.gen() }
    }
}

/// Per-round stream of a seed; both provers derive the same one.
pub fn round_rng(seed: &[u8; 32], round: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::from_seed(*seed);
    rng.set_stream(round);
    rng
}

pub struct HonestV1 {
    field: Field,
    seed: [u8; 32],
}

impl HonestV1 {
    pub fn new(field: Field, seed: [u8; 32]) -> Self {
        HonestV1 { field, seed }
    }
}

impl Party for HonestV1 {
    fn start_round(&mut self, round: u64) -> Vec<Outgoing> {
        let a = self.field.random(&mut round_rng(&self.seed, round));
        alloc::vec![Outgoing { to: PartyId::P1, payload: Payload::Query(a) }]
    }

    fn receive(&mut self, _msg: &Message) -> Vec<Outgoing> {
        Vec::new()
    }
}

pub struct HonestV2 {
    seed: [u8; 32],
}

impl HonestV2 {
    pub fn new(seed: [u8; 32]) -> Self {
        HonestV2 { seed }
    }
}

impl Party for HonestV2 {
    fn start_round(&mut self, round: u64) -> Vec<Outgoing> {
        let bit = round_rng(&self.seed, round).gen_bool(0.5);
        alloc::vec![Outgoing { to: PartyId::P2, payload: Payload::Challenge(Challenge::from_bit(bit)) }]
    }

    fn receive(&mut self, _msg: &Message) -> Vec<Outgoing> {
        Vec::new()
    }
}

/// Per-round shared prover state, drawn from the shared stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SharedState {
    SubsetSum(ProverSharedState),
    ThreeSat(SatSharedState),
}

impl SharedState {
    pub fn sample<R: RngCore + ?Sized>(stmt: &Statement, rng: &mut R) -> Self {
        match stmt {
            Statement::SubsetSum(s) => SharedState::SubsetSum(ProverSharedState::sample(s.field(), s.n(), rng)),
            Statement::ThreeSat(s) => SharedState::ThreeSat(SatSharedState::sample(s.field(), s.formula(), rng)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error("witness is for the other protocol")]
    WrongProtocol,
    #[error("witness does not satisfy the statement")]
    Invalid,
}

/// An honest prover. Both provers are built from the same seed and witness;
/// each only ever reacts to its own verifier.
pub struct HonestProver {
    id: PartyId,
    stmt: Statement,
    witness: Witness,
    positions: Option<PositionWitness>,
    shared: [u8; 32],
}

impl HonestProver {
    pub fn new(id: PartyId, stmt: Statement, witness: Witness, shared: [u8; 32]) -> Result<Self, WitnessError> {
        let positions = match (&stmt, &witness) {
            (Statement::SubsetSum(s), Witness::SubsetSum(w)) => {
                s.check_witness(w).map_err(|_| WitnessError::Invalid)?;
                None
            }
            (Statement::ThreeSat(s), Witness::ThreeSat(w)) => {
                Some(three_sat::witness_positions(s.formula(), w).map_err(|_| WitnessError::Invalid)?)
            }
            _ => return Err(WitnessError::WrongProtocol),
        };
        Ok(HonestProver { id, stmt, witness, positions, shared })
    }
}

impl Party for HonestProver {
    fn receive(&mut self, msg: &Message) -> Vec<Outgoing> {
        let state = SharedState::sample(&self.stmt, &mut round_rng(&self.shared, msg.round));
        let payload = match (&self.stmt, &self.witness, state, &msg.payload) {
            (Statement::SubsetSum(s), _, SharedState::SubsetSum(st), Payload::Query(a)) if self.id == PartyId::P1 => {
                Payload::SsCommit(subset_sum::p1_respond(s, a, &st).expect("dimensions fixed by the statement"))
            }
            (Statement::ThreeSat(s), Witness::ThreeSat(w), SharedState::ThreeSat(st), Payload::Query(a))
                if self.id == PartyId::P1 =>
            {
                let permuted = st.perm.apply(s.formula()).expect("one rotation per clause");
                let p = three_sat::formula_bits(&permuted, w).expect("checked witness");
                Payload::SatCommit(three_sat::p1_respond(a, &st, w, &p).expect("dimensions fixed by the statement"))
            }
            (Statement::SubsetSum(_), Witness::SubsetSum(w), SharedState::SubsetSum(st), Payload::Challenge(c))
                if self.id == PartyId::P2 =>
            {
                Payload::SsAnswer(subset_sum::p2_respond(*c, w, &st))
            }
            (Statement::ThreeSat(s), _, SharedState::ThreeSat(st), Payload::Challenge(c)) if self.id == PartyId::P2 => {
                let e = self.positions.as_ref().expect("set for 3SAT");
                Payload::SatAnswer(three_sat::p2_respond(*c, &st, s.formula(), e).expect("checked witness"))
            }
            _ => return Vec::new(),
        };
        alloc::vec![Outgoing { to: self.id.peer(), payload }]
    }
}

/// Honest verifiers and honest provers wired from one run seed.
pub fn honest_parties(stmt: &Statement, witness: &Witness, seed: u64) -> Result<Parties, WitnessError> {
    let seeds = Seeds::derive(seed);
    Ok(Parties {
        v1: Box::new(HonestV1::new(stmt.field().clone(), seeds.v1)),
        v2: Box::new(HonestV2::new(seeds.v2)),
        p1: Box::new(HonestProver::new(PartyId::P1, stmt.clone(), witness.clone(), seeds.shared)?),
        p2: Box::new(HonestProver::new(PartyId::P2, stmt.clone(), witness.clone(), seeds.shared)?),
    })
}
