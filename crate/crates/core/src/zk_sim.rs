//! Witnessless simulators and a distance checker against honest views.
//!
//! A view is what the verifiers hold after a round: `(a, resp1, chall,
//! resp2)`. The simulator draws P1's commitment uniformly (the keys are
//! one-time pads, so this is exactly its honest distribution), asks the
//! verifier strategy for the challenge, and then solves the verifier's
//! check for the keys instead of knowing a witness.
//!
//! Verifier strategies are deterministic functions of their classical view.
//! For small parameters [`exact_distance`] enumerates all prover and
//! simulator randomness and returns the total variation distance as an
//! exact rational.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore};

use crate::field::{Field, FieldElement};
use crate::protocol::Challenge;
use crate::session::{SharedState, Statement, Witness, WitnessError};
use crate::subset_sum::{self, AuditResponse, P1Response, P2Response, ProverSharedState, RevealResponse, SubsetSum};
use crate::three_sat::{
    self, ConsistencyResponse, CyclicPerm, OnesResponse, SatP1Response, SatP2Response, SatSharedState, ThreeSat,
};
use crate::wire::Payload;

/// Upper limit on enumerated atoms per distribution.
pub const MAX_ATOMS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZkError {
    #[error("{0} atoms exceed the enumeration limit")]
    TooLarge(u128),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error("sampled mode needs at least one sample")]
    NoSamples,
}

/// A classical, possibly adaptive, deterministic cheating verifier.
pub trait VerifierStrategy {
    fn pick_a(&self, field: &Field) -> FieldElement;

    /// `resp1` is P1's answer flattened: `w0 || w1` or `w' || w`.
    fn pick_chall(&self, a: &FieldElement, resp1: &[FieldElement]) -> Challenge;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetVerifier {
    Fixed {
        a: u64,
        chall: Challenge,
    },
    /// Challenge = parity of the first committed value.
    FirstParity {
        a: u64,
    },
    /// Challenge = parity of the sum of all committed values as integers.
    SumParity {
        a: u64,
    },
    /// Challenge = whether `resp1[last] + a` lands in the upper half of the field.
    UpperHalf {
        a: u64,
    },
}

impl VerifierStrategy for DetVerifier {
    fn pick_a(&self, field: &Field) -> FieldElement {
        match *self {
            DetVerifier::Fixed { a, .. }
            | DetVerifier::FirstParity { a }
            | DetVerifier::SumParity { a }
            | DetVerifier::UpperHalf { a } => field.element(a),
        }
    }

    fn pick_chall(&self, a: &FieldElement, resp1: &[FieldElement]) -> Challenge {
        let odd = |e: &FieldElement| e.value().bit(0);
        match *self {
            DetVerifier::Fixed { chall, .. } => chall,
            DetVerifier::FirstParity { .. } => Challenge::from_bit(resp1.first().is_some_and(odd)),
            DetVerifier::SumParity { .. } => Challenge::from_bit(resp1.iter().filter(|e| odd(e)).count() % 2 == 1),
            DetVerifier::UpperHalf { .. } => {
                let Some(last) = resp1.last() else { return Challenge::Audit };
                let shifted = last + a;
                Challenge::from_bit(shifted.value() * 2u32 >= *a.field().modulus())
            }
        }
    }
}

/// Fixed and adaptive strategies over several `a`, covering both challenges.
pub fn verifier_family() -> Vec<DetVerifier> {
    alloc::vec![
        DetVerifier::Fixed { a: 0, chall: Challenge::Audit },
        DetVerifier::Fixed { a: 0, chall: Challenge::Reveal },
        DetVerifier::Fixed { a: 1, chall: Challenge::Audit },
        DetVerifier::Fixed { a: 2, chall: Challenge::Reveal },
        DetVerifier::FirstParity { a: 1 },
        DetVerifier::FirstParity { a: 3 },
        DetVerifier::SumParity { a: 2 },
        DetVerifier::UpperHalf { a: 4 },
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub a: FieldElement,
    pub commit: Payload,
    pub challenge: Challenge,
    pub answer: Payload,
}

impl View {
    /// Canonical bytes of the whole view.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.a.write_to(&mut out);
        out.extend(self.commit.encode());
        out.push(self.challenge.bit() as u8);
        out.extend(self.answer.encode());
        out
    }
}

fn flat_commit(commit: &Payload) -> Vec<FieldElement> {
    match commit {
        Payload::SsCommit(r) => r.w0.iter().chain(&r.w1).cloned().collect(),
        Payload::SatCommit(r) => r.w_prime.iter().chain(&r.w).cloned().collect(),
        _ => Vec::new(),
    }
}

/// The view an honest prover pair produces from a given shared state.
pub fn honest_view(
    stmt: &Statement,
    witness: &Witness,
    verifier: &dyn VerifierStrategy,
    state: &SharedState,
) -> Result<View, WitnessError> {
    let a = verifier.pick_a(stmt.field());
    match (stmt, witness, state) {
        (Statement::SubsetSum(s), Witness::SubsetSum(w), SharedState::SubsetSum(st)) => {
            s.check_witness(w).map_err(|_| WitnessError::Invalid)?;
            let commit = Payload::SsCommit(subset_sum::p1_respond(s, &a, st).expect("shape"));
            Ok(make_view(&a, commit, verifier, |c| Payload::SsAnswer(subset_sum::p2_respond(c, w, st))))
        }
        (Statement::ThreeSat(s), Witness::ThreeSat(w), SharedState::ThreeSat(st)) => {
            let e = three_sat::witness_positions(s.formula(), w).map_err(|_| WitnessError::Invalid)?;
            let permuted = st.perm.apply(s.formula()).expect("shape");
            let p = three_sat::formula_bits(&permuted, w).expect("shape");
            let commit = Payload::SatCommit(three_sat::p1_respond(&a, st, w, &p).expect("shape"));
            Ok(make_view(&a, commit, verifier, |c| {
                Payload::SatAnswer(three_sat::p2_respond(c, st, s.formula(), &e).expect("shape"))
            }))
        }
        _ => Err(WitnessError::WrongProtocol),
    }
}

fn make_view(
    a: &FieldElement,
    commit: Payload,
    verifier: &dyn VerifierStrategy,
    answer: impl Fn(Challenge) -> Payload,
) -> View {
    let challenge = verifier.pick_chall(a, &flat_commit(&commit));
    View { a: a.clone(), answer: answer(challenge), commit, challenge }
}

/// The simulator's coins: the uniformly drawn commitment (flattened) and
/// one small choice per coordinate (`z` or `x` bits for Subset Sum,
/// rotations or `f - 1` for 3SAT).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimCoins {
    pub commit: Vec<FieldElement>,
    pub choice: Vec<u8>,
}

impl SimCoins {
    pub fn sample<R: RngCore + ?Sized>(stmt: &Statement, rng: &mut R) -> Self {
        let (len, choices, radix) = coin_shape(stmt);
        let commit = stmt.field().random_vec(len, rng);
        let choice = (0..choices).map(|_| rng.gen_range(0..radix)).collect();
        SimCoins { commit, choice }
    }
}

/// (commitment length, number of choices, values per choice)
fn coin_shape(stmt: &Statement) -> (usize, usize, u8) {
    match stmt {
        Statement::SubsetSum(s) => (2 * s.n(), s.n(), 2),
        Statement::ThreeSat(s) => {
            let f = s.formula();
            (f.num_vars() + 3 * f.num_clauses(), f.num_clauses(), 3)
        }
    }
}

pub fn simulate_with(stmt: &Statement, verifier: &dyn VerifierStrategy, coins: &SimCoins) -> View {
    match stmt {
        Statement::SubsetSum(s) => simulate_subset_sum_with(s, verifier, coins),
        Statement::ThreeSat(s) => simulate_three_sat_with(s, verifier, coins),
    }
}

pub fn simulate<R: RngCore + ?Sized>(stmt: &Statement, verifier: &dyn VerifierStrategy, rng: &mut R) -> View {
    simulate_with(stmt, verifier, &SimCoins::sample(stmt, rng))
}

fn simulate_subset_sum_with(stmt: &SubsetSum, verifier: &dyn VerifierStrategy, coins: &SimCoins) -> View {
    let n = stmt.n();
    let a = verifier.pick_a(stmt.field());
    let (w0, w1) = coins.commit.split_at(n);
    let resp1 = P1Response { w0: w0.to_vec(), w1: w1.to_vec() };
    let bits: Vec<bool> = coins.choice.iter().map(|&b| b == 1).collect();
    make_view(&a, Payload::SsCommit(resp1.clone()), verifier, |c| {
        Payload::SsAnswer(match c {
            Challenge::Audit => {
                let unmask = |row: &[FieldElement], keep: bool| -> Vec<FieldElement> {
                    row.iter().zip(stmt.s()).zip(&bits).map(|((w, s), &z)| w - &(&a * s).scale_bit(z == keep)).collect()
                };
                P2Response::Audit(AuditResponse { z: bits.clone(), c0: unmask(w0, true), c1: unmask(w1, false) })
            }
            Challenge::Reveal => {
                let total = subset_sum::select_sum(&resp1.w0, &resp1.w1, &bits).expect("non-empty instance");
                P2Response::Reveal(RevealResponse { x: bits.clone(), key: total - &(stmt.k() * &a) })
            }
        })
    })
}

fn simulate_three_sat_with(stmt: &ThreeSat, verifier: &dyn VerifierStrategy, coins: &SimCoins) -> View {
    let formula = stmt.formula();
    let a = verifier.pick_a(stmt.field());
    let (w_prime, w) = coins.commit.split_at(formula.num_vars());
    let resp1 = SatP1Response { w_prime: w_prime.to_vec(), w: w.to_vec() };
    make_view(&a, Payload::SatCommit(resp1), verifier, |c| {
        Payload::SatAnswer(match c {
            Challenge::Audit => {
                let perm = CyclicPerm::new(coins.choice.clone()).expect("rotations below 3");
                let permuted = perm.apply(formula).expect("one rotation per clause");
                let delta = w
                    .iter()
                    .enumerate()
                    .map(|(i, wi)| {
                        let lit = permuted.literal_at(i);
                        let wj = &w_prime[lit.var - 1];
                        if lit.negated {
                            wi + wj - &a
                        } else {
                            wi - wj
                        }
                    })
                    .collect();
                SatP2Response::Consistency(ConsistencyResponse { perm, delta })
            }
            Challenge::Reveal => {
                let f: Vec<u8> = coins.choice.iter().map(|c| c + 1).collect();
                let gamma = f.iter().enumerate().map(|(i, &fi)| &w[3 * i + fi as usize - 1] - &a).collect();
                SatP2Response::Ones(OnesResponse { f, gamma })
            }
        })
    })
}

pub fn simulate_subset_sum<R: RngCore + ?Sized>(
    stmt: &SubsetSum,
    verifier: &dyn VerifierStrategy,
    rng: &mut R,
) -> View {
    simulate(&Statement::SubsetSum(stmt.clone()), verifier, rng)
}

pub fn simulate_three_sat<R: RngCore + ?Sized>(stmt: &ThreeSat, verifier: &dyn VerifierStrategy, rng: &mut R) -> View {
    simulate(&Statement::ThreeSat(stmt.clone()), verifier, rng)
}

/// Atoms in the honest and simulated distributions. The two coincide:
/// `Q^(2n) 2^n` for Subset Sum, `Q^(n+3m) 3^m` for 3SAT.
pub fn atom_count(stmt: &Statement) -> Option<u128> {
    let (len, choices, radix) = coin_shape(stmt);
    let q = stmt.field().modulus().to_u128()?;
    q.checked_pow(len as u32)?.checked_mul((radix as u128).checked_pow(choices as u32)?)
}

/// Calls `visit` with every coin vector: each field element over `F_Q`,
/// each choice over `0..radix`.
fn for_each_coins(stmt: &Statement, mut visit: impl FnMut(&SimCoins)) {
    let (len, choices, radix) = coin_shape(stmt);
    let field = stmt.field();
    let q = field.modulus().to_u64().expect("checked by atom_count");
    let mut digits = alloc::vec![0u64; len];
    let mut coins = SimCoins { commit: alloc::vec![field.zero(); len], choice: alloc::vec![0; choices] };
    loop {
        visit(&coins);
        // Odometer: choices are the fast digits, then the field elements.
        if let Some(i) = coins.choice.iter().position(|&c| c + 1 < radix) {
            coins.choice[i] += 1;
            coins.choice[..i].fill(0);
            continue;
        }
        coins.choice.fill(0);
        let Some(i) = digits.iter().position(|&d| d + 1 < q) else { return };
        digits[i] += 1;
        coins.commit[i] = field.element(digits[i]);
        digits[..i].fill(0);
        coins.commit[..i].fill(field.zero());
    }
}

/// Honest shared state read off an enumerated coin vector: the field
/// elements are the keys, the choices are `z` (or the rotations).
fn state_from_coins(stmt: &Statement, coins: &SimCoins) -> SharedState {
    match stmt {
        Statement::SubsetSum(s) => {
            let (c0, c1) = coins.commit.split_at(s.n());
            SharedState::SubsetSum(ProverSharedState {
                c0: c0.to_vec(),
                c1: c1.to_vec(),
                z: coins.choice.iter().map(|&b| b == 1).collect(),
            })
        }
        Statement::ThreeSat(s) => {
            let (c_prime, c) = coins.commit.split_at(s.formula().num_vars());
            SharedState::ThreeSat(SatSharedState {
                perm: CyclicPerm::new(coins.choice.clone()).expect("rotations below 3"),
                c: c.to_vec(),
                c_prime: c_prime.to_vec(),
            })
        }
    }
}

/// Exact total variation distance between the honest and simulated view
/// distributions for one deterministic verifier.
pub fn exact_distance(
    stmt: &Statement,
    witness: &Witness,
    verifier: &dyn VerifierStrategy,
) -> Result<Ratio<u128>, ZkError> {
    let atoms = atom_count(stmt).unwrap_or(u128::MAX);
    if atoms > MAX_ATOMS {
        return Err(ZkError::TooLarge(atoms));
    }
    let mut counts: BTreeMap<Vec<u8>, (u64, u64)> = BTreeMap::new();
    let mut failure = None;
    for_each_coins(stmt, |coins| {
        match honest_view(stmt, witness, verifier, &state_from_coins(stmt, coins)) {
            Ok(v) => counts.entry(v.key()).or_default().0 += 1,
            Err(e) => failure = Some(e),
        }
        counts.entry(simulate_with(stmt, verifier, coins).key()).or_default().1 += 1;
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    // Both sides have `atoms` equally likely outcomes.
    let diff: u128 = counts.values().map(|&(h, s)| h.abs_diff(s) as u128).sum();
    Ok(Ratio::new(diff, 2 * atoms))
}

/// Coarse projection of a view for sampled comparisons: the challenge, the
/// revealed choices, and the parity of the first committed value and of the
/// first key in the answer.
pub fn coarse_key(view: &View) -> Vec<u8> {
    let parity = |e: Option<&FieldElement>| e.map_or(2, |e| e.value().bit(0) as u8);
    let mut out = alloc::vec![view.challenge.bit() as u8, parity(flat_commit(&view.commit).first())];
    match &view.answer {
        Payload::SsAnswer(P2Response::Audit(r)) => {
            out.extend(r.z.iter().map(|&b| b as u8));
            out.push(parity(r.c0.first()));
        }
        Payload::SsAnswer(P2Response::Reveal(r)) => {
            out.extend(r.x.iter().map(|&b| b as u8));
            out.push(parity(Some(&r.key)));
        }
        Payload::SatAnswer(SatP2Response::Consistency(r)) => {
            out.extend(r.perm.rotations());
            out.push(parity(r.delta.first()));
        }
        Payload::SatAnswer(SatP2Response::Ones(r)) => {
            out.extend(&r.f);
            out.push(parity(r.gamma.first()));
        }
        _ => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledDistance {
    /// Empirical TV distance between the two projected histograms.
    pub tv: f64,
    /// Sum over cells of half of three standard deviations of the count
    /// difference, a generous bound on what identical distributions give.
    pub noise_floor: f64,
    pub samples: usize,
    pub cells: usize,
}

impl SampledDistance {
    pub fn within_noise(&self) -> bool {
        self.tv <= self.noise_floor
    }
}

/// Empirical TV distance over `samples` honest and `samples` simulated views,
/// both projected through `project`.
pub fn sampled_distance<R: RngCore + ?Sized>(
    stmt: &Statement,
    witness: &Witness,
    verifier: &dyn VerifierStrategy,
    samples: usize,
    project: impl Fn(&View) -> Vec<u8>,
    rng: &mut R,
) -> Result<SampledDistance, ZkError> {
    empirical_distance(
        samples,
        project,
        rng,
        |rng| Ok(honest_view(stmt, witness, verifier, &SharedState::sample(stmt, rng))?),
        |rng| Ok(simulate(stmt, verifier, rng)),
    )
}

/// Empirical TV distance between two view samplers.
pub fn empirical_distance<R: RngCore + ?Sized>(
    samples: usize,
    project: impl Fn(&View) -> Vec<u8>,
    rng: &mut R,
    mut left: impl FnMut(&mut R) -> Result<View, ZkError>,
    mut right: impl FnMut(&mut R) -> Result<View, ZkError>,
) -> Result<SampledDistance, ZkError> {
    if samples == 0 {
        return Err(ZkError::NoSamples);
    }
    let mut counts: BTreeMap<Vec<u8>, (u64, u64)> = BTreeMap::new();
    for _ in 0..samples {
        counts.entry(project(&left(rng)?)).or_default().0 += 1;
        counts.entry(project(&right(rng)?)).or_default().1 += 1;
    }
    let n = samples as f64;
    let (mut tv, mut floor) = (0.0, 0.0);
    for &(h, s) in counts.values() {
        let (ph, ps) = (h as f64 / n, s as f64 / n);
        tv += (ph - ps).abs() / 2.0;
        let p = (ph + ps) / 2.0;
        floor += 1.5 * libm::sqrt(2.0 * p * (1.0 - p) / n);
    }
    Ok(SampledDistance { tv, noise_floor: floor, samples, cells: counts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distance {
    Exact { tv: Ratio<u128>, atoms: u128 },
    Sampled(SampledDistance),
}

impl Distance {
    pub fn value(&self) -> f64 {
        match self {
            Distance::Exact { tv, .. } => *tv.numer() as f64 / *tv.denom() as f64,
            Distance::Sampled(s) => s.tv,
        }
    }
}

/// Exact mode enumerates; sampled mode compares [`coarse_key`] histograms.
pub fn check_distribution<R: RngCore + ?Sized>(
    stmt: &Statement,
    witness: &Witness,
    verifier: &dyn VerifierStrategy,
    mode: Mode,
    rng: &mut R,
) -> Result<Distance, ZkError> {
    match mode {
        Mode::Exact => {
            let tv = exact_distance(stmt, witness, verifier)?;
            Ok(Distance::Exact { tv, atoms: atom_count(stmt).unwrap_or(u128::MAX) })
        }
        Mode::Sampled { samples } => {
            Ok(Distance::Sampled(sampled_distance(stmt, witness, verifier, samples, coarse_key, rng)?))
        }
    }
}
