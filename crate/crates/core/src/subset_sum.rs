//! Zero-knowledge two-prover proof for Subset Sum.
//!
//! Each round the provers share fresh `c0, c1 in F_Q^n` and `z in F_2^n`.
//! Column `i` holds two masked "cups": row 0 commits to `s_i * z_i`, row 1 to
//! `s_i * !z_i`. On an audit the provers open everything; on a reveal P2
//! names one cup per column (`x = v XOR z`) and unveils the homomorphic sum
//! of those cups, which must equal the target `k`.
//!
//! Indexing convention: in `(c_{x_i})_i` the bit `x_i` selects the row and
//! `i` the coordinate.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};

use crate::field::{choose_prime, uniform_below, Field, FieldElement};
use crate::protocol::{Challenge, Extraction, Rejection, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubsetSumError {
    #[error("instance needs at least one element")]
    Empty,
    #[error("set element {index} is zero; elements must be positive")]
    NonPositive { index: usize },
    #[error("modulus must exceed the sum of the set ({sum})")]
    ModulusTooSmall { sum: BigUint },
    #[error("target must be below the modulus")]
    TargetTooLarge,
    #[error("vector of length {actual}, expected {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("witness does not sum to the target")]
    InvalidWitness,
    #[error("modulus too small to sample elements in [1, Q/n]")]
    DegenerateModulus,
    #[error("soundness parameter K must be at least 1")]
    BadSoundnessParameter,
    #[error("single-round error 1/2 + 2^-K is not below 1")]
    NoSoundness,
    #[error("expected an audit answer and a reveal answer")]
    WrongResponseKinds,
}

/// A set of positive integers and a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSumInstance {
    values: Vec<BigUint>,
    target: BigUint,
}

impl SubsetSumInstance {
    pub fn new(values: Vec<BigUint>, target: BigUint) -> Result<Self, SubsetSumError> {
        if values.is_empty() {
            return Err(SubsetSumError::Empty);
        }
        if let Some(index) = values.iter().position(Zero::is_zero) {
            return Err(SubsetSumError::NonPositive { index });
        }
        Ok(SubsetSumInstance { values, target })
    }

    pub fn from_u64(values: &[u64], target: u64) -> Result<Self, SubsetSumError> {
        Self::new(values.iter().map(|&v| BigUint::from(v)).collect(), BigUint::from(target))
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn target(&self) -> &BigUint {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> BigUint {
        self.values.iter().sum()
    }

    /// Integer sum of the elements selected by `bits`.
    pub fn selected_sum(&self, bits: &[bool]) -> BigUint {
        self.values.iter().zip(bits).filter(|(_, &b)| b).map(|(s, _)| s).sum()
    }

    pub fn is_solution(&self, bits: &[bool]) -> bool {
        bits.len() == self.len() && self.selected_sum(bits) == self.target
    }

    /// Exhaustive `2^n` search; a test oracle for small instances only.
    pub fn solve_brute_force(&self) -> Option<SubsetSumWitness> {
        let n = self.len();
        assert!(n <= 25, "brute force limited to n <= 25");
        (0u32..1 << n)
            .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
            .find(|bits| self.is_solution(bits))
            .map(SubsetSumWitness)
    }
}

/// Binary selector `v` with `sum v_i s_i = k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSumWitness(pub Vec<bool>);

/// An instance embedded in a field large enough that sums never wrap.
#[derive(Debug, Clone)]
pub struct SubsetSum {
    field: Field,
    instance: SubsetSumInstance,
    s: Vec<FieldElement>,
    k: FieldElement,
}

impl SubsetSum {
    pub fn new(field: Field, instance: SubsetSumInstance) -> Result<Self, SubsetSumError> {
        let sum = instance.total();
        if &sum >= field.modulus() {
            return Err(SubsetSumError::ModulusTooSmall { sum });
        }
        if instance.target() >= field.modulus() {
            return Err(SubsetSumError::TargetTooLarge);
        }
        let s = instance.values.iter().map(|v| field.element_big(v.clone())).collect();
        let k = field.element_big(instance.target.clone());
        Ok(SubsetSum { field, instance, s, k })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn instance(&self) -> &SubsetSumInstance {
        &self.instance
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn s(&self) -> &[FieldElement] {
        &self.s
    }

    pub fn k(&self) -> &FieldElement {
        &self.k
    }

    pub fn check_witness(&self, witness: &SubsetSumWitness) -> Result<(), SubsetSumError> {
        if witness.0.len() != self.n() {
            return Err(SubsetSumError::Dimension { expected: self.n(), actual: witness.0.len() });
        }
        if !self.instance.is_solution(&witness.0) {
            return Err(SubsetSumError::InvalidWitness);
        }
        Ok(())
    }

    /// `a * (s * mask)`: the committed row values scaled by the challenge.
    fn masked_row(&self, a: &FieldElement, mask: &[bool], invert: bool) -> Vec<FieldElement> {
        self.s.iter().zip(mask).map(|(s, &z)| (a * s).scale_bit(z != invert)).collect()
    }
}

/// Randomness the provers agree on before a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProverSharedState {
    pub c0: Vec<FieldElement>,
    pub c1: Vec<FieldElement>,
    pub z: Vec<bool>,
}

impl ProverSharedState {
    pub fn sample<R: RngCore + ?Sized>(field: &Field, n: usize, rng: &mut R) -> Self {
        let c0 = field.random_vec(n, rng);
        let c1 = field.random_vec(n, rng);
        let z = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        ProverSharedState { c0, c1, z }
    }

    pub fn row(&self, bit: bool) -> &[FieldElement] {
        if bit {
            &self.c1
        } else {
            &self.c0
        }
    }
}

/// P1's two masked rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P1Response {
    pub w0: Vec<FieldElement>,
    pub w1: Vec<FieldElement>,
}

impl P1Response {
    pub fn row(&self, bit: bool) -> &[FieldElement] {
        if bit {
            &self.w1
        } else {
            &self.w0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditResponse {
    pub z: Vec<bool>,
    pub c0: Vec<FieldElement>,
    pub c1: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevealResponse {
    pub x: Vec<bool>,
    pub key: FieldElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum P2Response {
    Audit(AuditResponse),
    Reveal(RevealResponse),
}

impl P2Response {
    pub fn challenge(&self) -> Challenge {
        match self {
            P2Response::Audit(_) => Challenge::Audit,
            P2Response::Reveal(_) => Challenge::Reveal,
        }
    }
}

/// `sum_i (rows[x_i])_i`.
pub fn select_sum(row0: &[FieldElement], row1: &[FieldElement], x: &[bool]) -> Option<FieldElement> {
    let mut terms = x.iter().enumerate().map(|(i, &bit)| if bit { &row1[i] } else { &row0[i] });
    let first = terms.next()?.clone();
    Some(terms.fold(first, |acc, t| acc + t))
}

/// Random positive instance with a planted witness: elements uniform in
/// `[1, floor((Q-1)/n)]`, target the sum of a uniformly random subset. With
/// `nonempty`, the subset is resampled until it selects something.
pub fn generate_instance<R: RngCore + ?Sized>(
    n: usize,
    field: &Field,
    nonempty: bool,
    rng: &mut R,
) -> Result<(SubsetSumInstance, SubsetSumWitness), SubsetSumError> {
    if n == 0 {
        return Err(SubsetSumError::Empty);
    }
    // floor((Q-1)/n) equals floor(Q/n) unless n divides Q, and keeps the sum below Q.
    let upper = (field.modulus() - 1u32) / BigUint::from(n);
    if upper.is_zero() {
        return Err(SubsetSumError::DegenerateModulus);
    }
    let values: Vec<BigUint> = (0..n).map(|_| uniform_below(&upper, rng) + 1u32).collect();
    let v = loop {
        let v: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if !nonempty || v.iter().any(|&b| b) {
            break v;
        }
    };
    let target = values.iter().zip(&v).filter(|(_, &b)| b).map(|(s, _)| s).sum();
    let instance = SubsetSumInstance::new(values, target)?;
    Ok((instance, SubsetSumWitness(v)))
}

fn check_dim(expected: usize, actual: usize) -> Result<(), SubsetSumError> {
    if expected == actual {
        Ok(())
    } else {
        Err(SubsetSumError::Dimension { expected, actual })
    }
}

/// P1: `w0 = a*(s*z) + c0`, `w1 = a*(s*!z) + c1`.
pub fn p1_respond(stmt: &SubsetSum, a: &FieldElement, state: &ProverSharedState) -> Result<P1Response, SubsetSumError> {
    let n = stmt.n();
    check_dim(n, state.c0.len())?;
    check_dim(n, state.c1.len())?;
    check_dim(n, state.z.len())?;
    let w0 = stmt.masked_row(a, &state.z, false).into_iter().zip(&state.c0).map(|(m, c)| m + c).collect();
    let w1 = stmt.masked_row(a, &state.z, true).into_iter().zip(&state.c1).map(|(m, c)| m + c).collect();
    Ok(P1Response { w0, w1 })
}

/// P2: echo the shared state on an audit; on a reveal send `x = v XOR z` and
/// the combined key `c' = sum_i (c_{x_i})_i`.
pub fn p2_respond(challenge: Challenge, witness: &SubsetSumWitness, state: &ProverSharedState) -> P2Response {
    match challenge {
        Challenge::Audit => {
            P2Response::Audit(AuditResponse { z: state.z.clone(), c0: state.c0.clone(), c1: state.c1.clone() })
        }
        Challenge::Reveal => {
            let x: Vec<bool> = witness.0.iter().zip(&state.z).map(|(v, z)| v ^ z).collect();
            let key = select_sum(&state.c0, &state.c1, &x).expect("non-empty instance");
            P2Response::Reveal(RevealResponse { x, key })
        }
    }
}

/// The verifiers' end-of-round check.
pub fn verify_round(
    stmt: &SubsetSum,
    a: &FieldElement,
    resp1: &P1Response,
    challenge: Challenge,
    resp2: &P2Response,
) -> Verdict {
    check_round(stmt, a, resp1, challenge, resp2).into()
}

fn check_round(
    stmt: &SubsetSum,
    a: &FieldElement,
    resp1: &P1Response,
    challenge: Challenge,
    resp2: &P2Response,
) -> Result<(), Rejection> {
    let n = stmt.n();
    let field = stmt.field();
    let in_field = |v: &[FieldElement]| v.len() == n && v.iter().all(|e| e.field() == field);
    if !in_field(&resp1.w0) || !in_field(&resp1.w1) {
        return Err(Rejection::Malformed);
    }
    match (challenge, resp2) {
        (Challenge::Audit, P2Response::Audit(open)) => {
            if open.z.len() != n || !in_field(&open.c0) || !in_field(&open.c1) {
                return Err(Rejection::Malformed);
            }
            for (row, keys, invert) in [(0u8, &open.c0, false), (1u8, &open.c1, true)] {
                let expected = stmt.masked_row(a, &open.z, invert);
                let received = resp1.row(row == 1);
                for (index, ((m, c), w)) in expected.iter().zip(keys).zip(received).enumerate() {
                    if &(m + c) != w {
                        return Err(Rejection::MaskMismatch { row, index });
                    }
                }
            }
            Ok(())
        }
        (Challenge::Reveal, P2Response::Reveal(reveal)) => {
            if reveal.x.len() != n || reveal.key.field() != field {
                return Err(Rejection::Malformed);
            }
            let lhs = select_sum(&resp1.w0, &resp1.w1, &reveal.x).ok_or(Rejection::Malformed)?;
            if lhs == a * stmt.k() + &reveal.key {
                Ok(())
            } else {
                Err(Rejection::SumMismatch)
            }
        }
        _ => Err(Rejection::WrongResponseKind),
    }
}

/// Recovers the challenge `a` from P2's answers to both challenges for the
/// same round:
/// `a = (c' - sum_i (c_{x_i})_i) * (sum_i (x XOR z)_i s_i - k)^-1`.
///
/// When `x XOR z` is itself a solution the divisor vanishes and the answers
/// carry no information about `a`.
pub fn extract_secret(
    stmt: &SubsetSum,
    audit: &AuditResponse,
    reveal: &RevealResponse,
) -> Result<Extraction<FieldElement>, SubsetSumError> {
    let n = stmt.n();
    check_dim(n, audit.z.len())?;
    check_dim(n, audit.c0.len())?;
    check_dim(n, audit.c1.len())?;
    check_dim(n, reveal.x.len())?;
    let selected: Vec<bool> = reveal.x.iter().zip(&audit.z).map(|(x, z)| x ^ z).collect();
    let field = stmt.field();
    let combined = stmt.s().iter().zip(&selected).fold(field.zero(), |acc, (s, &bit)| acc + s.scale_bit(bit));
    let divisor = combined - stmt.k();
    if divisor.is_zero() {
        return Ok(Extraction::NoConflict);
    }
    let keys = select_sum(&audit.c0, &audit.c1, &reveal.x).ok_or(SubsetSumError::Empty)?;
    let inverse = divisor.inv().expect("non-zero divisor");
    Ok(Extraction::Secret((&reveal.key - &keys) * inverse))
}

/// [`extract_secret`] on a pair of tagged answers, in either order.
pub fn extract_from_responses(
    stmt: &SubsetSum,
    first: &P2Response,
    second: &P2Response,
) -> Result<Extraction<FieldElement>, SubsetSumError> {
    match (first, second) {
        (P2Response::Audit(a), P2Response::Reveal(r)) | (P2Response::Reveal(r), P2Response::Audit(a)) => {
            extract_secret(stmt, a, r)
        }
        _ => Err(SubsetSumError::WrongResponseKinds),
    }
}

/// Smallest prime `Q >= max(64 * 2^(n + 3K), sum + 1)`, giving single-round
/// soundness `1/2 + 2^-K` against entangled provers.
pub fn choose_params(n: usize, soundness_k: u32, inst_sum: &BigUint) -> Result<Field, SubsetSumError> {
    if n == 0 {
        return Err(SubsetSumError::Empty);
    }
    if soundness_k == 0 {
        return Err(SubsetSumError::BadSoundnessParameter);
    }
    let bound = BigUint::from(64u32) << (n as u64 + 3 * soundness_k as u64);
    let bound = bound.max(inst_sum + 1u32);
    Ok(choose_prime(&bound))
}

/// Bits sent in one round for a given challenge, charging `log2 Q` per
/// field element: V1 `log Q`, P1 `2n log Q`, V2 one bit, P2 `n + 2n log Q`
/// (audit) or `n + log Q` (reveal).
pub fn round_bits_for(n: usize, log_q: f64, challenge: Challenge) -> f64 {
    let n = n as f64;
    let common = log_q + 2.0 * n * log_q + 1.0;
    common
        + match challenge {
            Challenge::Audit => n + 2.0 * n * log_q,
            Challenge::Reveal => n + log_q,
        }
}

/// Expected bits per round over a uniform challenge:
/// `log Q + 1 + 2n log Q + (n + (2n log Q + log Q)/2)`.
pub fn round_bits(n: usize, log_q: f64) -> f64 {
    (round_bits_for(n, log_q, Challenge::Audit) + round_bits_for(n, log_q, Challenge::Reveal)) / 2.0
}

/// Single-round soundness error `1/2 + 2^-K`.
pub fn soundness_error(soundness_k: u32) -> f64 {
    0.5 + libm::exp2(-(soundness_k as f64))
}

/// Rounds needed to push the soundness error below `2^-target_exponent`:
/// `ceil(target / -log2(1/2 + 2^-K))`.
pub fn rounds_needed(soundness_k: u32, target_exponent: u32) -> Result<u64, SubsetSumError> {
    if soundness_k == 0 {
        return Err(SubsetSumError::BadSoundnessParameter);
    }
    let eps = soundness_error(soundness_k);
    if eps >= 1.0 {
        return Err(SubsetSumError::NoSoundness);
    }
    let per_round = -libm::log2(eps);
    Ok(libm::ceil(target_exponent as f64 / per_round) as u64)
}

/// `-log2` of the soundness error after `rounds` independent rounds.
pub fn soundness_bits(soundness_k: u32, rounds: u64) -> f64 {
    -libm::log2(soundness_error(soundness_k)) * rounds as f64
}

/// Small-instance helper: the instance's elements as `u64`, when they fit.
pub fn values_u64(instance: &SubsetSumInstance) -> Option<Vec<u64>> {
    instance.values().iter().map(ToPrimitive::to_u64).collect()
}
