//! Zero-knowledge two-prover proof for 3SAT.
//!
//! The provers commit to the assignment `s'` and to the literal values `p` of
//! a randomly rotated copy `Pi(phi)` of the formula. An audit opens the sum
//! (negated literal) or difference (plain literal) of every position with its
//! variable, proving the literal bits agree with `s'` without revealing them.
//! A reveal unveils one true literal per clause at position `Pi(e)_i`.
//!
//! Positions inside a clause are 1-based (`{1,2,3}`); the flat position of
//! literal `j` of clause `i` (both 1-based) is `3(i-1)+j`, stored here as the
//! 0-based index `3*i + j - 1` with `i` 0-based.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use rand::{Rng, RngCore};

use crate::field::{choose_prime, Field, FieldElement};
use crate::protocol::{Challenge, Extraction, Rejection, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThreeSatError {
    #[error("literal refers to variable {var}, formula has {num_vars}")]
    VariableOutOfRange { var: usize, num_vars: usize },
    #[error("vector of length {actual}, expected {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("clause {clause} has no true literal under the assignment")]
    UnsatisfiedClause { clause: usize },
    #[error("position {0} is outside 1..=3")]
    BadPosition(u8),
    #[error("rotation {0} is outside 0..=2")]
    BadRotation(u8),
    #[error("soundness parameter k must be at least 1 and the formula non-empty")]
    BadParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// DIMACS-style signed form: `-3` is `!x3`.
    pub fn from_dimacs(code: i64) -> Option<Self> {
        if code == 0 {
            return None;
        }
        Some(Literal { var: code.unsigned_abs() as usize, negated: code < 0 })
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn eval(self, assignment: &Assignment) -> bool {
        assignment.0[self.var - 1] != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

pub type Clause = [Literal; 3];

/// A 3-CNF over variables `x1..xn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf3 {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, ThreeSatError> {
        for lit in clauses.iter().flatten() {
            if lit.var == 0 || lit.var > num_vars {
                return Err(ThreeSatError::VariableOutOfRange { var: lit.var, num_vars });
            }
        }
        Ok(Cnf3 { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Literal at 0-based flat position `3*i + (j-1)`.
    pub fn literal_at(&self, flat: usize) -> Literal {
        self.clauses[flat / 3][flat % 3]
    }

    fn check_assignment(&self, assignment: &Assignment) -> Result<(), ThreeSatError> {
        if assignment.0.len() != self.num_vars {
            return Err(ThreeSatError::Dimension { expected: self.num_vars, actual: assignment.0.len() });
        }
        Ok(())
    }

    /// Exhaustive search over `2^n` assignments; test oracle for `n <= 20`.
    pub fn solve_brute_force(&self) -> Option<Assignment> {
        assert!(self.num_vars <= 20, "brute force limited to 20 variables");
        (0u32..1 << self.num_vars)
            .map(|mask| Assignment((0..self.num_vars).map(|i| mask >> i & 1 == 1).collect()))
            .find(|a| evaluate(self, a).unwrap_or(false))
    }
}

/// A truth assignment `s'`, index `j-1` holding `x_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(pub Vec<bool>);

/// Per clause, the 1-based position of a true literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionWitness(pub Vec<u8>);

pub fn evaluate(formula: &Cnf3, assignment: &Assignment) -> Result<bool, ThreeSatError> {
    formula.check_assignment(assignment)?;
    Ok(formula.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment))))
}

/// Lowest true position in every clause.
pub fn witness_positions(formula: &Cnf3, assignment: &Assignment) -> Result<PositionWitness, ThreeSatError> {
    formula.check_assignment(assignment)?;
    formula
        .clauses
        .iter()
        .enumerate()
        .map(|(i, clause)| {
            clause
                .iter()
                .position(|l| l.eval(assignment))
                .map(|j| j as u8 + 1)
                .ok_or(ThreeSatError::UnsatisfiedClause { clause: i })
        })
        .collect::<Result<_, _>>()
        .map(PositionWitness)
}

/// Independent cyclic rotations of every clause.
///
/// Entry `r` rotates its clause right by `r`: `(l1, l2, l3)` with `r = 1`
/// becomes `(l3, l1, l2)`, so the literal at position `j` moves to
/// `((j - 1 + r) mod 3) + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclicPerm(Vec<u8>);

impl CyclicPerm {
    pub fn new(rotations: Vec<u8>) -> Result<Self, ThreeSatError> {
        if let Some(&r) = rotations.iter().find(|&&r| r > 2) {
            return Err(ThreeSatError::BadRotation(r));
        }
        Ok(CyclicPerm(rotations))
    }

    pub fn identity(m: usize) -> Self {
        CyclicPerm(alloc::vec![0; m])
    }

    pub fn random<R: RngCore + ?Sized>(m: usize, rng: &mut R) -> Self {
        CyclicPerm((0..m).map(|_| rng.gen_range(0..3)).collect())
    }

    /// All `3^m` permutations, in counting order.
    pub fn all(m: usize) -> impl Iterator<Item = CyclicPerm> {
        let total = 3usize.pow(m as u32);
        (0..total).map(move |mut idx| {
            let mut rot = Vec::with_capacity(m);
            for _ in 0..m {
                rot.push((idx % 3) as u8);
                idx /= 3;
            }
            CyclicPerm(rot)
        })
    }

    pub fn rotations(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// New 1-based position of the literal that sat at `position` in `clause`.
    pub fn map_position(&self, clause: usize, position: u8) -> u8 {
        (position - 1 + self.0[clause]) % 3 + 1
    }

    pub fn apply(&self, formula: &Cnf3) -> Result<Cnf3, ThreeSatError> {
        self.check_len(formula.num_clauses())?;
        let clauses = formula
            .clauses
            .iter()
            .zip(&self.0)
            .map(|(clause, &r)| {
                let mut out = *clause;
                for (j, lit) in clause.iter().enumerate() {
                    out[(j + r as usize) % 3] = *lit;
                }
                out
            })
            .collect();
        Ok(Cnf3 { num_vars: formula.num_vars, clauses })
    }

    pub fn apply_positions(&self, e: &PositionWitness) -> Result<PositionWitness, ThreeSatError> {
        self.check_len(e.0.len())?;
        e.0.iter()
            .enumerate()
            .map(
                |(i, &p)| {
                    if (1..=3).contains(&p) {
                        Ok(self.map_position(i, p))
                    } else {
                        Err(ThreeSatError::BadPosition(p))
                    }
                },
            )
            .collect::<Result<_, _>>()
            .map(PositionWitness)
    }

    fn check_len(&self, m: usize) -> Result<(), ThreeSatError> {
        if self.0.len() != m {
            return Err(ThreeSatError::Dimension { expected: m, actual: self.0.len() });
        }
        Ok(())
    }
}

/// `p_{3(i-1)+j}`: value of literal `j` of clause `i` under `s'`.
pub fn formula_bits(permuted: &Cnf3, assignment: &Assignment) -> Result<Vec<bool>, ThreeSatError> {
    permuted.check_assignment(assignment)?;
    Ok(permuted.clauses.iter().flatten().map(|l| l.eval(assignment)).collect())
}

/// A formula bound to the field the round arithmetic runs in.
#[derive(Debug, Clone)]
pub struct ThreeSat {
    field: Field,
    formula: Cnf3,
}

impl ThreeSat {
    pub fn new(field: Field, formula: Cnf3) -> Self {
        ThreeSat { field, formula }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn formula(&self) -> &Cnf3 {
        &self.formula
    }
}

/// Randomness the provers share before a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatSharedState {
    pub perm: CyclicPerm,
    /// Keys for `p`, length `3m`.
    pub c: Vec<FieldElement>,
    /// Keys for `s'`, length `n`.
    pub c_prime: Vec<FieldElement>,
}

impl SatSharedState {
    pub fn sample<R: RngCore + ?Sized>(field: &Field, formula: &Cnf3, rng: &mut R) -> Self {
        let perm = CyclicPerm::random(formula.num_clauses(), rng);
        let c = field.random_vec(3 * formula.num_clauses(), rng);
        let c_prime = field.random_vec(formula.num_vars(), rng);
        SatSharedState { perm, c, c_prime }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatP1Response {
    /// `a*s' + c'`
    pub w_prime: Vec<FieldElement>,
    /// `a*p + c`
    pub w: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyResponse {
    pub perm: CyclicPerm,
    pub delta: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnesResponse {
    /// 1-based position of the unveiled literal in each permuted clause.
    pub f: Vec<u8>,
    pub gamma: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatP2Response {
    Consistency(ConsistencyResponse),
    Ones(OnesResponse),
}

impl SatP2Response {
    pub fn challenge(&self) -> Challenge {
        match self {
            SatP2Response::Consistency(_) => Challenge::Audit,
            SatP2Response::Ones(_) => Challenge::Reveal,
        }
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<(), ThreeSatError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ThreeSatError::Dimension { expected, actual })
    }
}

/// P1: `w' = a*s' + c'`, `w = a*p + c`.
pub fn p1_respond(
    a: &FieldElement,
    state: &SatSharedState,
    assignment: &Assignment,
    p: &[bool],
) -> Result<SatP1Response, ThreeSatError> {
    check_dim(state.c_prime.len(), assignment.0.len())?;
    check_dim(state.c.len(), p.len())?;
    let w_prime = assignment.0.iter().zip(&state.c_prime).map(|(&s, c)| a.scale_bit(s) + c).collect();
    let w = p.iter().zip(&state.c).map(|(&bit, c)| a.scale_bit(bit) + c).collect();
    Ok(SatP1Response { w_prime, w })
}

/// P2: on an audit send `Pi` and `c_i + c'_j` (negated) or `c_i - c'_j`
/// (plain) for every position; on a reveal send `Pi(e)_i` and the key of
/// that position for every clause.
pub fn p2_respond(
    challenge: Challenge,
    state: &SatSharedState,
    formula: &Cnf3,
    e: &PositionWitness,
) -> Result<SatP2Response, ThreeSatError> {
    let m = formula.num_clauses();
    check_dim(3 * m, state.c.len())?;
    check_dim(formula.num_vars(), state.c_prime.len())?;
    match challenge {
        Challenge::Audit => {
            let permuted = state.perm.apply(formula)?;
            let delta = state
                .c
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let lit = permuted.literal_at(i);
                    let key = &state.c_prime[lit.var - 1];
                    if lit.negated {
                        c + key
                    } else {
                        c - key
                    }
                })
                .collect();
            Ok(SatP2Response::Consistency(ConsistencyResponse { perm: state.perm.clone(), delta }))
        }
        Challenge::Reveal => {
            let f = state.perm.apply_positions(e)?.0;
            let gamma = f.iter().enumerate().map(|(i, &fi)| state.c[3 * i + fi as usize - 1].clone()).collect();
            Ok(SatP2Response::Ones(OnesResponse { f, gamma }))
        }
    }
}

pub fn verify_round(
    stmt: &ThreeSat,
    a: &FieldElement,
    resp1: &SatP1Response,
    challenge: Challenge,
    resp2: &SatP2Response,
) -> Verdict {
    check_round(stmt, a, resp1, challenge, resp2).into()
}

fn check_round(
    stmt: &ThreeSat,
    a: &FieldElement,
    resp1: &SatP1Response,
    challenge: Challenge,
    resp2: &SatP2Response,
) -> Result<(), Rejection> {
    let formula = stmt.formula();
    let field = stmt.field();
    let m = formula.num_clauses();
    let in_field = |v: &[FieldElement], len: usize| v.len() == len && v.iter().all(|e| e.field() == field);
    if !in_field(&resp1.w_prime, formula.num_vars()) || !in_field(&resp1.w, 3 * m) {
        return Err(Rejection::Malformed);
    }
    match (challenge, resp2) {
        (Challenge::Audit, SatP2Response::Consistency(r)) => {
            if !in_field(&r.delta, 3 * m) {
                return Err(Rejection::Malformed);
            }
            let permuted = r.perm.apply(formula).map_err(|_| Rejection::Malformed)?;
            for (position, (w, delta)) in resp1.w.iter().zip(&r.delta).enumerate() {
                let lit = permuted.literal_at(position);
                let wj = &resp1.w_prime[lit.var - 1];
                let ok = if lit.negated { w + wj == a + delta } else { &(w - wj) == delta };
                if !ok {
                    return Err(Rejection::PositionMismatch { position });
                }
            }
            Ok(())
        }
        (Challenge::Reveal, SatP2Response::Ones(r)) => {
            if r.f.len() != m || !in_field(&r.gamma, m) || r.f.iter().any(|f| !(1..=3).contains(f)) {
                return Err(Rejection::Malformed);
            }
            for (clause, (&fi, gamma)) in r.f.iter().zip(&r.gamma).enumerate() {
                if resp1.w[3 * clause + fi as usize - 1] != a + gamma {
                    return Err(Rejection::ClauseMismatch { clause });
                }
            }
            Ok(())
        }
        _ => Err(Rejection::WrongResponseKind),
    }
}

/// Looks for a variable that one clause's unveiled literal uses negated and
/// another's uses plainly. Such a pair of answers fixes
/// `a = delta_p + delta_p' - gamma_i - gamma_i'`.
///
/// `NoConflict` means the unveiled literals are mutually consistent, so
/// setting each of them true satisfies the formula.
pub fn extract_secret(
    stmt: &ThreeSat,
    consistency: &ConsistencyResponse,
    ones: &OnesResponse,
) -> Result<Extraction<FieldElement>, ThreeSatError> {
    let formula = stmt.formula();
    let m = formula.num_clauses();
    check_dim(3 * m, consistency.delta.len())?;
    check_dim(m, ones.f.len())?;
    check_dim(m, ones.gamma.len())?;
    if let Some(&bad) = ones.f.iter().find(|f| !(1..=3).contains(*f)) {
        return Err(ThreeSatError::BadPosition(bad));
    }
    let permuted = consistency.perm.apply(formula)?;
    let flat = |i: usize| 3 * i + ones.f[i] as usize - 1;

    // First clause seen using each variable negated / plain.
    let mut negated_at = alloc::vec![None; formula.num_vars() + 1];
    let mut plain_at = alloc::vec![None; formula.num_vars() + 1];
    for i in 0..m {
        let lit = permuted.literal_at(flat(i));
        let (mine, other) = if lit.negated { (&mut negated_at, &plain_at) } else { (&mut plain_at, &negated_at) };
        if let Some(i2) = other[lit.var] {
            let (neg, plain) = if lit.negated { (i, i2) } else { (i2, i) };
            let a =
                &consistency.delta[flat(neg)] + &consistency.delta[flat(plain)] - &ones.gamma[neg] - &ones.gamma[plain];
            return Ok(Extraction::Secret(a));
        }
        mine[lit.var].get_or_insert(i);
    }
    Ok(Extraction::NoConflict)
}

/// Smallest prime `Q >= 64 * 3^m * 2^(3k)`, i.e. `64 * 2^(log2(3) m + 3k)`.
pub fn choose_params(m: usize, soundness_k: u32) -> Result<Field, ThreeSatError> {
    if m == 0 || soundness_k == 0 {
        return Err(ThreeSatError::BadParameters);
    }
    let bound = (BigUint::from(64u32) * BigUint::from(3u32).pow(m as u32)) << (3 * soundness_k as u64);
    Ok(choose_prime(&bound))
}

/// Bits sent in one round for a given challenge, charging `log2 Q` per field
/// element: V1 `log Q`, P1 `(n + 3m) log Q`, V2 one bit, P2 `2m + 3m log Q`
/// (audit: rotations plus the `delta`s) or `m (log Q + 2)` (reveal).
pub fn round_bits_for(n: usize, m: usize, log_q: f64, challenge: Challenge) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let common = log_q + (n + 3.0 * m) * log_q + 1.0;
    common
        + match challenge {
            Challenge::Audit => 2.0 * m + 3.0 * m * log_q,
            Challenge::Reveal => m * (log_q + 2.0),
        }
}

pub fn round_bits(n: usize, m: usize, log_q: f64) -> f64 {
    (round_bits_for(n, m, log_q, Challenge::Audit) + round_bits_for(n, m, log_q, Challenge::Reveal)) / 2.0
}

/// Uniform random 3-CNF: every literal independent, variable uniform in
/// `1..=n`, sign a fair coin.
pub fn random_formula<R: RngCore + ?Sized>(n: usize, m: usize, rng: &mut R) -> Cnf3 {
    assert!(n >= 1, "need at least one variable");
    let clauses = (0..m)
        .map(|_| core::array::from_fn(|_| Literal { var: rng.gen_range(1..=n), negated: rng.gen_bool(0.5) }))
        .collect();
    Cnf3 { num_vars: n, clauses }
}

/// Random formula with a planted satisfying assignment: clauses with three
/// uniform literals, resampled until the planted assignment satisfies them.
pub fn random_satisfiable<R: RngCore + ?Sized>(n: usize, m: usize, rng: &mut R) -> (Cnf3, Assignment) {
    assert!(n >= 1, "need at least one variable");
    let assignment = Assignment((0..n).map(|_| rng.gen_bool(0.5)).collect());
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let clause: Clause =
            core::array::from_fn(|_| Literal { var: rng.gen_range(1..=n), negated: rng.gen_bool(0.5) });
        if clause.iter().any(|l| l.eval(&assignment)) {
            clauses.push(clause);
        }
    }
    (Cnf3 { num_vars: n, clauses }, assignment)
}
