//! Cheating provers and exhaustive classical soundness.
//!
//! The cheaters have no witness. Each commits to data that survives one of
//! the two challenges and guesses which one V2 will send, so against an
//! honest V2 they pass about half the rounds. [`signalling_answers_subset_sum`]
//! and [`signalling_answers_three_sat`] go further and answer both
//! challenges consistently, which is only possible by knowing `a`; feeding
//! those answers to the extraction functions recovers `a`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore};

use crate::field::{Field, FieldElement};
use crate::games::{FiniteGame, GameError, Value, MAX_STRATEGIES};
use crate::protocol::Challenge;
use crate::session::{round_rng, HonestV1, HonestV2, Message, Outgoing, Parties, Party, PartyId, Seeds, Statement};
use crate::subset_sum::{self, AuditResponse, P1Response, P2Response, RevealResponse, SubsetSum};
use crate::three_sat::{
    self, Assignment, ConsistencyResponse, CyclicPerm, OnesResponse, SatP1Response, SatP2Response, ThreeSat,
};
use crate::wire::Payload;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdversaryError {
    #[error("{0} strategy pairs exceed the exhaustive-search limit")]
    TooLarge(u128),
    #[error("modulus too large for exhaustive search")]
    ModulusTooLarge,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A witnessless prover pair, labelled for reports.
pub struct CheatStrategy {
    pub label: &'static str,
    pub p1: Box<dyn Party>,
    pub p2: Box<dyn Party>,
}

/// Commits honestly to random data and answers the audit perfectly; the
/// reveal answer is random.
pub fn strategy_answer_chall0(stmt: &Statement, shared: [u8; 32]) -> CheatStrategy {
    strategy_guess_chall(stmt, Challenge::Audit, shared)
}

/// Commits to data tailored to `guess`. Guessing the reveal means
/// committing to values that sum to the target (Subset Sum) or to all-true
/// literals (3SAT), which no audit can explain.
pub fn strategy_guess_chall(stmt: &Statement, guess: Challenge, shared: [u8; 32]) -> CheatStrategy {
    let make = |id| Box::new(Guesser { id, stmt: stmt.clone(), guess, shared }) as Box<dyn Party>;
    CheatStrategy {
        label: match guess {
            Challenge::Audit => "answer-audit",
            Challenge::Reveal => "answer-reveal",
        },
        p1: make(PartyId::P1),
        p2: make(PartyId::P2),
    }
}

/// Honest verifiers facing a cheating prover pair.
pub fn cheating_parties(stmt: &Statement, guess: Challenge, seed: u64) -> Parties {
    let seeds = Seeds::derive(seed);
    let cheat = strategy_guess_chall(stmt, guess, seeds.shared);
    Parties {
        v1: Box::new(HonestV1::new(stmt.field().clone(), seeds.v1)),
        v2: Box::new(HonestV2::new(seeds.v2)),
        p1: cheat.p1,
        p2: cheat.p2,
    }
}

struct Guesser {
    id: PartyId,
    stmt: Statement,
    guess: Challenge,
    shared: [u8; 32],
}

/// What the cheaters agree on for one round: committed values, their keys,
/// and both prepared answers.
struct Plan {
    values: Vec<FieldElement>,
    keys: Vec<FieldElement>,
    answers: [Payload; 2],
}

impl Guesser {
    fn plan<R: RngCore + ?Sized>(&self, rng: &mut R) -> Plan {
        match &self.stmt {
            Statement::SubsetSum(s) => plan_subset_sum(s, self.guess, rng),
            Statement::ThreeSat(s) => plan_three_sat(s, self.guess, rng),
        }
    }
}

fn plan_subset_sum<R: RngCore + ?Sized>(stmt: &SubsetSum, guess: Challenge, rng: &mut R) -> Plan {
    let field = stmt.field();
    let n = stmt.n();
    let c0 = field.random_vec(n, rng);
    let c1 = field.random_vec(n, rng);
    let z: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let x: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let (b0, b1, key) = match guess {
        Challenge::Audit => {
            let row = |keep: bool| stmt.s().iter().zip(&z).map(|(s, &zi)| s.scale_bit(zi == keep)).collect::<Vec<_>>();
            (row(true), row(false), field.random(rng))
        }
        Challenge::Reveal => {
            // The target sits in the one cell the reveal will read first.
            let mut rows = [alloc::vec![field.zero(); n], alloc::vec![field.zero(); n]];
            rows[x[0] as usize][0] = stmt.k().clone();
            let [b0, b1] = rows;
            (b0, b1, subset_sum::select_sum(&c0, &c1, &x).expect("n >= 1"))
        }
    };
    let answers = [
        Payload::SsAnswer(P2Response::Audit(AuditResponse { z, c0: c0.clone(), c1: c1.clone() })),
        Payload::SsAnswer(P2Response::Reveal(RevealResponse { x, key })),
    ];
    Plan { values: [b0, b1].concat(), keys: [c0, c1].concat(), answers }
}

fn plan_three_sat<R: RngCore + ?Sized>(stmt: &ThreeSat, guess: Challenge, rng: &mut R) -> Plan {
    let field = stmt.field();
    let formula = stmt.formula();
    let m = formula.num_clauses();
    let state = three_sat::SatSharedState::sample(field, formula, rng);
    let s = Assignment((0..formula.num_vars()).map(|_| rng.gen_bool(0.5)).collect());
    let permuted = state.perm.apply(formula).expect("one rotation per clause");
    let p = match guess {
        Challenge::Audit => three_sat::formula_bits(&permuted, &s).expect("sizes match"),
        Challenge::Reveal => alloc::vec![true; 3 * m],
    };
    let f: Vec<u8> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
    let gamma = match guess {
        Challenge::Audit => field.random_vec(m, rng),
        Challenge::Reveal => f.iter().enumerate().map(|(i, &fi)| state.c[3 * i + fi as usize - 1].clone()).collect(),
    };
    // The audit answer is what an honest P2 would send for these keys.
    let delta = (0..3 * m)
        .map(|i| {
            let lit = permuted.literal_at(i);
            let key = &state.c_prime[lit.var - 1];
            if lit.negated {
                &state.c[i] + key
            } else {
                &state.c[i] - key
            }
        })
        .collect();
    let values = s.0.iter().chain(&p).map(|&b| field.bit(b)).collect();
    let keys = state.c_prime.iter().chain(&state.c).cloned().collect();
    let answers = [
        Payload::SatAnswer(SatP2Response::Consistency(ConsistencyResponse { perm: state.perm, delta })),
        Payload::SatAnswer(SatP2Response::Ones(OnesResponse { f, gamma })),
    ];
    Plan { values, keys, answers }
}

impl Party for Guesser {
    fn receive(&mut self, msg: &Message) -> Vec<Outgoing> {
        let plan = self.plan(&mut round_rng(&self.shared, msg.round));
        let payload = match (&msg.payload, self.id) {
            (Payload::Query(a), PartyId::P1) => {
                let w: Vec<FieldElement> = plan.values.iter().zip(&plan.keys).map(|(b, c)| a * b + c).collect();
                match &self.stmt {
                    Statement::SubsetSum(s) => {
                        let (w0, w1) = w.split_at(s.n());
                        Payload::SsCommit(P1Response { w0: w0.to_vec(), w1: w1.to_vec() })
                    }
                    Statement::ThreeSat(s) => {
                        let (w_prime, w) = w.split_at(s.formula().num_vars());
                        Payload::SatCommit(SatP1Response { w_prime: w_prime.to_vec(), w: w.to_vec() })
                    }
                }
            }
            (Payload::Challenge(c), PartyId::P2) => {
                let [audit, reveal] = plan.answers;
                match c {
                    Challenge::Audit => audit,
                    Challenge::Reveal => reveal,
                }
            }
            _ => return Vec::new(),
        };
        alloc::vec![Outgoing { to: self.id.peer(), payload }]
    }
}

/// Answers to both challenges that each verify against the same
/// commitment. Producing them needs `a`, which is exactly what relativistic
/// separation denies P2.
pub fn signalling_answers_subset_sum<R: RngCore + ?Sized>(
    stmt: &SubsetSum,
    a: &FieldElement,
    rng: &mut R,
) -> (P1Response, AuditResponse, RevealResponse) {
    let state = subset_sum::ProverSharedState::sample(stmt.field(), stmt.n(), rng);
    let resp1 = subset_sum::p1_respond(stmt, a, &state).expect("state sized for the statement");
    let x: Vec<bool> = (0..stmt.n()).map(|_| rng.gen_bool(0.5)).collect();
    let key = subset_sum::select_sum(&resp1.w0, &resp1.w1, &x).expect("n >= 1") - &(a * stmt.k());
    let audit = AuditResponse { z: state.z, c0: state.c0, c1: state.c1 };
    (resp1, audit, RevealResponse { x, key })
}

/// 3SAT analogue of [`signalling_answers_subset_sum`]: an honest commitment
/// to a random assignment, its honest audit answer, and one unveiled
/// literal per clause chosen at random with `gamma_i = w_p - a`.
pub fn signalling_answers_three_sat<R: RngCore + ?Sized>(
    stmt: &ThreeSat,
    a: &FieldElement,
    rng: &mut R,
) -> (SatP1Response, ConsistencyResponse, OnesResponse) {
    let formula = stmt.formula();
    let state = three_sat::SatSharedState::sample(stmt.field(), formula, rng);
    let s = Assignment((0..formula.num_vars()).map(|_| rng.gen_bool(0.5)).collect());
    let p = three_sat::formula_bits(&state.perm.apply(formula).expect("sized"), &s).expect("sized");
    let resp1 = three_sat::p1_respond(a, &state, &s, &p).expect("sized");
    // The audit answer does not depend on the position witness.
    let dummy = three_sat::PositionWitness(alloc::vec![1; formula.num_clauses()]);
    let SatP2Response::Consistency(cons) =
        three_sat::p2_respond(Challenge::Audit, &state, formula, &dummy).expect("sized")
    else {
        unreachable!("audit answer")
    };
    let f: Vec<u8> = (0..formula.num_clauses()).map(|_| rng.gen_range(1..=3)).collect();
    let gamma = f.iter().enumerate().map(|(i, &fi)| &resp1.w[3 * i + fi as usize - 1] - a).collect();
    (resp1, cons, OnesResponse { f, gamma })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessReport {
    /// Best single-round acceptance probability of deterministic classical
    /// provers against honest uniform verifiers.
    pub value: Value,
    /// P2 strategy pairs searched (P1 best-responds per challenge `a`).
    pub p2_strategies: u64,
}

fn small_modulus(field: &Field) -> Result<u64, AdversaryError> {
    field.modulus().to_u64().filter(|&q| q <= 1 << 16).ok_or(AdversaryError::ModulusTooLarge)
}

fn guard(count: Option<u128>) -> Result<u64, AdversaryError> {
    match count {
        Some(c) if c <= MAX_STRATEGIES => Ok(c as u64),
        Some(c) => Err(AdversaryError::TooLarge(c)),
        None => Err(AdversaryError::TooLarge(u128::MAX)),
    }
}

/// Calls `visit` with every vector in `0..radix` of length `len`.
fn for_each_vector(len: usize, radix: u64, mut visit: impl FnMut(&[u64])) {
    let mut v = alloc::vec![0u64; len];
    loop {
        visit(&v);
        let Some(i) = v.iter().position(|&d| d + 1 < radix) else { return };
        v[i] += 1;
        v[..i].fill(0);
    }
}

/// Exhaustive single-round soundness of the Subset Sum protocol against
/// classical provers.
///
/// A deterministic P2 is a pair of fixed answers `(z, c0, c1)` and
/// `(x, c')`. Given those and `a`, P1's best reply is exact: the only
/// commitment passing the audit is `w_r = a*(s*mask_r) + c_r`, so P1 wins
/// both branches iff that commitment also passes the reveal, and otherwise
/// wins one branch. The value is the maximum over P2 of the average.
pub fn exhaustive_soundness_subset_sum(stmt: &SubsetSum) -> Result<SoundnessReport, AdversaryError> {
    let q = small_modulus(stmt.field())?;
    let n = stmt.n();
    let count = (q as u128).checked_pow(2 * n as u32 + 1).and_then(|c| c.checked_mul(1u128 << (2 * n).min(127)));
    let p2_strategies = guard(count)?;
    let s: Vec<u64> = stmt.s().iter().map(|e| e.to_u64_lossy()).collect();
    let k = stmt.k().to_u64_lossy();

    let mut best = 0u64;
    let mut hist = alloc::vec![0u64; q as usize];
    for_each_vector(2 * n, q, |keys| {
        let (c0, c1) = keys.split_at(n);
        for zmask in 0u32..1 << n {
            for xmask in 0u32..1 << n {
                hist.fill(0);
                for a in 0..q {
                    // sum_i (w_{x_i})_i - a*k with w forced by the audit answer
                    let mut total = 0u64;
                    for i in 0..n {
                        let (zi, xi) = (zmask >> i & 1 == 1, xmask >> i & 1 == 1);
                        let committed = if xi { !zi } else { zi };
                        let key = if xi { c1[i] } else { c0[i] };
                        total = (total + a * s[i] * committed as u64 + key) % q;
                    }
                    let c_prime = (total + q - a * k % q) % q;
                    hist[c_prime as usize] += 1;
                }
                // Best reveal key c': the one matching the forced sum most often.
                let both = *hist.iter().max().expect("q >= 1");
                best = best.max(q + both);
            }
        }
    });
    Ok(SoundnessReport { value: Ratio::new(best, 2 * q), p2_strategies })
}

/// Exhaustive single-round soundness of the 3SAT protocol against classical
/// provers, by the same reduction as the Subset Sum version: P1 passes both
/// branches at `a` iff some `w'` makes the audit-forced `w` match every
/// unveiled `a + gamma_i`.
pub fn exhaustive_soundness_three_sat(stmt: &ThreeSat) -> Result<SoundnessReport, AdversaryError> {
    let q = small_modulus(stmt.field())?;
    let formula = stmt.formula();
    let (n, m) = (formula.num_vars(), formula.num_clauses());
    let count = (q as u128).checked_pow(4 * m as u32).and_then(|c| c.checked_mul(9u128.checked_pow(m as u32)?));
    let p2_strategies = guard(count)?;

    let mut best = 0u64;
    let mut required: Vec<Option<u64>> = alloc::vec![None; n];
    for_each_vector(m, 3, |rot| {
        let perm = CyclicPerm::new(rot.iter().map(|&r| r as u8).collect()).expect("below 3");
        let permuted = perm.apply(formula).expect("sized");
        for_each_vector(3 * m, q, |delta| {
            for_each_vector(m, 3, |f| {
                for_each_vector(m, q, |gamma| {
                    let mut wins = q;
                    for a in 0..q {
                        required.fill(None);
                        let consistent = (0..m).all(|i| {
                            let pos = 3 * i + f[i] as usize;
                            let lit = permuted.literal_at(pos);
                            // plain: w' = a + gamma - delta; negated: w' = delta - gamma
                            let need = if lit.negated {
                                (delta[pos] + q - gamma[i]) % q
                            } else {
                                (a + gamma[i] + q - delta[pos]) % q
                            };
                            *required[lit.var - 1].get_or_insert(need) == need
                        });
                        wins += consistent as u64;
                    }
                    best = best.max(wins);
                });
            });
        });
    });
    Ok(SoundnessReport { value: Ratio::new(best, 2 * q), p2_strategies })
}

/// The single-round Subset Sum protocol as a two-player game: P1 is Alice
/// with input `a` and output `(w0, w1)`, P2 is Bob with input the challenge
/// and output an answer. Answers are numbered with the bits lowest and the
/// field elements in base `Q` above them; numbers past the end of the
/// shorter answer space lose.
pub fn subset_sum_game(stmt: &SubsetSum) -> Result<FiniteGame, AdversaryError> {
    let q = small_modulus(stmt.field())?;
    let n = stmt.n();
    let field = stmt.field();
    let commits = q.pow(2 * n as u32) as usize;
    let audits = (1usize << n) * commits;
    let reveals = (1usize << n) * q as usize;
    let digits = |mut v: usize, len: usize| -> Vec<FieldElement> {
        (0..len)
            .map(|_| {
                let d = v % q as usize;
                v /= q as usize;
                field.element(d as u64)
            })
            .collect()
    };
    let bits = |v: usize| (0..n).map(|i| v >> i & 1 == 1).collect::<Vec<bool>>();
    let game = FiniteGame::from_fn(q as usize, 2, commits, audits.max(reveals), |a, chall, w, b| {
        let a = field.element(a as u64);
        let w = digits(w, 2 * n);
        let resp1 = P1Response { w0: w[..n].to_vec(), w1: w[n..].to_vec() };
        let (challenge, resp2) = if chall == 0 {
            if b >= audits {
                return false;
            }
            let keys = digits(b >> n, 2 * n);
            let audit = AuditResponse { z: bits(b % (1 << n)), c0: keys[..n].to_vec(), c1: keys[n..].to_vec() };
            (Challenge::Audit, P2Response::Audit(audit))
        } else {
            if b >= reveals {
                return false;
            }
            let reveal = RevealResponse { x: bits(b % (1 << n)), key: field.element((b >> n) as u64) };
            (Challenge::Reveal, P2Response::Reveal(reveal))
        };
        subset_sum::verify_round(stmt, &a, &resp1, challenge, &resp2).is_accept()
    })?;
    Ok(game)
}

/// `1/2 + (64 * 2^n / Q)^(1/3)`, capped at 1: the entangled-prover bound
/// for one round at this modulus.
pub fn subset_sum_soundness_bound(n: usize, q: f64) -> f64 {
    (0.5 + libm::cbrt(64.0 * libm::exp2(n as f64) / q)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::classical_value;
    use crate::session::{run_protocol, Statement};
    use crate::subset_sum::SubsetSumInstance;
    use crate::three_sat::{Cnf3, Literal};
    use crate::Extraction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ss(q: u64, s: &[u64], k: u64) -> SubsetSum {
        SubsetSum::new(Field::from_u64(q).unwrap(), SubsetSumInstance::from_u64(s, k).unwrap()).unwrap()
    }

    fn contradiction(q: u64) -> ThreeSat {
        let phi = Cnf3::new(1, alloc::vec![[Literal::pos(1); 3], [Literal::neg(1); 3]]).unwrap();
        ThreeSat::new(Field::from_u64(q).unwrap(), phi)
    }

    #[test]
    fn reduction_agrees_with_generic_game_value() {
        for (s, k) in [(1u64, 2u64), (1, 1), (2, 0)] {
            let stmt = ss(3, &[s], k);
            let game = subset_sum_game(&stmt).unwrap();
            let generic = classical_value(&game).unwrap();
            let reduced = exhaustive_soundness_subset_sum(&stmt).unwrap().value;
            assert_eq!(generic, reduced, "s={s} k={k}");
        }
    }

    #[test]
    fn unsatisfiable_tiny_instances() {
        // {3, 5} never sums to 4
        let report = exhaustive_soundness_subset_sum(&ss(11, &[3, 5], 4)).unwrap();
        assert_eq!(report.value, Ratio::new(12, 22));
        assert_eq!(report.p2_strategies, 4 * 11u64.pow(4) * 4 * 11);
        let sat = exhaustive_soundness_three_sat(&contradiction(3)).unwrap();
        assert_eq!(sat.value, Ratio::new(4, 6));
    }

    #[test]
    fn satisfiable_tiny_instances_reach_one() {
        assert_eq!(exhaustive_soundness_subset_sum(&ss(7, &[2, 3], 5)).unwrap().value, Ratio::from_integer(1));
        let phi = Cnf3::new(1, alloc::vec![[Literal::pos(1); 3]]).unwrap();
        let stmt = ThreeSat::new(Field::from_u64(5).unwrap(), phi);
        assert_eq!(exhaustive_soundness_three_sat(&stmt).unwrap().value, Ratio::from_integer(1));
    }

    #[test]
    fn search_limits() {
        assert!(matches!(exhaustive_soundness_subset_sum(&ss(13, &[1, 2, 4], 12)), Err(AdversaryError::TooLarge(_))));
        assert!(matches!(exhaustive_soundness_three_sat(&contradiction(7)), Err(AdversaryError::TooLarge(_))));
        assert_eq!(subset_sum_soundness_bound(2, 11.0), 1.0);
        assert!((subset_sum_soundness_bound(1, 1024.0 * 1024.0) - 0.5495).abs() < 1e-3);
    }

    #[test]
    fn guessers_pass_exactly_their_challenge() {
        let stmt = Statement::SubsetSum(ss(1_000_003, &[3, 5, 9], 4));
        let sat = Statement::ThreeSat(contradiction(1_000_003));
        for stmt in [stmt, sat] {
            for guess in Challenge::BOTH {
                let t = run_protocol(&stmt, &mut cheating_parties(&stmt, guess, 3), 200).unwrap();
                for (v, &c) in t.verdicts.iter().zip(&t.challenges) {
                    assert_eq!(v.is_accept(), c == guess, "{} guess {guess} chall {c}", stmt.name());
                }
            }
        }
    }

    #[test]
    fn signalling_answers_verify_and_leak_a() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let stmt = ss(101, &[3, 5, 9], 4);
        let sat = contradiction(101);
        for _ in 0..100 {
            let a = stmt.field().random(&mut rng);
            let (r1, audit, reveal) = signalling_answers_subset_sum(&stmt, &a, &mut rng);
            for ans in [P2Response::Audit(audit.clone()), P2Response::Reveal(reveal.clone())] {
                assert!(subset_sum::verify_round(&stmt, &a, &r1, ans.challenge(), &ans).is_accept());
            }
            assert_eq!(subset_sum::extract_secret(&stmt, &audit, &reveal).unwrap(), Extraction::Secret(a.clone()));

            let (r1, cons, ones) = signalling_answers_three_sat(&sat, &a, &mut rng);
            for ans in [SatP2Response::Consistency(cons.clone()), SatP2Response::Ones(ones.clone())] {
                assert!(three_sat::verify_round(&sat, &a, &r1, ans.challenge(), &ans).is_accept());
            }
            assert_eq!(three_sat::extract_secret(&sat, &cons, &ones).unwrap(), Extraction::Secret(a));
        }
    }
}
