//! Finite two-player games, their classical values, and the coupled game in
//! which Bob must answer two distinct questions at once.
//!
//! Values are exact rationals. Only deterministic strategies are searched:
//! shared randomness is a convex mixture of them and cannot raise a maximum.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::{Rng, RngCore};

use crate::field::log2_biguint;

/// Largest `|O_A|^|I_A| * |O_B|^|I_B|` the exhaustive search accepts.
pub const MAX_STRATEGIES: u128 = 1 << 24;

pub type Value = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("alphabet sizes must be non-empty")]
    EmptyAlphabet,
    #[error("valuation table has {actual} entries, expected {expected}")]
    TableSize { expected: usize, actual: usize },
    #[error("strategy space of {0} exceeds the exhaustive-search limit")]
    TooLarge(u128),
    #[error("coupling needs at least two Bob inputs, got {0}")]
    TooFewBobInputs(usize),
    #[error("the rewinding inequality is only stated for two Bob inputs, got {0}")]
    NotBinaryBob(usize),
    #[error("strategy does not match the game's alphabets")]
    BadStrategy,
}

/// A game `(I_A, I_B, O_A, O_B, V)` with questions drawn uniformly.
///
/// Alphabets are `0..size`; `V` is stored row-major in `(x, y, a, b)` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGame {
    alice_inputs: usize,
    bob_inputs: usize,
    alice_outputs: usize,
    bob_outputs: usize,
    table: Vec<bool>,
}

impl FiniteGame {
    pub fn new(
        alice_inputs: usize,
        bob_inputs: usize,
        alice_outputs: usize,
        bob_outputs: usize,
        table: Vec<bool>,
    ) -> Result<Self, GameError> {
        if alice_inputs == 0 || bob_inputs == 0 || alice_outputs == 0 || bob_outputs == 0 {
            return Err(GameError::EmptyAlphabet);
        }
        let expected = alice_inputs * bob_inputs * alice_outputs * bob_outputs;
        if table.len() != expected {
            return Err(GameError::TableSize { expected, actual: table.len() });
        }
        Ok(FiniteGame { alice_inputs, bob_inputs, alice_outputs, bob_outputs, table })
    }

    pub fn from_fn(
        alice_inputs: usize,
        bob_inputs: usize,
        alice_outputs: usize,
        bob_outputs: usize,
        mut valuation: impl FnMut(usize, usize, usize, usize) -> bool,
    ) -> Result<Self, GameError> {
        let mut table = Vec::with_capacity(alice_inputs * bob_inputs * alice_outputs * bob_outputs);
        for x in 0..alice_inputs {
            for y in 0..bob_inputs {
                for a in 0..alice_outputs {
                    for b in 0..bob_outputs {
                        table.push(valuation(x, y, a, b));
                    }
                }
            }
        }
        Self::new(alice_inputs, bob_inputs, alice_outputs, bob_outputs, table)
    }

    /// CHSH: win iff `a XOR b == x AND y`.
    pub fn chsh() -> Self {
        Self::from_fn(2, 2, 2, 2, |x, y, a, b| (a ^ b) == (x & y)).expect("static sizes")
    }

    pub fn constant(sizes: [usize; 4], value: bool) -> Result<Self, GameError> {
        Self::from_fn(sizes[0], sizes[1], sizes[2], sizes[3], |_, _, _, _| value)
    }

    /// Uniformly random valuation table.
    pub fn random<R: RngCore + ?Sized>(sizes: [usize; 4], rng: &mut R) -> Result<Self, GameError> {
        Self::from_fn(sizes[0], sizes[1], sizes[2], sizes[3], |_, _, _, _| rng.gen_bool(0.5))
    }

    /// `[|I_A|, |I_B|, |O_A|, |O_B|]`
    pub fn sizes(&self) -> [usize; 4] {
        [self.alice_inputs, self.bob_inputs, self.alice_outputs, self.bob_outputs]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn value_at(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        let idx = ((x * self.bob_inputs + y) * self.alice_outputs + a) * self.bob_outputs + b;
        self.table[idx]
    }

    /// Number of deterministic strategy pairs.
    pub fn strategy_count(&self) -> u128 {
        let side = |outputs: usize, inputs: usize| -> u128 {
            (0..inputs).try_fold(1u128, |acc, _| acc.checked_mul(outputs as u128)).unwrap_or(u128::MAX)
        };
        side(self.alice_outputs, self.alice_inputs).saturating_mul(side(self.bob_outputs, self.bob_inputs))
    }

    /// Same game with every alphabet relabelled by the given permutations.
    pub fn relabel(&self, perms: [&[usize]; 4]) -> Self {
        let [px, py, pa, pb] = perms;
        let mut table = vec![false; self.table.len()];
        let [ia, ib, oa, ob] = self.sizes();
        for (x, &qx) in px.iter().enumerate().take(ia) {
            for (y, &qy) in py.iter().enumerate().take(ib) {
                for (a, &qa) in pa.iter().enumerate().take(oa) {
                    for (b, &qb) in pb.iter().enumerate().take(ob) {
                        let idx = ((qx * ib + qy) * oa + qa) * ob + qb;
                        table[idx] = self.value_at(x, y, a, b);
                    }
                }
            }
        }
        FiniteGame { table, ..self.clone() }
    }
}

/// A pair of deterministic response functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

/// Winning probability of a fixed deterministic strategy.
pub fn strategy_value(game: &FiniteGame, strategy: &DetStrategy) -> Result<Value, GameError> {
    let [ia, ib, oa, ob] = game.sizes();
    if strategy.alice.len() != ia
        || strategy.bob.len() != ib
        || strategy.alice.iter().any(|&a| a >= oa)
        || strategy.bob.iter().any(|&b| b >= ob)
    {
        return Err(GameError::BadStrategy);
    }
    let mut wins = 0u64;
    for x in 0..ia {
        for y in 0..ib {
            wins += game.value_at(x, y, strategy.alice[x], strategy.bob[y]) as u64;
        }
    }
    Ok(Ratio::new(wins, (ia * ib) as u64))
}

/// Advances a mixed-radix counter; returns false once it wraps.
fn next_assignment(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Optimal deterministic strategy and its value.
///
/// Enumerates the side with fewer strategies; the other side best-responds
/// question by question, which is exact because the objective separates over
/// that player's inputs once the opponent is fixed.
pub fn optimal_strategy(game: &FiniteGame) -> Result<(Value, DetStrategy), GameError> {
    let count = game.strategy_count();
    if count > MAX_STRATEGIES {
        return Err(GameError::TooLarge(count));
    }
    let [ia, ib, oa, ob] = game.sizes();
    let alice_space = (oa as u128).pow(ia as u32);
    let bob_space = (ob as u128).pow(ib as u32);
    let enumerate_bob = bob_space <= alice_space;

    let mut best_wins = 0u64;
    let mut best: Option<DetStrategy> = None;
    let (fixed_len, fixed_radix) = if enumerate_bob { (ib, ob) } else { (ia, oa) };
    let mut fixed = vec![0usize; fixed_len];
    loop {
        let mut wins = 0u64;
        let mut response = Vec::with_capacity(if enumerate_bob { ia } else { ib });
        if enumerate_bob {
            for x in 0..ia {
                let (arg, score) = (0..oa)
                    .map(|a| (a, (0..ib).filter(|&y| game.value_at(x, y, a, fixed[y])).count() as u64))
                    .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                wins += score;
                response.push(arg);
            }
        } else {
            for y in 0..ib {
                let (arg, score) = (0..ob)
                    .map(|b| (b, (0..ia).filter(|&x| game.value_at(x, y, fixed[x], b)).count() as u64))
                    .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                wins += score;
                response.push(arg);
            }
        }
        if best.is_none() || wins > best_wins {
            best_wins = wins;
            best = Some(if enumerate_bob {
                DetStrategy { alice: response, bob: fixed.clone() }
            } else {
                DetStrategy { alice: fixed.clone(), bob: response }
            });
        }
        if !next_assignment(&mut fixed, fixed_radix) {
            break;
        }
    }
    let strategy = best.expect("at least one strategy");
    Ok((Ratio::new(best_wins, (ia * ib) as u64), strategy))
}

/// Classical value `omega(G)`: the best deterministic winning probability.
pub fn classical_value(game: &FiniteGame) -> Result<Value, GameError> {
    optimal_strategy(game).map(|(v, _)| v)
}

/// Brute force over both players' full strategy spaces. Test oracle for
/// [`classical_value`]; only usable on very small games.
pub fn classical_value_naive(game: &FiniteGame) -> Result<Value, GameError> {
    let count = game.strategy_count();
    if count > MAX_STRATEGIES {
        return Err(GameError::TooLarge(count));
    }
    let [ia, ib, oa, ob] = game.sizes();
    let mut alice = vec![0usize; ia];
    let mut best = Ratio::new(0, 1);
    loop {
        let mut bob = vec![0usize; ib];
        loop {
            let v = strategy_value(game, &DetStrategy { alice: alice.clone(), bob: bob.clone() })?;
            if v > best {
                best = v;
            }
            if !next_assignment(&mut bob, ob) {
                break;
            }
        }
        if !next_assignment(&mut alice, oa) {
            break;
        }
    }
    Ok(best)
}

/// `G_coup`: Bob gets an ordered pair `(y, y')` with `y != y'` and answers
/// `(b, b')`; the players win iff both `V(x,y,a,b)` and `V(x,y',a,b')` hold.
///
/// Bob's pair input `i` is `pairs[i]`, his output `(b, b')` is encoded as
/// `b * |O_B| + b'`.
#[derive(Debug, Clone)]
pub struct CoupGame {
    pub base: FiniteGame,
    pub pairs: Vec<(usize, usize)>,
    pub game: FiniteGame,
}

pub fn coupled_game(base: &FiniteGame) -> Result<CoupGame, GameError> {
    let [ia, ib, oa, ob] = base.sizes();
    if ib < 2 {
        return Err(GameError::TooFewBobInputs(ib));
    }
    let pairs: Vec<(usize, usize)> =
        (0..ib).flat_map(|y| (0..ib).filter(move |&y2| y2 != y).map(move |y2| (y, y2))).collect();
    let game = FiniteGame::from_fn(ia, pairs.len(), oa, ob * ob, |x, p, a, bb| {
        let (y, y2) = pairs[p];
        base.value_at(x, y, a, bb / ob) && base.value_at(x, y2, a, bb % ob)
    })?;
    Ok(CoupGame { base: base.clone(), pairs, game })
}

/// Largest number of winning Bob outputs for any fixed `(x, y, a)`.
pub fn projectivity(game: &FiniteGame) -> usize {
    let [ia, ib, oa, ob] = game.sizes();
    let mut best = 0;
    for x in 0..ia {
        for y in 0..ib {
            for a in 0..oa {
                best = best.max((0..ob).filter(|&b| game.value_at(x, y, a, b)).count());
            }
        }
    }
    best
}

/// Coupled-game strategy obtained by running Bob separately on each half of
/// his question pair.
pub fn rewind_strategy(coup: &CoupGame, strategy: &DetStrategy) -> DetStrategy {
    let ob = coup.base.sizes()[3];
    let bob = coup.pairs.iter().map(|&(y, y2)| strategy.bob[y] * ob + strategy.bob[y2]).collect();
    DetStrategy { alice: strategy.alice.clone(), bob }
}

/// Outcome of checking `2*omega(G) - 1 <= omega(G_coup)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingCheck {
    pub value: Value,
    pub coupled_value: Value,
    pub holds: bool,
}

/// Checks the classical rewinding inequality with exact arithmetic. Requires
/// a two-element Bob input set.
pub fn check_coupling_inequality(game: &FiniteGame) -> Result<CouplingCheck, GameError> {
    let ib = game.sizes()[1];
    if ib != 2 {
        return Err(GameError::NotBinaryBob(ib));
    }
    let value = classical_value(game)?;
    let coup = coupled_game(game)?;
    let coupled_value = classical_value(&coup.game)?;
    // 2w - 1 <= w_c, rearranged to stay non-negative.
    let holds = value * 2 <= coupled_value + 1;
    Ok(CouplingCheck { value, coupled_value, holds })
}

/// Upper bound on the entangled value of an `S`-projective game implied by
/// a bound on its coupled game:
/// `omega* <= 1/|I_B| + (64 * S * omega*_coup)^(1/3)`.
///
/// `S` and the coupled bound `num/den` may be astronomically large, so the
/// cube-root term is evaluated in the log domain.
pub fn entangled_value_bound(
    projectivity: &BigUint,
    bob_inputs: u64,
    coupled_numer: &BigUint,
    coupled_denom: &BigUint,
) -> f64 {
    let base = 1.0 / bob_inputs as f64;
    let log_term = 6.0 + log2_biguint(projectivity) + log2_biguint(coupled_numer) - log2_biguint(coupled_denom);
    if log_term == f64::NEG_INFINITY {
        return base;
    }
    base + libm::exp2(log_term / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn constant_games() {
        let one = FiniteGame::constant([2, 3, 2, 4], true).unwrap();
        let zero = FiniteGame::constant([2, 3, 2, 4], false).unwrap();
        assert_eq!(classical_value(&one).unwrap(), Ratio::from_integer(1));
        assert_eq!(classical_value(&zero).unwrap(), Ratio::from_integer(0));
        assert_eq!(projectivity(&one), 4);
        assert_eq!(projectivity(&zero), 0);
    }

    #[test]
    fn chsh_values() {
        let g = FiniteGame::chsh();
        assert_eq!(classical_value(&g).unwrap(), Ratio::new(3, 4));
        assert_eq!(classical_value_naive(&g).unwrap(), Ratio::new(3, 4));
        assert_eq!(projectivity(&g), 1);
        let coup = coupled_game(&g).unwrap();
        assert_eq!(coup.pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(classical_value(&coup.game).unwrap(), Ratio::new(1, 2));
        let check = check_coupling_inequality(&g).unwrap();
        assert!(check.holds);
        assert_eq!(check.coupled_value, Ratio::new(1, 2));
    }

    #[test]
    fn coupled_pairs_for_three_inputs() {
        let g = FiniteGame::constant([1, 3, 1, 2], true).unwrap();
        let coup = coupled_game(&g).unwrap();
        assert_eq!(coup.pairs.len(), 6);
        assert!(coup.pairs.iter().all(|(y, y2)| y != y2));
        assert_eq!(
            coupled_game(&FiniteGame::constant([1, 1, 1, 1], true).unwrap()).unwrap_err(),
            GameError::TooFewBobInputs(1)
        );
    }

    #[test]
    fn rewinding_optimal_chsh() {
        let g = FiniteGame::chsh();
        let (v, s) = optimal_strategy(&g).unwrap();
        assert_eq!(strategy_value(&g, &s).unwrap(), v);
        let coup = coupled_game(&g).unwrap();
        let rewound = rewind_strategy(&coup, &s);
        assert!(strategy_value(&coup.game, &rewound).unwrap() >= Ratio::new(1, 2));

        let one = FiniteGame::constant([2, 2, 2, 2], true).unwrap();
        let coup = coupled_game(&one).unwrap();
        let s = DetStrategy { alice: vec![0, 0], bob: vec![1, 1] };
        assert_eq!(strategy_value(&coup.game, &rewind_strategy(&coup, &s)).unwrap(), Ratio::one());
    }

    #[test]
    fn rewinding_never_loses_more_than_the_bound() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for _ in 0..200 {
            let g = FiniteGame::random([2, 2, 2, 2], &mut rng).unwrap();
            let coup = coupled_game(&g).unwrap();
            let s = DetStrategy {
                alice: (0..2).map(|_| rng.gen_range(0..2)).collect(),
                bob: (0..2).map(|_| rng.gen_range(0..2)).collect(),
            };
            let v = strategy_value(&g, &s).unwrap();
            let vc = strategy_value(&coup.game, &rewind_strategy(&coup, &s)).unwrap();
            assert!(v * 2 <= vc + 1);
        }
    }

    #[test]
    fn best_response_matches_naive_search() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for sizes in [[2, 2, 2, 2], [3, 2, 2, 3], [2, 3, 3, 2], [1, 4, 2, 2]] {
            for _ in 0..20 {
                let g = FiniteGame::random(sizes, &mut rng).unwrap();
                assert_eq!(classical_value(&g).unwrap(), classical_value_naive(&g).unwrap());
            }
        }
    }

    #[test]
    fn size_guard() {
        let g = FiniteGame::constant([4, 4, 16, 16], true).unwrap();
        assert!(matches!(classical_value(&g), Err(GameError::TooLarge(_))));
    }

    #[test]
    fn coupling_projectivity_at_most_squared() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..50 {
            let g = FiniteGame::random([2, 3, 2, 3], &mut rng).unwrap();
            let s = projectivity(&g);
            assert!(projectivity(&coupled_game(&g).unwrap().game) <= s * s);
        }
    }

    #[test]
    fn entangled_bound_examples() {
        let two = BigUint::from(2u32);
        let one = BigUint::one();
        // Perfectly uncoupled: 1/|I_B|.
        assert_eq!(entangled_value_bound(&two, 2, &BigUint::from(0u32), &one), 0.5);
        // S = 2^n, coupled value 1/Q with Q = 64 * 2^(n + 3K) gives 1/2 + 2^-K.
        for (n, k) in [(1u32, 1u32), (20, 5), (300, 5)] {
            let s = BigUint::one() << n;
            let q = BigUint::from(64u32) << (n + 3 * k);
            let bound = entangled_value_bound(&s, 2, &one, &q);
            assert!((bound - (0.5 + libm::exp2(-(k as f64)))).abs() < 1e-12, "n={n} k={k}");
        }
        // Direct formula at small numbers: S = 4, Q = 2^20.
        let q = BigUint::one() << 20u32;
        let expected = 0.5 + libm::cbrt(64.0 * 4.0 / (1u64 << 20) as f64);
        assert!((entangled_value_bound(&BigUint::from(4u32), 2, &one, &q) - expected).abs() < 1e-12);
    }
}
