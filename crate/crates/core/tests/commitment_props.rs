use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use zkmip_core::commitment::{
    combine_keys, combine_linear, commit, commit_all, double_open_attack, verify_open, CommitChallenge, CommitKey,
    Opening,
};
use zkmip_core::field::Field;

proptest! {
    #[test]
    fn homomorphic_combination(
        a in 0u64..1_000_003,
        items in prop::collection::vec((0u64..1_000_003, 0u64..1_000_003, 0u64..1_000_003), 1..8),
    ) {
        let f = Field::from_u64(1_000_003).unwrap();
        let ch = CommitChallenge(f.element(a));
        let coeffs: Vec<_> = items.iter().map(|t| f.element(t.0)).collect();
        let values: Vec<_> = items.iter().map(|t| f.element(t.1)).collect();
        let keys: Vec<_> = items.iter().map(|t| f.element(t.2)).collect();
        let ws = commit_all(&ch, &values, &keys).unwrap();
        let w = combine_linear(&coeffs, &ws).unwrap();
        let key = combine_keys(&coeffs, &keys.into_iter().map(CommitKey).collect::<Vec<_>>()).unwrap();
        // oracle: the combined value computed in u128 and reduced once
        let value = items.iter().map(|t| t.0 as u128 * t.1 as u128).sum::<u128>() % 1_000_003;
        let opening = Opening { value: f.element(value as u64), key };
        prop_assert!(verify_open(&ch, &w, &opening));
    }

    #[test]
    fn a_wrong_value_never_opens(a in 1u64..101, b in 0u64..101, c in 0u64..101, d in 1u64..101) {
        let f = Field::from_u64(101).unwrap();
        let ch = CommitChallenge(f.element(a));
        let w = commit(&ch, &f.element(b), &CommitKey(f.element(c))).unwrap();
        let other = f.element((b + d) % 101);
        // with the key fixed and a != 0, only b opens
        prop_assert!(!verify_open(&ch, &w, &Opening::new(other, f.element(c))));
    }
}

#[test]
fn double_opening_succeeds_only_on_the_right_guess() {
    let f = Field::from_u64(101).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let trials = 20_000u32;
    let mut wins = 0u32;
    for _ in 0..trials {
        let a = f.random(&mut rng);
        let guess = f.random(&mut rng);
        let ch = CommitChallenge(a.clone());
        let w = commit(&ch, &f.element(1), &CommitKey(f.random(&mut rng))).unwrap();
        let (o1, o2) = double_open_attack(&w, &f.zero(), &f.one(), &guess).unwrap();
        let both = verify_open(&ch, &w, &o1) && verify_open(&ch, &w, &o2);
        assert_eq!(both, guess == a);
        wins += both as u32;
    }
    let p = 1.0 / 101.0;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((wins as f64 - trials as f64 * p).abs() <= 5.0 * sigma, "{wins}");
}
