use std::collections::HashMap;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use zkmip_core::adversary::cheating_parties;
use zkmip_core::session::{
    byte_accounting, honest_parties, isolation_check, run_protocol, PartyId, SharedState, Statement, Witness,
};
use zkmip_core::subset_sum::{self, SubsetSum, SubsetSumInstance, SubsetSumWitness};
use zkmip_core::three_sat::{Assignment, Cnf3, Literal, ThreeSat};
use zkmip_core::wire::Payload;
use zkmip_core::zk_sim::{self, DetVerifier, Mode, VerifierStrategy};
use zkmip_core::{Challenge, Field};

fn tiny_subset_sum() -> (Statement, Witness) {
    let field = Field::from_u64(5).unwrap();
    let inst = SubsetSumInstance::from_u64(&[1, 2], 3).unwrap();
    (Statement::SubsetSum(SubsetSum::new(field, inst).unwrap()), Witness::SubsetSum(SubsetSumWitness(vec![true, true])))
}

fn tiny_three_sat() -> (Statement, Witness) {
    let phi = Cnf3::new(1, vec![[Literal::neg(1), Literal::pos(1), Literal::neg(1)]]).unwrap();
    (Statement::ThreeSat(ThreeSat::new(Field::from_u64(5).unwrap(), phi)), Witness::ThreeSat(Assignment(vec![true])))
}

#[test]
fn exact_distance_zero_for_every_strategy() {
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    for (stmt, wit) in [tiny_subset_sum(), tiny_three_sat()] {
        for v in zk_sim::verifier_family() {
            let d = zk_sim::check_distribution(&stmt, &wit, &v, Mode::Exact, &mut rng).unwrap();
            match d {
                zk_sim::Distance::Exact { tv, .. } => assert_eq!(tv, Ratio::from_integer(0), "{} {v:?}", stmt.name()),
                other => panic!("unexpected {other:?}"),
            }
        }
    }
}

#[test]
fn honest_commitments_are_uniform_for_every_a() {
    // Enumerate every shared state; for each a the commitment histogram is flat.
    let (stmt, wit) = tiny_subset_sum();
    let field = stmt.field().clone();
    for a in 0..5 {
        let v = DetVerifier::Fixed { a, chall: Challenge::Audit };
        let mut counts: HashMap<Vec<u8>, u32> = HashMap::new();
        for c in 0..625u32 {
            for z in 0..4u32 {
                let digits: Vec<_> = (0..4).map(|i| field.element((c / 5u32.pow(i) % 5) as u64)).collect();
                let state = SharedState::SubsetSum(subset_sum::ProverSharedState {
                    c0: digits[..2].to_vec(),
                    c1: digits[2..].to_vec(),
                    z: vec![z & 1 == 1, z & 2 == 2],
                });
                let view = zk_sim::honest_view(&stmt, &wit, &v, &state).unwrap();
                *counts.entry(view.commit.encode()).or_default() += 1;
            }
        }
        assert_eq!(counts.len(), 625);
        assert!(counts.values().all(|&c| c == 4));
    }
}

/// Challenge = parity of the first coordinate of w0.
struct ParityOfW0;

impl VerifierStrategy for ParityOfW0 {
    fn pick_a(&self, field: &Field) -> zkmip_core::FieldElement {
        field.element(3)
    }

    fn pick_chall(&self, _a: &zkmip_core::FieldElement, resp1: &[zkmip_core::FieldElement]) -> Challenge {
        Challenge::from_bit(resp1[0].value().bit(0))
    }
}

#[test]
fn adaptive_challenge_keeps_distance_zero() {
    for (stmt, wit) in [tiny_subset_sum(), tiny_three_sat()] {
        assert_eq!(zk_sim::exact_distance(&stmt, &wit, &ParityOfW0).unwrap(), Ratio::from_integer(0));
    }
}

#[test]
fn sampled_distance_below_noise_floor_n5() {
    let field = Field::from_u64(1_000_003).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let (inst, wit) = subset_sum::generate_instance(5, &field, true, &mut rng).unwrap();
    let stmt = Statement::SubsetSum(SubsetSum::new(field, inst).unwrap());
    let wit = Witness::SubsetSum(wit);
    let d = zk_sim::check_distribution(
        &stmt,
        &wit,
        &DetVerifier::SumParity { a: 5 },
        Mode::Sampled { samples: 20_000 },
        &mut rng,
    )
    .unwrap();
    let zk_sim::Distance::Sampled(s) = d else { panic!("sampled") };
    assert!(s.within_noise(), "{s:?}");
}

fn session_statement() -> (Statement, Witness) {
    let field = Field::from_u64(1_000_003).unwrap();
    let inst = SubsetSumInstance::from_u64(&[5, 8, 13, 21, 34], 42).unwrap();
    (
        Statement::SubsetSum(SubsetSum::new(field, inst).unwrap()),
        Witness::SubsetSum(SubsetSumWitness(vec![false, true, true, true, false])),
    )
}

#[test]
fn session_completeness_over_many_seeds() {
    let (stmt, wit) = session_statement();
    let (p, n) = (Literal::pos, Literal::neg);
    let phi =
        Cnf3::new(5, vec![[p(3), n(2), p(5)], [n(1), n(4), n(5)], [p(1), n(2), p(5)], [p(1), p(4), p(2)]]).unwrap();
    let sat = Statement::ThreeSat(ThreeSat::new(Field::from_u64(1_000_003).unwrap(), phi));
    let sat_wit = Witness::ThreeSat(Assignment(vec![true, false, true, false, false]));
    for seed in 0..1000 {
        for (s, w) in [(&stmt, &wit), (&sat, &sat_wit)] {
            let t = run_protocol(s, &mut honest_parties(s, w, seed).unwrap(), 1).unwrap();
            assert!(t.accepted(), "seed {seed}");
        }
    }
}

#[test]
fn channel_discipline_holds_for_every_party_mix() {
    let (stmt, wit) = session_statement();
    let runs = [
        run_protocol(&stmt, &mut honest_parties(&stmt, &wit, 1).unwrap(), 30).unwrap(),
        run_protocol(&stmt, &mut cheating_parties(&stmt, Challenge::Audit, 1), 30).unwrap(),
        run_protocol(&stmt, &mut cheating_parties(&stmt, Challenge::Reveal, 1), 30).unwrap(),
    ];
    for t in &runs {
        assert!(isolation_check(t));
        for m in &t.messages {
            assert!(matches!(
                (m.from, m.to),
                (PartyId::V1, PartyId::P1)
                    | (PartyId::P1, PartyId::V1)
                    | (PartyId::V2, PartyId::P2)
                    | (PartyId::P2, PartyId::V2)
            ));
            match m.to {
                PartyId::P1 => assert!(matches!(m.payload, Payload::Query(_))),
                PartyId::P2 => assert!(matches!(m.payload, Payload::Challenge(_))),
                _ => {}
            }
        }
    }
}

#[test]
fn witnessless_acceptance_near_one_half() {
    let (stmt, _) = session_statement();
    // no subset of {5, 8, 13, 21, 34} sums to 4
    let inst = SubsetSumInstance::from_u64(&[5, 8, 13, 21, 34], 4).unwrap();
    let unsat = Statement::SubsetSum(SubsetSum::new(stmt.field().clone(), inst).unwrap());
    let rounds = 10_000u64;
    let t = run_protocol(&unsat, &mut cheating_parties(&unsat, Challenge::Audit, 99), rounds).unwrap();
    assert!(!t.accepted());
    let freq = t.accepted_rounds() as f64 / rounds as f64;
    let sigma = (0.25 / rounds as f64).sqrt();
    assert!(freq >= 0.5 - 3.0 * sigma && freq <= 0.5 + 2f64.powi(-5) + 3.0 * sigma, "{freq}");
    // audit rounds always pass, reveal rounds essentially never
    for (v, c) in t.verdicts.iter().zip(&t.challenges) {
        if *c == Challenge::Audit {
            assert!(v.is_accept());
        }
    }
    let reveal_passes =
        t.verdicts.iter().zip(&t.challenges).filter(|(v, c)| **c == Challenge::Reveal && v.is_accept()).count();
    assert!(reveal_passes <= 2);
}

#[test]
fn realized_bytes_track_the_formula() {
    let (stmt, wit) = session_statement();
    let t = run_protocol(&stmt, &mut honest_parties(&stmt, &wit, 5).unwrap(), 200).unwrap();
    let report = byte_accounting(&stmt, &t);
    let w = stmt.field().byte_width() as f64;
    let log_q = stmt.field().log2_modulus();
    for (r, &c) in t.challenges.iter().enumerate() {
        // realized transport rounds each element up to whole bytes, bits to bytes, adds a tag
        let formula_bytes = report.formula_bits_per_round[r] / 8.0;
        let realized = report.per_round[r] as f64;
        assert!(realized >= formula_bytes, "{c}");
        let elements = if c == Challenge::Audit { 1.0 + 10.0 + 10.0 } else { 1.0 + 10.0 + 1.0 };
        assert!(realized - formula_bytes <= elements * (w - log_q / 8.0) + 3.0, "{c}");
    }
    let mean = report.formula_bits_per_round.iter().sum::<f64>() / 200.0;
    let spread = (stmt.formula_bits(Challenge::Audit) - stmt.formula_bits(Challenge::Reveal)).abs() / 2.0;
    assert!((mean - report.expected_formula_bits).abs() <= spread);
    assert_eq!(report.expected_formula_bits, subset_sum::round_bits(5, log_q));
}
