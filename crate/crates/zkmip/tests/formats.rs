use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use zkmip::export::{parse_transcript, transcript_tsv};
use zkmip::formats::{
    parse_dimacs, parse_game, parse_subset_sum, render_dimacs, render_game, render_subset_sum, CnfFile, SubsetSumFile,
};
use zkmip_core::adversary::cheating_parties;
use zkmip_core::games::FiniteGame;
use zkmip_core::session::{byte_accounting, honest_parties, run_protocol, Statement, Witness};
use zkmip_core::subset_sum::{choose_params, generate_instance, SubsetSum};
use zkmip_core::three_sat::{random_formula, random_satisfiable, ThreeSat};
use zkmip_core::{Challenge, Field};

#[test]
fn generated_instances_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for n in 1..40 {
        let field = choose_params(n, 3, &0u32.into()).unwrap();
        let (instance, witness) = generate_instance(n, &field, rng.gen(), &mut rng).unwrap();
        let file = SubsetSumFile { instance, modulus: Some(field), witness: rng.gen::<bool>().then_some(witness) };
        assert_eq!(parse_subset_sum(&render_subset_sum(&file)).unwrap(), file);

        let m = rng.gen_range(1..60);
        let (formula, assignment) = random_satisfiable(n, m, &mut rng);
        let file = CnfFile { formula, assignment: Some(assignment) };
        assert_eq!(parse_dimacs(&render_dimacs(&file)).unwrap(), file);
        let file = CnfFile { formula: random_formula(n, m, &mut rng), assignment: None };
        assert_eq!(parse_dimacs(&render_dimacs(&file)).unwrap(), file);
    }
}

#[test]
fn random_games_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..100 {
        let sizes = [rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..5)];
        let game = FiniteGame::random(sizes, &mut rng).unwrap();
        assert_eq!(parse_game(&render_game(&game)).unwrap(), game);
    }
}

#[test]
fn shipped_data_files_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    assert_eq!(parse_game(&read("chsh.game")).unwrap(), FiniteGame::chsh());
    let phi = parse_dimacs(&read("phi_prime.cnf")).unwrap();
    assert_eq!((phi.formula.num_vars(), phi.formula.num_clauses()), (5, 4));
    assert!(zkmip_core::three_sat::evaluate(&phi.formula, phi.assignment.as_ref().unwrap()).unwrap());
    let small = parse_subset_sum(&read("small.ss")).unwrap();
    assert!(small.instance.is_solution(&small.witness.unwrap().0));
    let unsat = parse_subset_sum(&read("unsat_q11.ss")).unwrap();
    assert!(unsat.instance.solve_brute_force().is_none());
    assert_eq!(unsat.modulus.unwrap(), Field::from_u64(11).unwrap());
}

fn check_export(stmt: &Statement, witness: Option<&Witness>, rounds: u64) {
    let mut parties = match witness {
        Some(w) => honest_parties(stmt, w, 3).unwrap(),
        None => cheating_parties(stmt, Challenge::Reveal, 3),
    };
    let t = run_protocol(stmt, &mut parties, rounds).unwrap();
    let text = transcript_tsv(&t);
    assert_eq!(text.lines().count(), t.messages.len());
    let parsed = parse_transcript(stmt, &text).unwrap();
    assert_eq!(parsed.len(), t.messages.len());
    for (p, m) in parsed.iter().zip(&t.messages) {
        assert_eq!((p.round, p.from, p.to, p.step), (m.round, m.from, m.to, m.step));
        assert_eq!(p.payload, m.payload);
        assert_eq!(p.byte_len, m.byte_len());
    }
    let total: usize = parsed.iter().map(|p| p.byte_len).sum();
    assert_eq!(total as u64, byte_accounting(stmt, &t).total);
}

#[test]
fn transcript_export_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let field = choose_params(9, 4, &0u32.into()).unwrap();
    let (inst, w) = generate_instance(9, &field, true, &mut rng).unwrap();
    let stmt = Statement::SubsetSum(SubsetSum::new(field, inst).unwrap());
    check_export(&stmt, Some(&Witness::SubsetSum(w)), 20);
    check_export(&stmt, None, 20);

    let (formula, a) = random_satisfiable(6, 13, &mut rng);
    let stmt = Statement::ThreeSat(ThreeSat::new(zkmip_core::three_sat::choose_params(13, 3).unwrap(), formula));
    check_export(&stmt, Some(&Witness::ThreeSat(a)), 20);
    check_export(&stmt, None, 20);
}

#[test]
fn corrupted_transcripts_are_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let field = choose_params(4, 2, &0u32.into()).unwrap();
    let (inst, w) = generate_instance(4, &field, true, &mut rng).unwrap();
    let stmt = Statement::SubsetSum(SubsetSum::new(field, inst).unwrap());
    let t = run_protocol(&stmt, &mut honest_parties(&stmt, &Witness::SubsetSum(w), 0).unwrap(), 2).unwrap();
    let text = transcript_tsv(&t);
    let first = text.lines().next().unwrap();
    let mut fields: Vec<String> = first.split('\t').map(String::from).collect();
    let cases = [
        (1, "X9".to_string(), "unknown party"),
        (3, "shout".to_string(), "unknown step"),
        (4, "zz".to_string(), "Invalid character"),
        (5, "999".to_string(), "length 999"),
        (4, format!("{}00", fields[4]), "length"),
    ];
    for (idx, value, needle) in cases {
        let saved = std::mem::replace(&mut fields[idx], value);
        let e = parse_transcript(&stmt, &fields.join("\t")).unwrap_err();
        assert!(e.to_string().contains(needle), "{idx}: {e}");
        fields[idx] = saved;
    }
    assert!(parse_transcript(&stmt, "1\t2\t3").unwrap_err().to_string().contains("6 fields"));
}
