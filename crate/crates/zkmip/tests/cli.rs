use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use zkmip::export::parse_report;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zkmip"));
    cmd.env_remove("ZKMIP_SEED");
    cmd
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn report_value(text: &str, key: &str) -> String {
    parse_report(text).into_iter().find(|(k, _)| k == key).map(|(_, v)| v).unwrap_or_else(|| panic!("no {key}"))
}

#[test]
fn every_subcommand_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ss = data("small.ss");
    let cnf = data("phi_prime.cnf");
    let chsh = data("chsh.game");
    let commands: Vec<Vec<String>> = [
        vec!["gen", "--n", "12", "--seed", "9"],
        vec!["gen", "--protocol", "3sat", "--n", "6", "--m", "20", "--seed", "9"],
        vec!["prove", "--instance", ss.to_str().unwrap(), "--rounds", "30", "--seed", "4"],
        vec!["prove", "--protocol", "3sat", "--instance", cnf.to_str().unwrap(), "--rounds", "30", "--seed", "4"],
        vec!["prove", "--n", "8", "--witnessless", "--rounds", "30", "--seed", "4"],
        vec!["attack", "--rounds", "300", "--seed", "5"],
        vec!["attack", "--protocol", "3sat", "--strategy", "answer-reveal", "--rounds", "300", "--seed", "5"],
        vec!["attack", "--strategy", "exhaustive"],
        vec!["bench", "--n", "40", "--seed", "2"],
        vec!["game-check", "--random", "50", "--seed", "3"],
        vec!["game-check", "--instance", chsh.to_str().unwrap()],
        vec!["zk-check", "--protocol", "3sat"],
        vec!["zk-check", "--samples", "500", "--seed", "6"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for run_idx in 0..2 {
            let export = dir.path().join(format!("export-{i}-{run_idx}.tsv"));
            let transcript = dir.path().join(format!("transcript-{i}-{run_idx}.tsv"));
            let mut full: Vec<String> = args.clone();
            full.extend(["--export".into(), export.to_str().unwrap().into()]);
            if matches!(args[0].as_str(), "prove" | "attack") && args.iter().all(|a| a != "exhaustive") {
                full.extend(["--transcript-out".into(), transcript.to_str().unwrap().into()]);
            }
            let out = bin().args(&full).output().unwrap();
            assert!(out.status.code().is_some_and(|c| c <= 1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            let transcript = std::fs::read(&transcript).unwrap_or_default();
            outputs.push((out.stdout, out.status.code(), std::fs::read(&export).unwrap(), transcript));
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
        assert!(!outputs[0].0.is_empty(), "{args:?}");
    }
}

#[test]
fn seed_flag_beats_environment() {
    let with_env = |seed: &str, extra: &[&str]| {
        let mut cmd = bin();
        cmd.env("ZKMIP_SEED", seed).args(["gen", "--n", "10"]).args(extra);
        cmd.output().unwrap().stdout
    };
    let flag7 = run(&["gen", "--n", "10", "--seed", "7"]).stdout;
    let flag8 = run(&["gen", "--n", "10", "--seed", "8"]).stdout;
    assert_ne!(flag7, flag8);
    assert_eq!(with_env("7", &[]), flag7);
    assert_eq!(with_env("7", &["--seed", "8"]), flag8);
}

#[test]
fn exit_codes() {
    let ok = run(&["prove", "--n", "6", "--rounds", "20"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("verdict               ACCEPT"));

    let rejected = run(&["prove", "--n", "6", "--rounds", "40", "--witnessless"]);
    assert_eq!(rejected.status.code(), Some(1));
    assert!(stdout(&rejected).contains("REJECT"));

    for bad in [
        vec!["prove", "--rounds", "0"],
        vec!["prove", "--K", "0"],
        vec!["frobnicate"],
        vec!["game-check"],
        vec!["prove", "--instance", "/nonexistent/instance.ss"],
        vec!["bench", "--n", "0"],
        vec!["zk-check", "--modulus", "15", "--instance", data("small.ss").to_str().unwrap()],
    ] {
        let out = run(&bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(!out.stderr.is_empty(), "{bad:?}");
    }
}

#[test]
fn mismatched_witness_is_reported_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ss");
    std::fs::write(&path, "subset-sum\nn 3\ns 1 2 4\nk 5\nv 1 1 0\n").unwrap();
    let out = run(&["prove", "--instance", path.to_str().unwrap(), "--transcript-out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not match"));
}

#[test]
fn gen_writes_valid_instances() {
    let dir = tempfile::tempdir().unwrap();
    for (protocol, file) in [("subset-sum", "a.ss"), ("3sat", "a.cnf")] {
        let path = dir.path().join(file);
        let p = path.to_str().unwrap();
        let out = run(&["gen", "--protocol", protocol, "--n", "7", "--seed", "1", "--nonempty", "--out", p]);
        assert_eq!(out.status.code(), Some(0));
        let valid = run(&["gen", "--protocol", protocol, "--instance", p]);
        assert_eq!(stdout(&valid), "valid\n");
        assert_eq!(valid.status.code(), Some(0));
        let proved = run(&["prove", "--protocol", protocol, "--instance", p, "--rounds", "25"]);
        assert_eq!(proved.status.code(), Some(0), "{}", stdout(&proved));
    }
    let corrupt = dir.path().join("c.cnf");
    std::fs::write(&corrupt, "p cnf 2 1\n1 2 0\n").unwrap();
    let out = run(&["gen", "--protocol", "3sat", "--instance", corrupt.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("has 2 literals"));
}

#[test]
fn bench_reports_the_efficiency_row() {
    let dir = tempfile::tempdir().unwrap();
    let export = dir.path().join("bench.tsv");
    let out = run(&["bench", "--n", "300", "--K", "5", "--export", export.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("289,682.5"));
    assert!(!text.contains("throughput"));
    let tsv = std::fs::read_to_string(&export).unwrap();
    assert_eq!(report_value(&tsv, "bits_per_round"), "289682.5");
    assert_eq!(report_value(&tsv, "rounds"), "110");
    assert_eq!(report_value(&tsv, "total_mb"), "3.98");
    assert_eq!(report_value(&tsv, "kb_per_round"), "36.2");

    let tiny = run(&["bench", "--n", "1", "--K", "1"]);
    assert_eq!(tiny.status.code(), Some(0));
    assert!(stdout(&tiny).contains("none: single-round error is 1"));
}

#[test]
fn game_check_outputs() {
    let chsh = run(&["game-check", "--instance", data("chsh.game").to_str().unwrap()]);
    let text = stdout(&chsh);
    assert!(text.contains("value                 3/4"), "{text}");
    assert!(text.contains("coupled value         1/2"), "{text}");
    let random = run(&["game-check", "--random", "500"]);
    assert_eq!(random.status.code(), Some(0));
    assert!(stdout(&random).starts_with("500/500 random binary games satisfy"));
}

#[test]
fn zk_check_reports_exact_zero() {
    for protocol in ["subset-sum", "3sat"] {
        let out = run(&["zk-check", "--protocol", protocol]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert_eq!(text.matches("TV = 0 (exact").count(), 8, "{text}");
    }
}

#[test]
fn attack_acceptance_table() {
    let out = run(&["attack", "--rounds", "2000", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("within window         yes"), "{text}");
    let exhaustive = run(&["attack", "--strategy", "exhaustive", "--instance", data("unsat_q11.ss").to_str().unwrap()]);
    assert!(stdout(&exhaustive).contains("best acceptance       6/11"));
    let too_small = run(&[
        "attack",
        "--strategy",
        "exhaustive",
        "--instance",
        data("small.ss").to_str().unwrap(),
        "--modulus",
        "5",
    ]);
    // The set sums past Q = 5, so the statement itself is rejected.
    assert_eq!(too_small.status.code(), Some(2));
}
