use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use zkmip_core::adversary::{self, SoundnessReport};
use zkmip_core::games::{self, FiniteGame};
use zkmip_core::session::{
    byte_accounting, honest_parties, isolation_check, run_protocol, PartyId, Statement, Transcript, Witness,
};
use zkmip_core::subset_sum::{self, SubsetSum, SubsetSumInstance, SubsetSumWitness};
use zkmip_core::three_sat::{self, Assignment, Cnf3, Literal, ThreeSat};
use zkmip_core::zk_sim::{self, DetVerifier, Distance, Mode};
use zkmip_core::{Challenge, Field, Verdict};

use crate::cli::{
    AttackArgs, BenchArgs, Cli, Command, GameCheckArgs, GenArgs, InstanceArgs, Protocol, ProveArgs, StrategyArg,
    ZkCheckArgs,
};
use crate::export::{report_tsv, transcript_tsv};
use crate::formats::{self, CnfFile, FormatError, SubsetSumFile};

/// Soundness target used for default round counts.
pub const TARGET_EXPONENT: u32 = 100;

/// Stream of the run seed reserved for instance generation, so instances
/// never share randomness with the parties.
const INSTANCE_STREAM: u64 = 0x696e_7374;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// What a command prints, what it exports, and whether it passed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub export: Vec<(String, String)>,
    pub pass: bool,
}

impl Report {
    fn line(&mut self, text: impl AsRef<str>) {
        self.text.push_str(text.as_ref());
        self.text.push('\n');
    }

    /// Prints `label value` aligned and exports `key value`.
    fn row(&mut self, label: &str, key: &str, value: impl ToString) {
        let value = value.to_string();
        self.line(format!("{label:<22}{value}"));
        self.kv(key, value);
    }

    /// Prints a grouped number with an optional unit and exports it plain.
    fn num(&mut self, label: &str, key: &str, value: f64, decimals: usize, unit: &str) {
        self.line(format!("{label:<22}{}{unit}", grouped(value, decimals)));
        self.kv(key, format!("{value:.decimals$}"));
    }

    fn kv(&mut self, key: &str, value: impl ToString) {
        self.export.push((key.to_string(), value.to_string()));
    }

    /// Exit status: 0 pass, 1 fail.
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let (report, export) = match &cli.command {
        Command::Gen(a) => (cmd_gen(a)?, &a.common.export),
        Command::Prove(a) => (cmd_prove(a)?, &a.common.export),
        Command::Attack(a) => (cmd_attack(a)?, &a.common.export),
        Command::Bench(a) => (cmd_bench(a)?, &a.common.export),
        Command::GameCheck(a) => (cmd_game_check(a)?, &a.common.export),
        Command::ZkCheck(a) => (cmd_zk_check(a)?, &a.common.export),
    };
    if let Some(path) = export {
        write_file(path, &report_tsv(&report.export))?;
    }
    Ok(report)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn format_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Format { path: path.to_path_buf(), source }
}

fn instance_rng(seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(INSTANCE_STREAM);
    rng
}

/// `1234567.5` with `decimals = 1` becomes `1,234,567.5`.
pub fn grouped(value: f64, decimals: usize) -> String {
    let text = format!("{value:.decimals$}");
    let (int, frac) = text.split_once('.').map_or((text.as_str(), None), |(i, f)| (i, Some(f)));
    let (sign, digits) = int.strip_prefix('-').map_or(("", int), |d| ("-", d));
    let mut out = String::from(sign);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    if let Some(f) = frac {
        out.push('.');
        out.push_str(f);
    }
    out
}

fn parse_modulus(text: &Option<String>) -> Result<Option<Field>, CliError> {
    text.as_deref().map(|t| Field::from_decimal(t).map_err(|e| usage(format!("--modulus: {e}")))).transpose()
}

/// A statement, its witness if known, and whether its modulus meets the
/// bound for the requested K.
pub struct Loaded {
    pub stmt: Statement,
    pub witness: Option<Witness>,
    pub meets_bound: bool,
}

fn subset_sum_statement(
    instance: SubsetSumInstance,
    field: Option<Field>,
    k: u32,
) -> Result<(Statement, bool), CliError> {
    let bound = subset_sum::choose_params(instance.len(), k, &instance.total()).map_err(|e| usage(e.to_string()))?;
    let (field, meets) = match field {
        Some(f) => {
            let meets = f.modulus() >= bound.modulus();
            (f, meets)
        }
        None => (bound, true),
    };
    let ss = SubsetSum::new(field, instance).map_err(|e| usage(e.to_string()))?;
    Ok((Statement::SubsetSum(ss), meets))
}

fn three_sat_statement(formula: Cnf3, field: Option<Field>, k: u32) -> Result<(Statement, bool), CliError> {
    let bound = three_sat::choose_params(formula.num_clauses(), k).map_err(|e| usage(e.to_string()))?;
    let (field, meets) = match field {
        Some(f) => {
            let meets = f.modulus() >= bound.modulus();
            (f, meets)
        }
        None => (bound, true),
    };
    Ok((Statement::ThreeSat(ThreeSat::new(field, formula)), meets))
}

fn default_n(protocol: Protocol) -> usize {
    match protocol {
        Protocol::SubsetSum => 20,
        Protocol::ThreeSat => 10,
    }
}

/// Loads `--instance` or generates one with a planted witness.
pub fn load_instance(args: &InstanceArgs, seed: u64) -> Result<Loaded, CliError> {
    let modulus = parse_modulus(&args.modulus)?;
    match (args.protocol, &args.instance) {
        (Protocol::SubsetSum, Some(path)) => {
            let file = formats::parse_subset_sum(&read_file(path)?).map_err(format_err(path))?;
            let (stmt, meets_bound) = subset_sum_statement(file.instance, modulus.or(file.modulus), args.k)?;
            Ok(Loaded { stmt, witness: file.witness.map(Witness::SubsetSum), meets_bound })
        }
        (Protocol::ThreeSat, Some(path)) => {
            let file = formats::parse_dimacs(&read_file(path)?).map_err(format_err(path))?;
            let (stmt, meets_bound) = three_sat_statement(file.formula, modulus, args.k)?;
            Ok(Loaded { stmt, witness: file.assignment.map(Witness::ThreeSat), meets_bound })
        }
        (Protocol::SubsetSum, None) => {
            let (file, _) = generate_subset_sum(args, true, seed)?;
            let witness = file.witness.clone().map(Witness::SubsetSum);
            let (stmt, meets_bound) = subset_sum_statement(file.instance, file.modulus, args.k)?;
            Ok(Loaded { stmt, witness, meets_bound })
        }
        (Protocol::ThreeSat, None) => {
            let file = generate_three_sat(args, seed)?;
            let witness = file.assignment.clone().map(Witness::ThreeSat);
            let (stmt, meets_bound) = three_sat_statement(file.formula, modulus, args.k)?;
            Ok(Loaded { stmt, witness, meets_bound })
        }
    }
}

fn generate_subset_sum(args: &InstanceArgs, nonempty: bool, seed: u64) -> Result<(SubsetSumFile, Field), CliError> {
    let n = args.n.unwrap_or(default_n(Protocol::SubsetSum));
    let field = match parse_modulus(&args.modulus)? {
        Some(f) => f,
        None => subset_sum::choose_params(n, args.k, &BigUint::zero()).map_err(|e| usage(e.to_string()))?,
    };
    let (instance, witness) = subset_sum::generate_instance(n, &field, nonempty, &mut instance_rng(seed))
        .map_err(|e| usage(e.to_string()))?;
    Ok((SubsetSumFile { instance, modulus: Some(field.clone()), witness: Some(witness) }, field))
}

fn generate_three_sat(args: &InstanceArgs, seed: u64) -> Result<CnfFile, CliError> {
    let n = args.n.unwrap_or(default_n(Protocol::ThreeSat));
    let m = args.m.unwrap_or(4 * n);
    if n == 0 || m == 0 {
        return Err(usage("3SAT needs --n >= 1 and --m >= 1"));
    }
    let (formula, assignment) = three_sat::random_satisfiable(n, m, &mut instance_rng(seed));
    Ok(CnfFile { formula, assignment: Some(assignment) })
}

fn describe(report: &mut Report, stmt: &Statement) {
    let field = stmt.field();
    report.row("protocol", "protocol", stmt.name());
    match stmt {
        Statement::SubsetSum(s) => {
            report.row("n", "n", s.n());
        }
        Statement::ThreeSat(s) => {
            report.row("variables", "n", s.formula().num_vars());
            report.row("clauses", "m", s.formula().num_clauses());
        }
    }
    report.row("log2 Q", "log2_q", format!("{:.6}", field.log2_modulus()));
}

// ---------------------------------------------------------------- gen

fn cmd_gen(args: &GenArgs) -> Result<Report, CliError> {
    if args.inst.instance.is_some() {
        return validate(&args.inst);
    }
    let text = match args.inst.protocol {
        Protocol::SubsetSum => {
            formats::render_subset_sum(&generate_subset_sum(&args.inst, args.nonempty, args.common.seed)?.0)
        }
        Protocol::ThreeSat => formats::render_dimacs(&generate_three_sat(&args.inst, args.common.seed)?),
    };
    let mut report = Report { pass: true, ..Report::default() };
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            report.line(format!("wrote {}", path.display()));
        }
        None => report.text = text,
    }
    Ok(report)
}

/// `gen --instance`: checks the file's witness.
fn validate(args: &InstanceArgs) -> Result<Report, CliError> {
    let path = args.instance.as_deref().expect("checked by caller");
    let text = read_file(path)?;
    let mut report = Report::default();
    let problem = match args.protocol {
        Protocol::SubsetSum => {
            let file = formats::parse_subset_sum(&text).map_err(format_err(path))?;
            match file.witness {
                None => Some("no witness line".to_string()),
                Some(w) if file.instance.is_solution(&w.0) => None,
                Some(_) => Some("witness does not sum to the target".to_string()),
            }
        }
        Protocol::ThreeSat => {
            let file = formats::parse_dimacs(&text).map_err(format_err(path))?;
            match file.assignment {
                None => Some("no assignment line".to_string()),
                Some(a) => three_sat::witness_positions(&file.formula, &a).err().map(|e| e.to_string()),
            }
        }
    };
    match problem {
        None => {
            report.line("valid");
            report.pass = true;
        }
        Some(why) => report.line(format!("invalid: {why}")),
    }
    report.kv("valid", report.pass);
    Ok(report)
}

// ---------------------------------------------------------------- prove

fn challenge_name(c: Challenge) -> &'static str {
    match c {
        Challenge::Audit => "audit",
        Challenge::Reveal => "reveal",
    }
}

fn write_transcript(path: &Option<PathBuf>, t: &Transcript) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, &transcript_tsv(t)),
        None => Ok(()),
    }
}

fn cmd_prove(args: &ProveArgs) -> Result<Report, CliError> {
    let seed = args.common.seed;
    let loaded = load_instance(&args.inst, seed)?;
    let stmt = &loaded.stmt;
    let k = args.inst.k;
    let rounds = match args.rounds {
        Some(r) => r,
        None => subset_sum::rounds_needed(k, TARGET_EXPONENT).map_err(|e| usage(e.to_string()))?,
    };
    let (mut parties, provers) = match (&loaded.witness, args.witnessless) {
        (Some(w), false) => (
            honest_parties(stmt, w, seed).map_err(|e| usage(format!("instance and witness do not match: {e}")))?,
            "honest",
        ),
        _ => (adversary::cheating_parties(stmt, Challenge::Audit, seed), "witnessless (answer-audit)"),
    };
    let t = run_protocol(stmt, &mut parties, rounds).map_err(|e| usage(e.to_string()))?;
    write_transcript(&args.transcript_out, &t)?;

    let mut report = Report::default();
    describe(&mut report, stmt);
    report.row("K", "K", k);
    report.row("provers", "provers", provers);
    report.row("rounds", "rounds", rounds);
    report.line("");
    let bytes = byte_accounting(stmt, &t);
    for (r, (verdict, chall)) in t.verdicts.iter().zip(&t.challenges).enumerate() {
        let outcome = match verdict {
            Verdict::Accept => "accept".to_string(),
            Verdict::Reject(why) => format!("reject: {why}"),
        };
        report.line(format!("round {r:>5}  {:<6}  {:>9} B  {outcome}", challenge_name(*chall), bytes.per_round[r]));
    }
    report.line("");
    summarize_transcript(&mut report, stmt, &t);
    let accepted = t.accepted();
    if accepted && loaded.meets_bound {
        report.row("soundness error", "soundness_bits", format!("<= 2^-{:.1}", subset_sum::soundness_bits(k, rounds)));
    } else if accepted {
        report.row("soundness error", "soundness_bits", "no claim: modulus below the bound for K");
    }
    report.row("verdict", "verdict", if accepted { "ACCEPT" } else { "REJECT" });
    report.pass = accepted;
    Ok(report)
}

fn summarize_transcript(report: &mut Report, stmt: &Statement, t: &Transcript) {
    let bytes = byte_accounting(stmt, t);
    let rounds = t.verdicts.len().max(1) as f64;
    report.row("accepted rounds", "accepted_rounds", format!("{}/{}", t.accepted_rounds(), t.verdicts.len()));
    report.row("bytes total", "bytes_total", bytes.total);
    for id in PartyId::ALL {
        report.row(&format!("  sent by {id}"), &format!("bytes_{id}"), bytes.sent_by[id.index()]);
    }
    report.num("bits/round realized", "bits_per_round_realized", bytes.total as f64 * 8.0 / rounds, 1, "");
    let formula: f64 = bytes.formula_bits_per_round.iter().sum::<f64>() / rounds;
    report.num("bits/round formula", "bits_per_round_formula", formula, 1, "");
    report.row("isolation audit", "isolation", if isolation_check(t) { "ok" } else { "VIOLATED" });
}

// ---------------------------------------------------------------- attack

/// Built-in tiny instances for exhaustive search: no subset of {1, 2} sums
/// to 4, and `x1 AND NOT x1` written as two 3-clauses.
fn tiny_unsatisfiable(protocol: Protocol) -> Statement {
    match protocol {
        Protocol::SubsetSum => {
            let inst = SubsetSumInstance::from_u64(&[1, 2], 4).expect("positive values");
            Statement::SubsetSum(SubsetSum::new(Field::from_u64(11).expect("prime"), inst).expect("fits"))
        }
        Protocol::ThreeSat => {
            let (p, n) = (Literal::pos(1), Literal::neg(1));
            let formula = Cnf3::new(1, vec![[p, p, p], [n, n, n]]).expect("one variable");
            Statement::ThreeSat(ThreeSat::new(Field::from_u64(3).expect("prime"), formula))
        }
    }
}

fn cmd_attack(args: &AttackArgs) -> Result<Report, CliError> {
    if args.strategy == StrategyArg::Exhaustive {
        return exhaustive(args);
    }
    let seed = args.common.seed;
    let stmt = load_instance(&args.inst, seed)?.stmt;
    let guess = match args.strategy {
        StrategyArg::AnswerAudit => Challenge::Audit,
        _ => Challenge::Reveal,
    };
    let mut parties = adversary::cheating_parties(&stmt, guess, seed);
    let t = run_protocol(&stmt, &mut parties, args.rounds).map_err(|e| usage(e.to_string()))?;
    write_transcript(&args.transcript_out, &t)?;

    let mut report = Report::default();
    describe(&mut report, &stmt);
    report.row("strategy", "strategy", adversary::strategy_guess_chall(&stmt, guess, [0; 32]).label);
    report.row("rounds", "rounds", args.rounds);
    report.line("");
    report.line(format!("{:<10}{:>10}{:>10}{:>12}", "challenge", "rounds", "accepted", "frequency"));
    for c in Challenge::BOTH {
        let (total, ok) = t
            .verdicts
            .iter()
            .zip(&t.challenges)
            .filter(|(_, &ch)| ch == c)
            .fold((0u64, 0u64), |(n, a), (v, _)| (n + 1, a + v.is_accept() as u64));
        let freq = if total == 0 { 0.0 } else { ok as f64 / total as f64 };
        report.line(format!("{:<10}{total:>10}{ok:>10}{freq:>12.4}", challenge_name(c)));
        report.kv(&format!("rounds_{}", challenge_name(c)), total);
        report.kv(&format!("accepted_{}", challenge_name(c)), ok);
    }
    let n = args.rounds as f64;
    let freq = t.accepted_rounds() as f64 / n;
    let sigma = (0.25 / n).sqrt();
    let (lo, hi) = (0.5 - 3.0 * sigma, 0.5 + (-(args.inst.k as f64)).exp2() + 3.0 * sigma);
    report.line(format!("{:<10}{:>10}{:>10}{freq:>12.4}", "all", args.rounds, t.accepted_rounds()));
    report.line("");
    report.row("acceptance", "acceptance", format!("{freq:.4}"));
    report.row("expected window", "window", format!("[{lo:.4}, {hi:.4}]"));
    report.row("within window", "within_window", if (lo..=hi).contains(&freq) { "yes" } else { "no" });
    report.row("isolation audit", "isolation", if isolation_check(&t) { "ok" } else { "VIOLATED" });
    let accepted = t.accepted();
    report.row("verdict", "verdict", if accepted { "ACCEPT" } else { "REJECT" });
    report.pass = !accepted;
    Ok(report)
}

fn exhaustive(args: &AttackArgs) -> Result<Report, CliError> {
    let stmt = match &args.inst.instance {
        Some(_) => load_instance(&args.inst, args.common.seed)?.stmt,
        None => tiny_unsatisfiable(args.inst.protocol),
    };
    let (result, satisfiable) = match &stmt {
        Statement::SubsetSum(s) => {
            (adversary::exhaustive_soundness_subset_sum(s), s.instance().solve_brute_force().is_some())
        }
        Statement::ThreeSat(s) => {
            if s.formula().num_vars() > 20 {
                return Err(usage("exhaustive search needs a formula with at most 20 variables"));
            }
            (adversary::exhaustive_soundness_three_sat(s), s.formula().solve_brute_force().is_some())
        }
    };
    let SoundnessReport { value, p2_strategies } = result.map_err(|e| usage(e.to_string()))?;
    let mut report = Report::default();
    describe(&mut report, &stmt);
    report.row("satisfiable", "satisfiable", if satisfiable { "yes" } else { "no" });
    report.row("P2 strategies", "p2_strategies", p2_strategies);
    report.row("best acceptance", "value", format!("{}/{}", value.numer(), value.denom()));
    report.row("  as decimal", "value_decimal", format!("{:.6}", *value.numer() as f64 / *value.denom() as f64));
    if let Statement::SubsetSum(s) = &stmt {
        let q = s.field().modulus().to_f64().unwrap_or(f64::INFINITY);
        report.row(
            "entangled bound",
            "entangled_bound",
            format!("{:.6}", adversary::subset_sum_soundness_bound(s.n(), q)),
        );
    }
    report.pass = *value.numer() < *value.denom();
    Ok(report)
}

// ---------------------------------------------------------------- bench

fn cmd_bench(args: &BenchArgs) -> Result<Report, CliError> {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let inst =
        InstanceArgs { protocol: args.protocol, instance: None, n: Some(args.n), m: args.m, k: args.k, modulus: None };
    let loaded = load_instance(&inst, args.common.seed)?;
    let stmt = &loaded.stmt;
    let rounds = subset_sum::rounds_needed(args.k, TARGET_EXPONENT).ok();

    // Run honest rounds until both challenges have been seen.
    let witness = loaded.witness.as_ref().expect("generated with a witness");
    let mut parties = honest_parties(stmt, witness, args.common.seed).map_err(|e| usage(e.to_string()))?;
    let mut wire = [None::<u64>; 2];
    let mut t = Transcript::default();
    for batch in 0..16 {
        t = run_protocol(stmt, &mut parties, 4 * (batch + 1)).map_err(|e| usage(e.to_string()))?;
        let per_round = byte_accounting(stmt, &t).per_round;
        for (c, b) in t.challenges.iter().zip(&per_round) {
            wire[c.bit() as usize].get_or_insert(*b);
        }
        if wire.iter().all(Option::is_some) {
            break;
        }
    }
    let [Some(audit_bytes), Some(reveal_bytes)] = wire else {
        return Err(usage("honest rounds never drew both challenges"));
    };
    if !t.accepted() {
        return Err(usage("honest rounds were rejected"));
    }

    let bits = stmt.expected_formula_bits();
    let wire_avg = (audit_bytes + reveal_bytes) as f64 / 2.0;
    let mut report = Report { pass: true, ..Report::default() };
    describe(&mut report, stmt);
    report.row("K", "K", args.k);
    report.num("bits/round formula", "bits_per_round", bits, 1, "");
    report.num("  audit", "bits_audit", stmt.formula_bits(Challenge::Audit), 1, "");
    report.num("  reveal", "bits_reveal", stmt.formula_bits(Challenge::Reveal), 1, "");
    report.row("KB/round formula", "kb_per_round", format!("{:.1}", bits / 8.0 / 1000.0));
    report.num("bytes/round wire", "bytes_per_round", wire_avg, 1, "");
    report.num("  audit", "bytes_audit", audit_bytes as f64, 0, "");
    report.num("  reveal", "bytes_reveal", reveal_bytes as f64, 0, "");
    match rounds {
        Some(rounds) => {
            report.row(&format!("rounds for 2^-{TARGET_EXPONENT}"), "rounds", rounds);
            report.num("total formula", "total_mb", bits * rounds as f64 / 8.0 / 1e6, 2, " MB");
            report.num("total wire", "total_mb_wire", wire_avg * rounds as f64 / 1e6, 2, " MB");
        }
        None => report.row(&format!("rounds for 2^-{TARGET_EXPONENT}"), "rounds", "none: single-round error is 1"),
    }
    if args.throughput {
        let (ops, secs) = field_throughput(stmt.field(), args.common.seed);
        let rate = grouped(ops as f64 / secs, 0);
        let bits = stmt.field().bit_length();
        report.line(format!("{:<22}{rate} mul/s at {bits} bits (varies between runs)", "field throughput"));
    }
    Ok(report)
}

fn field_throughput(field: &Field, seed: u64) -> (u64, f64) {
    let mut rng = instance_rng(seed);
    let xs = field.random_vec(1024, &mut rng);
    let mut acc = field.one();
    let start = Instant::now();
    let mut ops = 0u64;
    while ops < 200_000 || start.elapsed().as_secs_f64() < 0.2 {
        for x in &xs {
            acc = &acc * x;
        }
        ops += xs.len() as u64;
    }
    std::hint::black_box(acc);
    (ops, start.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------- game-check

fn ratio(v: &games::Value) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

fn cmd_game_check(args: &GameCheckArgs) -> Result<Report, CliError> {
    let mut report = Report::default();
    if let Some(path) = &args.instance {
        let game = formats::parse_game(&read_file(path)?).map_err(format_err(path))?;
        let [ia, ib, oa, ob] = game.sizes();
        report.row("sizes", "sizes", format!("{ia} {ib} {oa} {ob}"));
        report.row("projectivity", "projectivity", games::projectivity(&game));
        if ib == 2 {
            let check = games::check_coupling_inequality(&game).map_err(|e| usage(e.to_string()))?;
            report.row("value", "value", ratio(&check.value));
            report.row("coupled value", "coupled_value", ratio(&check.coupled_value));
            report.row("2w - 1 <= w_coup", "holds", if check.holds { "yes" } else { "no" });
            report.pass = check.holds;
        } else {
            let value = games::classical_value(&game).map_err(|e| usage(e.to_string()))?;
            let coup = games::coupled_game(&game).map_err(|e| usage(e.to_string()))?;
            let coupled = games::classical_value(&coup.game).map_err(|e| usage(e.to_string()))?;
            report.row("value", "value", ratio(&value));
            report.row("coupled value", "coupled_value", ratio(&coupled));
            report.line("inequality check skipped: Bob needs exactly two inputs");
            report.pass = true;
        }
        return Ok(report);
    }
    let count = args.random.expect("clap requires --instance or --random");
    let mut rng = instance_rng(args.common.seed);
    let (mut holds, mut tight) = (0usize, 0usize);
    for _ in 0..count {
        let game = FiniteGame::random([2, 2, 2, 2], &mut rng).map_err(|e| usage(e.to_string()))?;
        let check = games::check_coupling_inequality(&game).map_err(|e| usage(e.to_string()))?;
        holds += check.holds as usize;
        tight += (check.value * 2 == check.coupled_value + 1) as usize;
    }
    report.line(format!("{holds}/{count} random binary games satisfy 2w - 1 <= w_coup"));
    report.line(format!("{tight}/{count} with equality"));
    report.kv("games", count);
    report.kv("satisfied", holds);
    report.kv("tight", tight);
    report.pass = holds == count;
    Ok(report)
}

// ---------------------------------------------------------------- zk-check

fn verifier_label(v: &DetVerifier) -> String {
    match *v {
        DetVerifier::Fixed { a, chall } => format!("fixed a={a} chall={chall}"),
        DetVerifier::FirstParity { a } => format!("first-parity a={a}"),
        DetVerifier::SumParity { a } => format!("sum-parity a={a}"),
        DetVerifier::UpperHalf { a } => format!("upper-half a={a}"),
    }
}

/// Built-in instances over `Q = 5` with witnesses.
fn tiny_satisfiable(protocol: Protocol) -> (Statement, Witness) {
    let field = Field::from_u64(5).expect("prime");
    match protocol {
        Protocol::SubsetSum => {
            let inst = SubsetSumInstance::from_u64(&[1, 2], 3).expect("positive values");
            let stmt = Statement::SubsetSum(SubsetSum::new(field, inst).expect("fits"));
            (stmt, Witness::SubsetSum(SubsetSumWitness(vec![true, true])))
        }
        Protocol::ThreeSat => {
            let formula =
                Cnf3::new(1, vec![[Literal::neg(1), Literal::pos(1), Literal::neg(1)]]).expect("one variable");
            (Statement::ThreeSat(ThreeSat::new(field, formula)), Witness::ThreeSat(Assignment(vec![true])))
        }
    }
}

fn cmd_zk_check(args: &ZkCheckArgs) -> Result<Report, CliError> {
    let (stmt, witness) = match &args.instance {
        None => tiny_satisfiable(args.protocol),
        Some(path) => {
            let inst = InstanceArgs {
                protocol: args.protocol,
                instance: Some(path.clone()),
                n: None,
                m: None,
                k: 1,
                modulus: args.modulus.clone(),
            };
            let loaded = load_instance(&inst, args.common.seed)?;
            let witness = loaded.witness.ok_or_else(|| usage("zk-check needs an instance with a witness"))?;
            (loaded.stmt, witness)
        }
    };
    let mode = match args.samples {
        None => Mode::Exact,
        Some(s) => Mode::Sampled { samples: usize::try_from(s).map_err(|_| usage("--samples too large"))? },
    };
    let mut rng = ChaCha20Rng::seed_from_u64(args.common.seed);
    let mut report = Report::default();
    describe(&mut report, &stmt);
    let family = zk_sim::verifier_family();
    report.row("verifiers", "verifiers", family.len());
    report.line("");
    let mut passed = 0;
    let mut worst = 0.0f64;
    for v in &family {
        let distance =
            zk_sim::check_distribution(&stmt, &witness, v, mode, &mut rng).map_err(|e| usage(e.to_string()))?;
        let (ok, text) = match &distance {
            Distance::Exact { tv, atoms } => {
                let shown = if tv.numer() == &0 { "0".to_string() } else { format!("{}/{}", tv.numer(), tv.denom()) };
                (tv.numer() == &0, format!("TV = {shown} (exact, {} atoms)", grouped(*atoms as f64, 0)))
            }
            Distance::Sampled(s) => (
                s.within_noise(),
                format!(
                    "TV = {:.5} (sampled, {} samples, noise floor {:.5})",
                    s.tv,
                    grouped(s.samples as f64, 0),
                    s.noise_floor
                ),
            ),
        };
        worst = worst.max(distance.value());
        passed += ok as usize;
        let mut line = String::new();
        let _ = write!(line, "{:<24}{text}", verifier_label(v));
        report.line(line);
    }
    report.line("");
    report.row("within tolerance", "passed", format!("{passed}/{}", family.len()));
    report.kv("max_tv", format!("{worst}"));
    report.pass = passed == family.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_grouping() {
        assert_eq!(grouped(289_682.5, 1), "289,682.5");
        assert_eq!(grouped(999.0, 0), "999");
        assert_eq!(grouped(1000.0, 0), "1,000");
        assert_eq!(grouped(-1_234_567.25, 2), "-1,234,567.25");
        assert_eq!(grouped(0.5, 1), "0.5");
    }

    #[test]
    fn tiny_instances_have_the_advertised_satisfiability() {
        for p in [Protocol::SubsetSum, Protocol::ThreeSat] {
            match tiny_unsatisfiable(p) {
                Statement::SubsetSum(s) => assert!(s.instance().solve_brute_force().is_none()),
                Statement::ThreeSat(s) => assert!(s.formula().solve_brute_force().is_none()),
            }
            let (stmt, w) = tiny_satisfiable(p);
            assert!(honest_parties(&stmt, &w, 0).is_ok());
        }
    }
}
