//! Text formats for instances and games.
//!
//! All three formats are line oriented. Blank lines are ignored, and so is
//! everything after a `#` (Subset Sum, games) or any line starting with `c`
//! (DIMACS).
//!
//! **Subset Sum instance**
//!
//! ```text
//! subset-sum
//! n 4
//! s 3 4 9 12
//! k 16
//! q 1000003      # optional field modulus (prime)
//! v 0 1 0 1      # optional witness bits
//! ```
//!
//! The header line comes first; the keyed lines may follow in any order,
//! each at most once. `n`, `s` and `k` are required and `s` must list
//! exactly `n` positive decimal integers.
//!
//! **3-CNF** (DIMACS restricted to width 3)
//!
//! ```text
//! c comment
//! p cnf 5 4
//! 3 -2 5 0
//! -1 -4 -5 0
//! v 1 -2 3 -4 5 0   # optional assignment, one signed literal per variable
//! ```
//!
//! Clause literals may wrap across lines; every clause ends in `0` and must
//! have exactly three literals. An assignment line lists every variable once.
//!
//! **Game**
//!
//! ```text
//! game 2 2 2 2        # |I_A| |I_B| |O_A| |O_B|
//! 0 0 10 01           # x y, then one group per a with one digit per b
//! 0 1 10 01
//! 1 0 10 01
//! 1 1 01 10
//! ```
//!
//! Every `(x, y)` pair appears exactly once; digit `b` of group `a` is `1`
//! when `V(x, y, a, b)` holds.

use std::fmt::Write as _;

use num_bigint::BigUint;
use zkmip_core::games::FiniteGame;
use zkmip_core::subset_sum::{SubsetSumInstance, SubsetSumWitness};
use zkmip_core::three_sat::{Assignment, Clause, Cnf3, Literal};
use zkmip_core::Field;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, message: message.into() })
}

/// Non-blank lines with comments removed, paired with 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSumFile {
    pub instance: SubsetSumInstance,
    pub modulus: Option<Field>,
    pub witness: Option<SubsetSumWitness>,
}

fn parse_big(line: usize, token: &str) -> Result<BigUint, FormatError> {
    if !token.bytes().all(|b| b.is_ascii_digit()) {
        return err(line, format!("`{token}` is not a non-negative integer"));
    }
    BigUint::parse_bytes(token.as_bytes(), 10).map_or_else(|| err(line, format!("bad integer `{token}`")), Ok)
}

pub fn parse_subset_sum(text: &str) -> Result<SubsetSumFile, FormatError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "subset-sum")) => {}
        Some((line, _)) => return err(line, "expected header `subset-sum`"),
        None => return err(0, "empty file"),
    }
    let (mut n, mut s, mut k, mut q, mut v) = (None, None, None, None, None);
    for (line, content) in lines {
        let mut tokens = content.split_whitespace();
        let key = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        let slot_taken = match key {
            "n" | "k" | "q" if rest.len() != 1 => return err(line, format!("`{key}` takes one value")),
            "n" => n.replace((line, rest[0].parse::<usize>().or_else(|_| err(line, "bad `n`"))?)).is_some(),
            "k" => k.replace(parse_big(line, rest[0])?).is_some(),
            "q" => {
                let field = Field::new(parse_big(line, rest[0])?).or_else(|e| err(line, e.to_string()))?;
                q.replace(field).is_some()
            }
            "s" => s.replace((line, rest.iter().map(|t| parse_big(line, t)).collect::<Result<Vec<_>, _>>()?)).is_some(),
            "v" => {
                let bits = rest
                    .iter()
                    .map(|t| match *t {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        _ => err(line, format!("witness bit `{t}` is not 0 or 1")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                v.replace((line, bits)).is_some()
            }
            _ => return err(line, format!("unknown key `{key}`")),
        };
        if slot_taken {
            return err(line, format!("duplicate `{key}` line"));
        }
    }
    let Some((n_line, n)) = n else { return err(0, "missing `n` line") };
    let Some((s_line, s)) = s else { return err(0, "missing `s` line") };
    let Some(k) = k else { return err(0, "missing `k` line") };
    if s.len() != n {
        return err(s_line, format!("`s` lists {} values but n = {n}", s.len()));
    }
    let instance = SubsetSumInstance::new(s, k).or_else(|e| err(n_line, e.to_string()))?;
    let witness = match v {
        Some((line, bits)) if bits.len() != n => return err(line, format!("`v` has {} bits but n = {n}", bits.len())),
        Some((_, bits)) => Some(SubsetSumWitness(bits)),
        None => None,
    };
    Ok(SubsetSumFile { instance, modulus: q, witness })
}

pub fn render_subset_sum(file: &SubsetSumFile) -> String {
    let inst = &file.instance;
    let mut out = String::from("subset-sum\n");
    let _ = writeln!(out, "n {}", inst.len());
    let values: Vec<String> = inst.values().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "s {}", values.join(" "));
    let _ = writeln!(out, "k {}", inst.target());
    if let Some(q) = &file.modulus {
        let _ = writeln!(out, "q {}", q.modulus());
    }
    if let Some(w) = &file.witness {
        let bits: Vec<&str> = w.0.iter().map(|&b| if b { "1" } else { "0" }).collect();
        let _ = writeln!(out, "v {}", bits.join(" "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFile {
    pub formula: Cnf3,
    pub assignment: Option<Assignment>,
}

pub fn parse_dimacs(text: &str) -> Result<CnfFile, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut assignment: Option<Assignment> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('c') || content.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0] == "p" {
            if header.is_some() {
                return err(line, "duplicate problem line");
            }
            let [_, "cnf", vars, count] = tokens[..] else { return err(line, "expected `p cnf <vars> <clauses>`") };
            let vars = vars.parse().or_else(|_| err(line, "bad variable count"))?;
            let count = count.parse().or_else(|_| err(line, "bad clause count"))?;
            header = Some((vars, count));
            continue;
        }
        let Some((num_vars, _)) = header else { return err(line, "clause before the problem line") };
        let literal = |token: &str| -> Result<i64, FormatError> {
            let code: i64 = token.parse().or_else(|_| err(line, format!("bad literal `{token}`")))?;
            if code.unsigned_abs() as usize > num_vars {
                return err(line, format!("literal {code} exceeds {num_vars} variables"));
            }
            Ok(code)
        };
        if tokens[0] == "v" {
            if assignment.is_some() {
                return err(line, "duplicate assignment line");
            }
            let mut values: Vec<Option<bool>> = vec![None; num_vars];
            let mut terminated = false;
            for token in &tokens[1..] {
                let code = literal(token)?;
                if terminated {
                    return err(line, "text after the terminating 0");
                }
                if code == 0 {
                    terminated = true;
                    continue;
                }
                let slot = &mut values[code.unsigned_abs() as usize - 1];
                if slot.replace(code > 0).is_some() {
                    return err(line, format!("variable {} assigned twice", code.abs()));
                }
            }
            if !terminated {
                return err(line, "assignment must end with 0");
            }
            let Some(values) = values.into_iter().collect::<Option<Vec<bool>>>() else {
                return err(line, "assignment must set every variable");
            };
            assignment = Some(Assignment(values));
            continue;
        }
        for token in &tokens {
            let code = literal(token)?;
            match Literal::from_dimacs(code) {
                Some(lit) => pending.push(lit),
                None => {
                    let Ok(clause) = <[Literal; 3]>::try_from(pending.as_slice()) else {
                        return err(
                            line,
                            format!("clause {} has {} literals, expected 3", clauses.len() + 1, pending.len()),
                        );
                    };
                    clauses.push(clause);
                    pending.clear();
                }
            }
        }
    }
    let Some((num_vars, count)) = header else { return err(0, "missing problem line") };
    if !pending.is_empty() {
        return err(0, "last clause is not terminated by 0");
    }
    if clauses.len() != count {
        return err(0, format!("problem line declares {count} clauses, found {}", clauses.len()));
    }
    let formula = Cnf3::new(num_vars, clauses).or_else(|e| err(0, e.to_string()))?;
    Ok(CnfFile { formula, assignment })
}

pub fn render_dimacs(file: &CnfFile) -> String {
    let formula = &file.formula;
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        let _ = writeln!(out, "{} {} {} 0", clause[0].to_dimacs(), clause[1].to_dimacs(), clause[2].to_dimacs());
    }
    if let Some(a) = &file.assignment {
        let lits: Vec<String> =
            a.0.iter()
                .enumerate()
                .map(|(i, &b)| if b { format!("{}", i + 1) } else { format!("-{}", i + 1) })
                .collect();
        let _ = writeln!(out, "v {} 0", lits.join(" "));
    }
    out
}

pub fn parse_game(text: &str) -> Result<FiniteGame, FormatError> {
    let mut lines = content_lines(text);
    let Some((hline, header)) = lines.next() else { return err(0, "empty file") };
    let sizes: Vec<usize> = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["game", ia, ib, oa, ob] => [ia, ib, oa, ob]
            .iter()
            .map(|t| t.parse::<usize>().ok().filter(|&v| v > 0))
            .collect::<Option<Vec<_>>>()
            .map_or_else(|| err(hline, "alphabet sizes must be positive integers"), Ok)?,
        _ => return err(hline, "expected `game <|I_A|> <|I_B|> <|O_A|> <|O_B|>`"),
    };
    let [ia, ib, oa, ob] = sizes[..] else { unreachable!("four sizes parsed") };
    let cells = ia.checked_mul(ib).and_then(|v| v.checked_mul(oa)).and_then(|v| v.checked_mul(ob));
    if cells.is_none_or(|c| c > 1 << 24) {
        return err(hline, "game table too large");
    }
    let mut rows: Vec<Option<Vec<bool>>> = vec![None; ia * ib];
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 + oa {
            return err(line, format!("expected `x y` and {oa} output groups"));
        }
        let x: usize = tokens[0].parse().ok().filter(|&x| x < ia).map_or_else(|| err(line, "bad x"), Ok)?;
        let y: usize = tokens[1].parse().ok().filter(|&y| y < ib).map_or_else(|| err(line, "bad y"), Ok)?;
        let mut row = Vec::with_capacity(oa * ob);
        for group in &tokens[2..] {
            if group.len() != ob {
                return err(line, format!("group `{group}` should have {ob} digits"));
            }
            for c in group.chars() {
                row.push(match c {
                    '0' => false,
                    '1' => true,
                    _ => return err(line, format!("`{c}` is not 0 or 1")),
                });
            }
        }
        if rows[x * ib + y].replace(row).is_some() {
            return err(line, format!("duplicate row for x={x} y={y}"));
        }
    }
    let mut table = Vec::with_capacity(ia * ib * oa * ob);
    for (i, row) in rows.into_iter().enumerate() {
        let Some(row) = row else { return err(0, format!("missing row for x={} y={}", i / ib, i % ib)) };
        table.extend(row);
    }
    FiniteGame::new(ia, ib, oa, ob, table).or_else(|e| err(0, e.to_string()))
}

pub fn render_game(game: &FiniteGame) -> String {
    let [ia, ib, oa, ob] = game.sizes();
    let mut out = String::new();
    let _ = writeln!(out, "game {ia} {ib} {oa} {ob}");
    for x in 0..ia {
        for y in 0..ib {
            let _ = write!(out, "{x} {y}");
            for a in 0..oa {
                out.push(' ');
                out.extend((0..ob).map(|b| if game.value_at(x, y, a, b) { '1' } else { '0' }));
            }
            out.push('\n');
        }
    }
    out
}
