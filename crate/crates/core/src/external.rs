//! Adapter for third-party MILP solvers that read LP-format files.
//!
//! The adapter writes the model as an LP file, runs a user-supplied command
//! template, and parses a `name value` solution file. It is never used by
//! default. Command templates substitute `{lp}`, `{sol}` and `{time}`, for
//! example `gurobi_cl TimeLimit={time} ResultFile={sol} {lp}`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::bnb::{PoolEntry, SolveOptions, SolveStatus, SolverResult};
use crate::error::{Error, Result};
use crate::milp::{check_feasibility, MilpInstance, Sense, Solution, FEAS_TOL};

pub const DEFAULT_COMMAND: &str = "gurobi_cl TimeLimit={time} ResultFile={sol} {lp}";

fn var_name(i: usize) -> String {
    format!("x{i}")
}

fn fmt_coef(v: f64) -> String {
    // `{}` prints the shortest decimal that parses back to the same f64.
    format!("{v}")
}

fn write_linear(out: &mut String, terms: impl Iterator<Item = (usize, f64)>) {
    let mut first = true;
    let mut any = false;
    for (i, a) in terms {
        if a == 0.0 {
            continue;
        }
        any = true;
        let sign = if a < 0.0 { "-" } else { "+" };
        if first && a >= 0.0 {
            let _ = write!(out, " {} {}", fmt_coef(a), var_name(i));
        } else {
            let _ = write!(out, " {sign} {} {}", fmt_coef(a.abs()), var_name(i));
        }
        first = false;
    }
    if !any {
        out.push_str(" 0 x0");
    }
}

/// Renders `inst` in CPLEX LP format.
pub fn write_lp(inst: &MilpInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", inst.name());
    out.push_str("Minimize\n obj:");
    write_linear(&mut out, inst.obj().iter().copied().enumerate());
    out.push_str("\nSubject To\n");
    for j in 0..inst.m() {
        let (cols, vals) = inst.matrix().row(j);
        let _ = write!(out, " c{j}:");
        write_linear(&mut out, cols.iter().copied().zip(vals.iter().copied()));
        let op = match inst.sense()[j] {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_coef(inst.rhs()[j]));
    }
    out.push_str("Bounds\n");
    for i in 0..inst.n() {
        let (l, u) = (inst.lower()[i], inst.upper()[i]);
        let _ = writeln!(
            out,
            " {} <= {} <= {}",
            fmt_coef(l),
            var_name(i),
            fmt_coef(u)
        );
    }
    let ints = inst.integer_indices();
    if !ints.is_empty() {
        out.push_str("Binaries\n");
        for i in ints {
            let _ = writeln!(out, " {}", var_name(i));
        }
    }
    out.push_str("End\n");
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        context: format!("LP file line {line}"),
        message: message.into(),
    }
}

fn parse_var(tok: &str, line: usize) -> Result<usize> {
    tok.strip_prefix('x')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(line, format!("unknown variable `{tok}`")))
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad number `{tok}`")))
}

/// Parses `[+|-] coef var ...` pairs as written by [`write_lp`].
fn parse_terms(toks: &[&str], line: usize) -> Result<Vec<(usize, f64)>> {
    let mut terms = Vec::new();
    let mut k = 0;
    while k < toks.len() {
        let mut sign = 1.0;
        if toks[k] == "+" || toks[k] == "-" {
            if toks[k] == "-" {
                sign = -1.0;
            }
            k += 1;
        }
        if k + 1 >= toks.len() {
            return Err(parse_err(line, "dangling term"));
        }
        let a = parse_num(toks[k], line)?;
        let i = parse_var(toks[k + 1], line)?;
        if a != 0.0 {
            terms.push((i, sign * a));
        }
        k += 2;
    }
    Ok(terms)
}

/// Read-back checker for files produced by [`write_lp`]; not a general LP parser.
pub fn read_lp(text: &str, n: usize) -> Result<MilpInstance> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Rows,
        Bounds,
        Binaries,
        End,
    }
    let mut section = Section::Head;
    let mut name = String::new();
    let mut obj = vec![0.0; n];
    let mut rows = Vec::new();
    let mut sense = Vec::new();
    let mut rhs = Vec::new();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut is_integer = vec![false; n];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if let Some(rest) = t.strip_prefix('\\') {
            if name.is_empty() {
                name = rest.trim().to_string();
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        match t {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "End" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match section {
            Section::Objective => {
                for (i, a) in parse_terms(&toks[1..], line)? {
                    *obj.get_mut(i)
                        .ok_or_else(|| parse_err(line, "index out of range"))? += a;
                }
            }
            Section::Rows => {
                let n_t = toks.len();
                if n_t < 3 {
                    return Err(parse_err(line, "short constraint"));
                }
                let s = match toks[n_t - 2] {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    "=" => Sense::Eq,
                    other => return Err(parse_err(line, format!("bad sense `{other}`"))),
                };
                rows.push(parse_terms(&toks[1..n_t - 2], line)?);
                sense.push(s);
                rhs.push(parse_num(toks[n_t - 1], line)?);
            }
            Section::Bounds => match toks.as_slice() {
                [l, "<=", v, "<=", u] => {
                    let i = parse_var(v, line)?;
                    if i >= n {
                        return Err(parse_err(line, "index out of range"));
                    }
                    lower[i] = parse_num(l, line)?;
                    upper[i] = parse_num(u, line)?;
                }
                _ => return Err(parse_err(line, "unrecognized bound")),
            },
            Section::Binaries => {
                for tok in toks {
                    let i = parse_var(tok, line)?;
                    *is_integer
                        .get_mut(i)
                        .ok_or_else(|| parse_err(line, "index out of range"))? = true;
                }
            }
            Section::Head | Section::End => {
                return Err(parse_err(line, "text outside a section"));
            }
        }
    }
    if section != Section::End {
        return Err(parse_err(text.lines().count(), "missing End"));
    }
    let matrix = crate::milp::SparseMatrix::from_rows(n, rows)?;
    MilpInstance::new(name, matrix, sense, rhs, obj, lower, upper, is_integer)
}

/// Parses a `name value` solution file (lines starting with `#` are ignored).
pub fn parse_solution_file(text: &str, n: usize) -> Result<Vec<f64>> {
    let mut x = vec![0.0; n];
    let mut seen = false;
    for (k, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(name), Some(val), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse {
                context: format!("solution file line {}", k + 1),
                message: "expected `name value`".into(),
            });
        };
        let i = parse_var(name, k + 1)?;
        if i >= n {
            return Err(parse_err(k + 1, format!("variable {name} out of range")));
        }
        x[i] = parse_num(val, k + 1)?;
        seen = true;
    }
    if !seen {
        return Err(Error::Parse {
            context: "solution file".into(),
            message: "no variable values".into(),
        });
    }
    Ok(x)
}

fn scratch_path(ext: &str) -> PathBuf {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("tlns-ext-{}-{k}.{ext}", std::process::id()))
}

/// Solves `inst` with an external executable. The pool holds only the final
/// solution; status is `Feasible` whenever a solution was read back.
pub fn external_solve(
    inst: &MilpInstance,
    opts: &SolveOptions,
    command: &str,
) -> Result<SolverResult> {
    let start = Instant::now();
    let lp_path = scratch_path("lp");
    let sol_path = scratch_path("sol");
    std::fs::write(&lp_path, write_lp(inst))?;
    let time = if opts.time_limit.is_finite() {
        format!("{}", opts.time_limit)
    } else {
        "1e9".to_string()
    };
    let vars = HashMap::from([
        ("{lp}", lp_path.display().to_string()),
        ("{sol}", sol_path.display().to_string()),
        ("{time}", time),
    ]);
    let argv: Vec<String> = command
        .split_whitespace()
        .map(|tok| {
            vars.iter()
                .fold(tok.to_string(), |acc, (k, v)| acc.replace(k, v))
        })
        .collect();
    let Some((program, args)) = argv.split_first() else {
        return Err(Error::InvalidArgument("empty solver command".into()));
    };
    let mut child = match Command::new(program)
        .args(args)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => {
            let _ = std::fs::remove_file(&lp_path);
            return Err(Error::AdapterUnavailable(format!("{program}: {e}")));
        }
    };
    // Grace period on top of the solver's own limit before the process is killed.
    let hard_limit = opts.time_limit + 5.0;
    let mut timed_out = false;
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break Some(s);
        }
        if start.elapsed().as_secs_f64() > hard_limit {
            let _ = child.kill();
            let _ = child.wait();
            timed_out = true;
            break None;
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    let _ = std::fs::remove_file(&lp_path);
    if let Some(s) = status {
        if !s.success() {
            let _ = std::fs::remove_file(&sol_path);
            return Err(Error::AdapterFailed(format!("{program} exited with {s}")));
        }
    }
    let text = std::fs::read_to_string(&sol_path).ok();
    let _ = std::fs::remove_file(&sol_path);
    let elapsed = start.elapsed().as_secs_f64();
    let best = match text {
        Some(t) => {
            let mut x = parse_solution_file(&t, inst.n())?;
            for (i, v) in x.iter_mut().enumerate() {
                if inst.is_integer()[i] {
                    *v = v.round();
                }
            }
            if !check_feasibility(inst, &x, FEAS_TOL)?.feasible {
                return Err(Error::AdapterFailed(
                    "external solution violates the model".into(),
                ));
            }
            Some(Solution::new(inst, x)?)
        }
        None => None,
    };
    let status = match (&best, timed_out) {
        (Some(_), _) => SolveStatus::Feasible,
        (None, true) => SolveStatus::TimeLimit,
        (None, false) => SolveStatus::Infeasible,
    };
    Ok(SolverResult {
        status,
        dual_bound: f64::NEG_INFINITY,
        pool: best
            .iter()
            .map(|s| PoolEntry {
                elapsed,
                nodes: 0,
                solution: s.clone(),
            })
            .collect(),
        best,
        nodes: 0,
        lp_iterations: 0,
        presolve_seconds: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpBuilder;

    fn sample() -> MilpInstance {
        let mut b = MilpBuilder::new("sample");
        let x = b.add_binary(-1.5);
        let y = b.add_binary(0.1);
        let z = b.add_var(2.0, -1.0, 1e6, false);
        let w = b.add_var(0.0, -7.25, 0.1, false);
        b.add_row(vec![(x, 1.0), (y, -0.3), (z, 1e-7)], Sense::Le, 2.5);
        b.add_row(vec![(y, 1.0), (w, 1.0)], Sense::Eq, 0.0);
        b.add_row(vec![(x, 1.0 / 3.0)], Sense::Ge, -4.0);
        b.build().unwrap()
    }

    #[test]
    fn lp_roundtrip_is_exact() {
        let inst = sample();
        let text = write_lp(&inst);
        assert!(text.contains("Subject To") && text.contains("Binaries"));
        let back = read_lp(&text, inst.n()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn missing_executable() {
        let err = external_solve(
            &sample(),
            &SolveOptions::default(),
            "definitely-not-a-solver-binary {lp}",
        )
        .unwrap_err();
        assert!(matches!(err, Error::AdapterUnavailable(_)));
    }

    #[test]
    fn solution_file_parsing() {
        let x = parse_solution_file("# Objective value = 3\nx0 1\nx2 0.5\n", 3).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.5]);
        assert!(parse_solution_file("x9 1\n", 3).is_err());
        assert!(parse_solution_file("# empty\n", 3).is_err());
    }
}
