//! Shared oracles for the integration tests.
#![allow(dead_code)]

use rand::Rng as _;
use tlns::milp::{evaluate_objective, MilpBuilder, MilpInstance, Sense, Solution};
use tlns::rng::Rng;

/// Minimum of `c'x` over all binary points that satisfy every row and
/// `accept`. Enumerates in Gray-code order with incremental row activities,
/// so it assumes a pure-binary instance with `n <= 24`.
pub fn brute_force(inst: &MilpInstance, accept: impl Fn(&[f64]) -> bool) -> Option<Solution> {
    let n = inst.n();
    assert!(n <= 24, "enumeration over 2^{n} points");
    assert!(inst.is_integer().iter().all(|&b| b));
    assert!(inst.lower().iter().all(|&l| l == 0.0) && inst.upper().iter().all(|&u| u == 1.0));
    let m = inst.m();
    let violated = |r: usize, a: f64| inst.sense()[r].violation(a, inst.rhs()[r]) > 1e-9;
    let mut x = vec![0.0; n];
    let mut act = vec![0.0; m];
    let mut n_violated = (0..m).filter(|&r| violated(r, 0.0)).count();
    let mut obj = 0.0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for step in 0u64..(1u64 << n) {
        if step > 0 {
            let i = step.trailing_zeros() as usize;
            let delta = if x[i] == 0.0 { 1.0 } else { -1.0 };
            x[i] += delta;
            obj += inst.obj()[i] * delta;
            let (rows, vals) = inst.matrix().col(i);
            for (&r, &a) in rows.iter().zip(vals) {
                let before = violated(r, act[r]);
                act[r] += a * delta;
                let after = violated(r, act[r]);
                match (before, after) {
                    (true, false) => n_violated -= 1,
                    (false, true) => n_violated += 1,
                    _ => {}
                }
            }
        }
        if n_violated == 0 && best.as_ref().map_or(true, |(b, _)| obj < *b - 1e-9) && accept(&x) {
            best = Some((obj, x.clone()));
        }
    }
    best.map(|(_, x)| {
        let objective = evaluate_objective(inst, &x).unwrap();
        Solution { x, objective }
    })
}

pub fn hamming(a: &[f64], b: &[f64]) -> usize {
    a.iter()
        .zip(b)
        .filter(|(u, v)| (*u - *v).abs() > 0.5)
        .count()
}

/// Random pure-binary instance with integer coefficients in `[-3, 3]`,
/// mixed row senses, and a planted feasible point returned alongside.
pub fn random_instance(rng: &mut Rng, n: usize, m: usize) -> (MilpInstance, Solution) {
    let xbar: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
    let mut b = MilpBuilder::new("random");
    for _ in 0..n {
        b.add_binary(f64::from(rng.gen_range(-5..=5i8)));
    }
    for _ in 0..m {
        let k = rng.gen_range(1..=n.min(6));
        let cols = rand::seq::index::sample(rng, n, k).into_vec();
        let row: Vec<(usize, f64)> = cols
            .into_iter()
            .map(|c| {
                let mut a = f64::from(rng.gen_range(-3..=3i8));
                if a == 0.0 {
                    a = 1.0;
                }
                (c, a)
            })
            .collect();
        let act: f64 = row.iter().map(|&(c, a)| a * xbar[c]).sum();
        match rng.gen_range(0..5u8) {
            0 => b.add_row(row, Sense::Eq, act),
            1 | 2 => b.add_row(row, Sense::Le, act + f64::from(rng.gen_range(0..3u8))),
            _ => b.add_row(row, Sense::Ge, act - f64::from(rng.gen_range(0..3u8))),
        };
    }
    let inst = b.build().unwrap();
    let sol = Solution::new(&inst, xbar).unwrap();
    (inst, sol)
}

/// Same model with variables reordered so that new variable `k` is old
/// variable `perm[k]`, and rows reordered by `row_perm` likewise.
pub fn permute(inst: &MilpInstance, perm: &[usize], row_perm: &[usize]) -> MilpInstance {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    let mut b = MilpBuilder::new(inst.name());
    for &p in perm {
        b.add_var(
            inst.obj()[p],
            inst.lower()[p],
            inst.upper()[p],
            inst.is_integer()[p],
        );
    }
    for &r in row_perm {
        let (cols, vals) = inst.matrix().row(r);
        let row = cols.iter().zip(vals).map(|(&c, &a)| (inv[c], a)).collect();
        b.add_row(row, inst.sense()[r], inst.rhs()[r]);
    }
    b.build().unwrap()
}

use tlns::engine::{EventKind, Layer, LnsParams, RunLog};
use tlns::milp::{check_feasibility, FEAS_TOL};

fn expected_growth(r: usize, eta: f64) -> usize {
    (eta * r as f64 - 1e-9).ceil() as usize
}

/// Checks a run log against the LNS / two-layer LNS contract: every incumbent
/// is feasible and strictly better than the previous one, neighborhoods grow
/// by `ceil(eta * r)` (capped) only after failures, and each loop stops after
/// exactly `count_limit` failures unless the budget ran out first.
/// `inner` is `Some` for two-layer runs. Returns a description of the first
/// breach.
pub fn check_run_contract(
    inst: &MilpInstance,
    log: &RunLog,
    outer: &LnsParams,
    inner: Option<&LnsParams>,
) -> Result<(), String> {
    let n_int = inst.n_integer();
    let mut last_obj = f64::INFINITY;
    for (k, e) in log.incumbents().enumerate() {
        let sol = e
            .solution
            .as_ref()
            .ok_or_else(|| format!("incumbent {k} carries no solution"))?;
        let report = check_feasibility(inst, &sol.x, FEAS_TOL).map_err(|e| e.to_string())?;
        if !report.feasible {
            return Err(format!(
                "incumbent {k} violates the model by {:e}",
                report.max_violation
            ));
        }
        let value = evaluate_objective(inst, &sol.x).unwrap();
        if (value - e.objective).abs() > 1e-6 * value.abs().max(1.0) {
            return Err(format!(
                "incumbent {k} logs {} but evaluates to {value}",
                e.objective
            ));
        }
        if !(e.objective < last_obj) {
            return Err(format!(
                "incumbent {k} objective {} does not improve on {last_obj}",
                e.objective
            ));
        }
        last_obj = e.objective;
    }
    let budget_out = log
        .events
        .last()
        .map_or(false, |e| e.elapsed >= outer.time_limit);

    match inner {
        None => {
            let mut r = outer.r.min(n_int);
            let mut fails = 0;
            for e in log.events.iter().skip(1) {
                if e.layer != Layer::Single {
                    return Err(format!("plain run logged a {:?} event", e.layer));
                }
                match e.kind {
                    EventKind::NeighborhoodGrown => {
                        let want = expected_growth(r, outer.eta).min(n_int);
                        if e.r_current != want {
                            return Err(format!("r grew {r} -> {}, expected {want}", e.r_current));
                        }
                        r = want;
                        fails += 1;
                    }
                    _ => {
                        if e.r_current != r {
                            return Err(format!("r changed to {} without a failure", e.r_current));
                        }
                    }
                }
            }
            if fails > outer.count_limit {
                return Err(format!("{fails} failures exceed C = {}", outer.count_limit));
            }
            if fails < outer.count_limit && !budget_out {
                return Err(format!("stopped after {fails} failures with budget left"));
            }
            if log.iterations != log.sub_solves {
                return Err("plain LNS should solve once per iteration".into());
            }
        }
        Some(inner) => {
            let mut r1 = outer.r.min(n_int);
            let mut outer_iters = 0;
            // Inner loop state: start r, current r, cap once observed, failures.
            let mut r2: Option<usize> = None;
            let mut fails = 0;
            let mut capped: Option<usize> = None;
            let close_inner = |fails: usize, last: bool| -> Result<(), String> {
                if fails > inner.count_limit {
                    return Err(format!(
                        "inner loop failed {fails} times, C = {}",
                        inner.count_limit
                    ));
                }
                if fails < inner.count_limit && !(last && budget_out) {
                    return Err(format!(
                        "inner loop ended after {fails} failures with budget left"
                    ));
                }
                Ok(())
            };
            let events: Vec<_> = log.events.iter().skip(1).collect();
            for (idx, e) in events.iter().enumerate() {
                match e.layer {
                    Layer::Single => return Err("two-layer run logged a plain event".into()),
                    Layer::Inner => {
                        let r = match r2 {
                            Some(r) => r,
                            None => {
                                // The inner loop starts at min(inner.r, n_int of the
                                // reduced problem); the latter is not logged.
                                let start = if e.kind == EventKind::NeighborhoodGrown {
                                    inner.r
                                } else {
                                    e.r_current
                                };
                                if start > inner.r {
                                    return Err(format!(
                                        "inner loop started at r = {start} > {}",
                                        inner.r
                                    ));
                                }
                                if start < inner.r {
                                    capped = Some(start);
                                }
                                start
                            }
                        };
                        let mut r_next = r;
                        if e.kind == EventKind::NeighborhoodGrown {
                            let want = expected_growth(r, inner.eta);
                            let ok = e.r_current == want
                                || (e.r_current < want
                                    && e.r_current >= r
                                    && capped.map_or(true, |c| c == e.r_current));
                            if !ok {
                                return Err(format!(
                                    "inner r grew {r} -> {}, expected {want}",
                                    e.r_current
                                ));
                            }
                            if e.r_current < want {
                                capped = Some(e.r_current);
                            }
                            r_next = e.r_current;
                            fails += 1;
                        } else if e.r_current != r {
                            return Err(format!(
                                "inner r changed {r} -> {} without a failure",
                                e.r_current
                            ));
                        }
                        r2 = Some(r_next);
                    }
                    Layer::Outer => match e.kind {
                        EventKind::NeighborhoodGrown => {
                            let want = expected_growth(r1, outer.eta).min(n_int);
                            if e.r_current != want {
                                return Err(format!(
                                    "outer r grew {r1} -> {}, expected {want}",
                                    e.r_current
                                ));
                            }
                            r1 = want;
                        }
                        EventKind::IterationEnd => {
                            if e.r_current != r1 {
                                return Err(format!(
                                    "outer r changed to {} without a failure",
                                    e.r_current
                                ));
                            }
                            close_inner(fails, idx + 1 == events.len())?;
                            outer_iters += 1;
                            r2 = None;
                            capped = None;
                            fails = 0;
                        }
                        EventKind::Incumbent => {
                            return Err("outer layer logged an incumbent".into())
                        }
                    },
                }
            }
            if r2.is_some() && !budget_out {
                return Err("trailing inner events without an outer iteration end".into());
            }
            if outer_iters != log.iterations {
                return Err(format!(
                    "{outer_iters} outer iteration ends but {} iterations counted",
                    log.iterations
                ));
            }
        }
    }
    Ok(())
}
