//! Exact branch-and-bound for MILPs whose integer variables are binary.
//!
//! Root processing reduces fixed variables away (see [`crate::presolve`]),
//! tries the two trivial bound points, and rounds the root LP solution once.
//! The search then selects the open node with the best LP bound, plunging
//! depth-first into the floor child after every branching. Branching picks
//! the most fractional variable, smallest index on ties.

use std::cmp::Ordering as CmpOrdering;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::lp::{solve_lp_with_bounds, LpOptions, LpStatus};
use crate::milp::{check_feasibility, MilpInstance, Solution, FEAS_TOL};
use crate::presolve::{postsolve, reduce, PresolveMap};

/// Improvement a new incumbent must make over the current one.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Stop once this many improving solutions were found.
    pub solution_limit: Option<usize>,
    /// Relative gap at which the search stops with `Optimal`.
    pub gap_tol: f64,
    pub node_limit: Option<u64>,
    /// Unused by the deterministic built-in search; forwarded to external solvers.
    pub seed: u64,
    /// Only solutions with objective below `cutoff - IMPROVEMENT_TOL` are accepted.
    pub cutoff: Option<f64>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: f64::INFINITY,
            solution_limit: None,
            gap_tol: 0.0,
            node_limit: None,
            seed: 0,
            cutoff: None,
            stop: None,
        }
    }
}

impl SolveOptions {
    pub fn with_time_limit(seconds: f64) -> Self {
        Self {
            time_limit: seconds,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.time_limit > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time limit {} must be positive",
                self.time_limit
            )));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gap tolerance {} must be >= 0",
                self.gap_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Interrupted by the stop flag with a solution in hand.
    Feasible,
    Infeasible,
    TimeLimit,
    SolutionLimit,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    /// Seconds since the solve started.
    pub elapsed: f64,
    /// Nodes processed when the solution was found.
    pub nodes: u64,
    pub solution: Solution,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub best: Option<Solution>,
    pub dual_bound: f64,
    /// Every improving incumbent, in discovery order.
    pub pool: Vec<PoolEntry>,
    pub nodes: u64,
    pub lp_iterations: u64,
    /// Time spent in root reduction.
    pub presolve_seconds: f64,
}

#[derive(Debug, Clone)]
struct Node {
    bound: f64,
    seq: u64,
    /// `(reduced index, lower, upper)` changes relative to the root.
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == CmpOrdering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: smaller bound first, then older node first.
    fn cmp(&self, other: &Self) -> CmpOrdering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    original: &'a MilpInstance,
    reduced: MilpInstance,
    map: PresolveMap,
    opts: &'a SolveOptions,
    start: Instant,
    deadline: Option<Instant>,
    best_reduced: Option<Solution>,
    pool: Vec<PoolEntry>,
    integral_objective: bool,
    lp_iterations: u64,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn out_of_time(&self) -> bool {
        if let Some(stop) = &self.opts.stop {
            if stop.load(Ordering::Relaxed) {
                return true;
            }
        }
        matches!(self.deadline, Some(d) if Instant::now() >= d)
    }

    fn stopped_by_flag(&self) -> bool {
        self.opts
            .stop
            .as_ref()
            .is_some_and(|s| s.load(Ordering::Relaxed))
    }

    /// Objective threshold in reduced space that a new solution must beat.
    fn threshold(&self) -> f64 {
        let mut t = f64::INFINITY;
        if let Some(c) = self.opts.cutoff {
            t = c - self.map.objective_offset;
        }
        if let Some(best) = &self.best_reduced {
            t = t.min(best.objective);
        }
        t
    }

    fn can_prune(&self, bound: f64) -> bool {
        let t = self.threshold();
        if !t.is_finite() {
            return false;
        }
        let bound = if self.integral_objective {
            (bound - FEAS_TOL).ceil()
        } else {
            bound
        };
        let slack = IMPROVEMENT_TOL.max(self.opts.gap_tol * t.abs().max(1.0));
        bound >= t - slack
    }

    /// Offers an integral reduced-space point; returns true when accepted.
    fn offer(&mut self, mut y: Vec<f64>) -> Result<bool> {
        for (i, v) in y.iter_mut().enumerate() {
            if self.reduced.is_integer()[i] {
                *v = v.round();
            }
        }
        if !check_feasibility(&self.reduced, &y, FEAS_TOL)?.feasible {
            return Ok(false);
        }
        let sol = Solution::new(&self.reduced, y)?;
        if sol.objective >= self.threshold() - IMPROVEMENT_TOL {
            return Ok(false);
        }
        let full = postsolve(&self.reduced, &sol, &self.map)?;
        debug_assert!(check_feasibility(self.original, &full.x, FEAS_TOL)?.feasible);
        self.pool.push(PoolEntry {
            elapsed: self.elapsed(),
            nodes: self.nodes,
            solution: full,
        });
        self.best_reduced = Some(sol);
        Ok(true)
    }

    fn solution_limit_hit(&self) -> bool {
        matches!(self.opts.solution_limit, Some(k) if self.pool.len() >= k)
    }

    /// Rounds an LP point and greedily flips binaries to repair violated rows.
    fn round_and_repair(&self, lp_x: &[f64]) -> Option<Vec<f64>> {
        let p = &self.reduced;
        let mut x: Vec<f64> = lp_x
            .iter()
            .enumerate()
            .map(|(i, &v)| if p.is_integer()[i] { v.round() } else { v })
            .collect();
        let matrix = p.matrix();
        let mut activity = matrix.mul_vec(&x);
        let violation = |j: usize, act: f64| p.sense()[j].violation(act, p.rhs()[j]);
        let total = |act: &[f64]| -> f64 { (0..p.m()).map(|j| violation(j, act[j])).sum() };
        let mut current = total(&activity);
        for _ in 0..(2 * p.n() + 10) {
            if current <= FEAS_TOL {
                return Some(x);
            }
            let (worst, _) = (0..p.m())
                .map(|j| (j, violation(j, activity[j])))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
            let (cols, _) = matrix.row(worst);
            let mut best: Option<(usize, f64, f64, f64)> = None;
            for &i in cols {
                if !p.is_integer()[i] || p.lower()[i] == p.upper()[i] {
                    continue;
                }
                let target = if x[i] > p.lower()[i] {
                    p.lower()[i]
                } else {
                    p.upper()[i]
                };
                let delta = target - x[i];
                let (rows, vals) = matrix.col(i);
                let mut change = 0.0;
                for (&r, &a) in rows.iter().zip(vals) {
                    change += violation(r, activity[r] + a * delta) - violation(r, activity[r]);
                }
                let cost = p.obj()[i] * delta;
                let better = match best {
                    None => true,
                    Some((_, _, bc, bcost)) => change < bc || (change == bc && cost < bcost),
                };
                if better {
                    best = Some((i, target, change, cost));
                }
            }
            let (i, target, change, _) = best?;
            if change >= -1e-12 {
                return None;
            }
            let delta = target - x[i];
            let (rows, vals) = matrix.col(i);
            for (&r, &a) in rows.iter().zip(vals) {
                activity[r] += a * delta;
            }
            x[i] = target;
            current = total(&activity);
        }
        None
    }
}

/// Exact solve of a binary MILP. Every returned solution is integer-feasible
/// within `1e-6`.
pub fn solve_milp(inst: &MilpInstance, opts: &SolveOptions) -> Result<SolverResult> {
    opts.validate()?;
    if !inst.is_binary() {
        return Err(Error::Unsupported(
            "branch-and-bound handles binary integer variables only".into(),
        ));
    }
    let start = Instant::now();
    let deadline = if opts.time_limit.is_finite() {
        Some(start + Duration::from_secs_f64(opts.time_limit))
    } else {
        None
    };

    let (reduced, map) = match reduce(inst) {
        Ok(r) => r,
        Err(Error::InfeasibleInput(_)) => {
            return Ok(SolverResult {
                status: SolveStatus::Infeasible,
                best: None,
                dual_bound: f64::INFINITY,
                pool: Vec::new(),
                nodes: 0,
                lp_iterations: 0,
                presolve_seconds: start.elapsed().as_secs_f64(),
            })
        }
        Err(e) => return Err(e),
    };
    let presolve_seconds = start.elapsed().as_secs_f64();
    let integral_objective = (0..reduced.n()).all(|i| {
        let c = reduced.obj()[i];
        if reduced.is_integer()[i] {
            c.fract() == 0.0
        } else {
            c == 0.0
        }
    });

    let mut s = Search {
        original: inst,
        reduced,
        map,
        opts,
        start,
        deadline,
        best_reduced: None,
        pool: Vec::new(),
        integral_objective,
        lp_iterations: 0,
        nodes: 0,
    };
    let finish = |s: Search, status: SolveStatus, dual_bound: f64, nodes: u64| {
        let best = s.pool.last().map(|e| e.solution.clone());
        SolverResult {
            status,
            best,
            dual_bound,
            pool: s.pool,
            nodes,
            lp_iterations: s.lp_iterations,
            presolve_seconds,
        }
    };
    let offset = s.map.objective_offset;
    let best_full = |s: &Search| s.best_reduced.as_ref().map(|b| b.objective + offset);

    // Trivial bound points.
    for point in [s.reduced.lower().to_vec(), s.reduced.upper().to_vec()] {
        s.offer(point)?;
        if s.solution_limit_hit() {
            let bound = f64::NEG_INFINITY;
            return Ok(finish(s, SolveStatus::SolutionLimit, bound, 0));
        }
    }

    let lp_opts = LpOptions {
        deadline,
        stop: opts.stop.clone(),
        ..Default::default()
    };
    let root_lower = s.reduced.lower().to_vec();
    let root_upper = s.reduced.upper().to_vec();
    let mut lower = root_lower.clone();
    let mut upper = root_upper.clone();

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut plunge: Option<Node> = Some(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        changes: Vec::new(),
    });
    let mut seq = 1u64;
    let mut nodes = 0u64;
    let mut root_done = false;
    let mut root_bound = f64::NEG_INFINITY;

    let open_bound = |heap: &BinaryHeap<Node>, plunge: &Option<Node>| -> f64 {
        let h = heap.peek().map_or(f64::INFINITY, |n| n.bound);
        let p = plunge.as_ref().map_or(f64::INFINITY, |n| n.bound);
        h.min(p)
    };
    let interrupted_status = |s: &Search| {
        if s.stopped_by_flag() {
            if s.best_reduced.is_some() {
                SolveStatus::Feasible
            } else {
                SolveStatus::TimeLimit
            }
        } else {
            SolveStatus::TimeLimit
        }
    };

    loop {
        let node = match plunge.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if s.out_of_time() {
            let bound = node.bound.min(open_bound(&heap, &None)) + offset;
            let dual = best_full(&s).map_or(bound, |b| b.min(bound));
            let status = interrupted_status(&s);
            return Ok(finish(s, status, dual, nodes));
        }
        if matches!(opts.node_limit, Some(limit) if nodes >= limit) {
            let bound = node.bound.min(open_bound(&heap, &None)) + offset;
            let dual = best_full(&s).map_or(bound, |b| b.min(bound));
            return Ok(finish(s, SolveStatus::NodeLimit, dual, nodes));
        }
        if s.can_prune(node.bound) {
            continue;
        }

        lower.copy_from_slice(&root_lower);
        upper.copy_from_slice(&root_upper);
        for &(i, l, u) in &node.changes {
            lower[i] = l;
            upper[i] = u;
        }
        nodes += 1;
        s.nodes = nodes;
        let lp = match solve_lp_with_bounds(&s.reduced, &lower, &upper, &lp_opts) {
            Ok(lp) => lp,
            Err(e) if !root_done => return Err(e),
            Err(e) => {
                log::warn!("dropping node after LP failure: {e}");
                continue;
            }
        };
        s.lp_iterations += lp.iterations as u64;
        match lp.status {
            LpStatus::Infeasible => {
                root_done = true;
                continue;
            }
            LpStatus::Unbounded => {
                return Err(Error::Unsupported("LP relaxation is unbounded".into()));
            }
            LpStatus::IterationLimit => {
                if s.out_of_time() {
                    let bound = node.bound.min(open_bound(&heap, &None)) + offset;
                    let dual = best_full(&s).map_or(bound, |b| b.min(bound));
                    let status = interrupted_status(&s);
                    return Ok(finish(s, status, dual, nodes));
                }
                log::warn!("LP iteration limit hit; dropping node");
                continue;
            }
            LpStatus::Optimal => {}
        }
        let bound = lp.objective.max(node.bound);
        if !root_done {
            root_done = true;
            root_bound = bound;
            if let Some(y) = s.round_and_repair(&lp.x) {
                s.offer(y)?;
                if s.solution_limit_hit() {
                    return Ok(finish(
                        s,
                        SolveStatus::SolutionLimit,
                        root_bound + offset,
                        nodes,
                    ));
                }
            }
        }
        if s.can_prune(bound) {
            continue;
        }

        // Most fractional integer variable.
        let mut branch: Option<(usize, f64)> = None;
        for i in 0..s.reduced.n() {
            if !s.reduced.is_integer()[i] {
                continue;
            }
            let v = lp.x[i];
            let frac = v - v.floor();
            let score = frac.min(1.0 - frac);
            if score > FEAS_TOL && branch.map_or(true, |(_, best)| score > best) {
                branch = Some((i, score));
            }
        }
        let Some((var, _)) = branch else {
            if s.offer(lp.x.clone())? && s.solution_limit_hit() {
                let dual = open_bound(&heap, &None).min(bound) + offset;
                let dual = best_full(&s).map_or(dual, |b| b.min(dual));
                return Ok(finish(s, SolveStatus::SolutionLimit, dual, nodes));
            }
            continue;
        };

        let v = lp.x[var];
        let mut down = node.changes.clone();
        down.push((var, lower[var], v.floor()));
        let mut up = node.changes;
        up.push((var, v.ceil(), upper[var]));
        heap.push(Node {
            bound,
            seq,
            changes: up,
        });
        plunge = Some(Node {
            bound,
            seq: seq + 1,
            changes: down,
        });
        seq += 2;

        if opts.gap_tol > 0.0 {
            if let Some(best) = &s.best_reduced {
                let lb = open_bound(&heap, &plunge);
                if best.objective - lb <= opts.gap_tol * best.objective.abs().max(1.0) {
                    let dual = lb + offset;
                    return Ok(finish(s, SolveStatus::Optimal, dual, nodes));
                }
            }
        }
    }

    let _ = root_bound;
    match best_full(&s) {
        Some(obj) => Ok(finish(s, SolveStatus::Optimal, obj, nodes)),
        None => {
            let dual = opts.cutoff.unwrap_or(f64::INFINITY);
            Ok(finish(s, SolveStatus::Infeasible, dual, nodes))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{MilpBuilder, Sense};

    #[test]
    fn contradictory_rows_infeasible() {
        let mut b = MilpBuilder::new("x");
        let x = b.add_binary(1.0);
        b.add_row(vec![(x, 1.0)], Sense::Ge, 1.0);
        b.add_row(vec![(x, 1.0)], Sense::Le, 0.0);
        let r = solve_milp(&b.build().unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.best.is_none() && r.pool.is_empty());
    }

    #[test]
    fn rejects_general_integers() {
        let mut b = MilpBuilder::new("gi");
        b.add_var(1.0, 0.0, 3.0, true);
        assert!(matches!(
            solve_milp(&b.build().unwrap(), &SolveOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn knapsack_needs_branching() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut b = MilpBuilder::new("knap");
        let v: Vec<usize> = [5.0, 4.0, 3.0].iter().map(|&p| b.add_binary(-p)).collect();
        b.add_row(vec![(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)], Sense::Le, 5.0);
        b.add_row(vec![(v[0], 4.0), (v[1], 1.0), (v[2], 2.0)], Sense::Le, 11.0);
        b.add_row(vec![(v[0], 3.0), (v[1], 4.0), (v[2], 2.0)], Sense::Le, 8.0);
        let r = solve_milp(&b.build().unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.best.as_ref().unwrap().objective, -9.0);
        assert_eq!(r.dual_bound, -9.0);
        for w in r.pool.windows(2) {
            assert!(w[1].solution.objective < w[0].solution.objective);
        }
    }

    #[test]
    fn solution_limit_one() {
        let mut b = MilpBuilder::new("sl");
        let v: Vec<usize> = (0..5).map(|_| b.add_binary(1.0)).collect();
        b.add_row(v.iter().map(|&i| (i, 1.0)).collect(), Sense::Ge, 2.0);
        let opts = SolveOptions {
            solution_limit: Some(1),
            ..Default::default()
        };
        let r = solve_milp(&b.build().unwrap(), &opts).unwrap();
        assert_eq!(r.status, SolveStatus::SolutionLimit);
        assert_eq!(r.pool.len(), 1);
    }

    #[test]
    fn cutoff_rejects_non_improving() {
        let mut b = MilpBuilder::new("cut");
        let v: Vec<usize> = (0..3).map(|_| b.add_binary(1.0)).collect();
        b.add_row(v.iter().map(|&i| (i, 1.0)).collect(), Sense::Ge, 1.0);
        let opts = SolveOptions {
            cutoff: Some(1.0),
            ..Default::default()
        };
        let r = solve_milp(&b.build().unwrap(), &opts).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }
}
