//! Reversible reduction of fixed-variable MILPs and the matching postsolve.
//!
//! Three reductions run to a fixpoint: fixed variables are substituted into
//! the rows and the objective; rows whose activity bounds already imply the
//! constraint are dropped; singleton rows become bounds on their variable,
//! which may fix it and restart the cycle. Every reduction keeps the set of
//! optimal solutions, so postsolve only needs to re-insert fixed values.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::milp::{MilpInstance, Sense, Solution, SparseMatrix, FEAS_TOL};
use crate::neighborhoods::FixingSet;

/// Slack below which activity-implied rows count as redundant.
const REDUNDANCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    AllFixed,
    RedundantByActivity,
}

/// Mapping between an original problem and its reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct PresolveMap {
    pub n_original: usize,
    /// Original index of every reduced variable, increasing.
    pub kept_vars: Vec<usize>,
    /// `(index, value)` of every eliminated variable, increasing by index.
    pub fixed_values: Vec<(usize, f64)>,
    /// Original index of every reduced row, increasing.
    pub kept_rows: Vec<usize>,
    pub dropped_rows: Vec<(usize, DropReason)>,
    /// Objective contribution of the eliminated variables.
    pub objective_offset: f64,
}

impl PresolveMap {
    pub fn n_reduced(&self) -> usize {
        self.kept_vars.len()
    }

    /// Restricts a full-space vector to the kept variables.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.kept_vars.iter().map(|&i| x[i]).collect()
    }
}

/// Reduces `inst` with its own bounds: variables with `l == u` are removed.
pub fn reduce(inst: &MilpInstance) -> Result<(MilpInstance, PresolveMap)> {
    reduce_with_bounds(inst, inst.lower(), inst.upper())
}

/// Presolve of the auxiliary problem `A(M, xbar, F)`: variables in `fixing`
/// are fixed to their incumbent values before reducing.
///
/// Returns the reduced problem, the incumbent restricted to it, and the map.
pub fn presolve_fixing(
    inst: &MilpInstance,
    incumbent: &Solution,
    fixing: &FixingSet,
) -> Result<(MilpInstance, Solution, PresolveMap)> {
    if incumbent.len() != inst.n() {
        return Err(Error::dim("incumbent", inst.n(), incumbent.len()));
    }
    fixing.check_against(inst)?;
    let mut lower = inst.lower().to_vec();
    let mut upper = inst.upper().to_vec();
    for &i in fixing.indices() {
        lower[i] = incumbent.x[i];
        upper[i] = incumbent.x[i];
    }
    let (reduced, map) = reduce_with_bounds(inst, &lower, &upper)?;
    let y = Solution::new(&reduced, map.restrict(&incumbent.x))?;
    Ok((reduced, y, map))
}

/// Lifts a reduced-space solution back to the original variable space.
pub fn postsolve(reduced: &MilpInstance, y: &Solution, map: &PresolveMap) -> Result<Solution> {
    if y.len() != map.kept_vars.len() {
        return Err(Error::dim("reduced solution", map.kept_vars.len(), y.len()));
    }
    if reduced.n() != map.kept_vars.len() {
        return Err(Error::dim(
            "reduced problem",
            map.kept_vars.len(),
            reduced.n(),
        ));
    }
    let mut x = vec![0.0; map.n_original];
    for (&i, &v) in map.kept_vars.iter().zip(&y.x) {
        x[i] = v;
    }
    for &(i, v) in &map.fixed_values {
        x[i] = v;
    }
    Ok(Solution {
        x,
        objective: y.objective + map.objective_offset,
    })
}

struct RowScan {
    fixed_activity: f64,
    free_count: usize,
    last_free: Option<(usize, f64)>,
    min_activity: f64,
    max_activity: f64,
}

/// Reduction of `inst` under the given bounds (which replace the instance's own).
pub fn reduce_with_bounds(
    inst: &MilpInstance,
    lower: &[f64],
    upper: &[f64],
) -> Result<(MilpInstance, PresolveMap)> {
    let n = inst.n();
    let m = inst.m();
    if lower.len() != n || upper.len() != n {
        return Err(Error::dim("bound vectors", n, lower.len().min(upper.len())));
    }
    let matrix = inst.matrix();
    let is_int = inst.is_integer();
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    for i in 0..n {
        if lo[i] > hi[i] {
            return Err(Error::InfeasibleInput(format!(
                "variable {i} has crossed bounds [{}, {}]",
                lo[i], hi[i]
            )));
        }
    }
    let mut fixed: Vec<bool> = (0..n).map(|i| lo[i] == hi[i]).collect();
    let mut dropped: Vec<Option<DropReason>> = vec![None; m];
    let mut queued = vec![true; m];
    let mut queue: VecDeque<usize> = (0..m).collect();

    let scan = |j: usize, lo: &[f64], hi: &[f64], fixed: &[bool]| -> RowScan {
        let (cols, vals) = matrix.row(j);
        let mut s = RowScan {
            fixed_activity: 0.0,
            free_count: 0,
            last_free: None,
            min_activity: 0.0,
            max_activity: 0.0,
        };
        for (&i, &a) in cols.iter().zip(vals) {
            if fixed[i] {
                s.fixed_activity += a * lo[i];
            } else {
                s.free_count += 1;
                s.last_free = Some((i, a));
                if a > 0.0 {
                    s.min_activity += a * lo[i];
                    s.max_activity += a * hi[i];
                } else {
                    s.min_activity += a * hi[i];
                    s.max_activity += a * lo[i];
                }
            }
        }
        s
    };

    while let Some(j) = queue.pop_front() {
        queued[j] = false;
        if dropped[j].is_some() {
            continue;
        }
        let s = scan(j, &lo, &hi, &fixed);
        let rhs = inst.rhs()[j] - s.fixed_activity;
        let sense = inst.sense()[j];

        if s.free_count == 0 {
            let violation = sense.violation(0.0, rhs);
            if violation > FEAS_TOL {
                return Err(Error::InfeasibleInput(format!(
                    "row {j} is violated by {violation} after fixing"
                )));
            }
            dropped[j] = Some(DropReason::AllFixed);
            continue;
        }

        let redundant = match sense {
            Sense::Le => s.max_activity <= rhs + REDUNDANCY_TOL,
            Sense::Ge => s.min_activity >= rhs - REDUNDANCY_TOL,
            Sense::Eq => false,
        };
        if redundant {
            dropped[j] = Some(DropReason::RedundantByActivity);
            continue;
        }

        if s.free_count == 1 {
            let (i, a) = s.last_free.expect("one free entry");
            let bound = rhs / a;
            // a * x (sense) rhs  ->  bounds on x
            let (new_lo, new_hi) = match (sense, a > 0.0) {
                (Sense::Eq, _) => (bound, bound),
                (Sense::Le, true) | (Sense::Ge, false) => (f64::NEG_INFINITY, bound),
                (Sense::Le, false) | (Sense::Ge, true) => (bound, f64::INFINITY),
            };
            let (mut new_lo, mut new_hi) = (new_lo, new_hi);
            if is_int[i] {
                new_lo = (new_lo - FEAS_TOL).ceil();
                new_hi = (new_hi + FEAS_TOL).floor();
            }
            let l = lo[i].max(new_lo);
            let u = hi[i].min(new_hi);
            if l > u + FEAS_TOL {
                return Err(Error::InfeasibleInput(format!(
                    "row {j} forces variable {i} outside its bounds"
                )));
            }
            let (l, u) = if l > u { (u, u) } else { (l, u) };
            let changed = l != lo[i] || u != hi[i];
            lo[i] = l;
            hi[i] = u;
            if lo[i] == hi[i] {
                fixed[i] = true;
            }
            dropped[j] = Some(DropReason::RedundantByActivity);
            if changed {
                let (rows, _) = matrix.col(i);
                for &r in rows {
                    if !queued[r] && dropped[r].is_none() {
                        queued[r] = true;
                        queue.push_back(r);
                    }
                }
            }
        }
    }

    // Assemble the reduced problem.
    let mut new_index = vec![usize::MAX; n];
    let mut kept_vars = Vec::new();
    let mut fixed_values = Vec::new();
    let mut objective_offset = 0.0;
    for i in 0..n {
        if fixed[i] {
            fixed_values.push((i, lo[i]));
            objective_offset += inst.obj()[i] * lo[i];
        } else {
            new_index[i] = kept_vars.len();
            kept_vars.push(i);
        }
    }
    let mut kept_rows = Vec::new();
    let mut dropped_rows = Vec::new();
    let mut rows = Vec::new();
    let mut sense = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..m {
        if let Some(reason) = dropped[j] {
            dropped_rows.push((j, reason));
            continue;
        }
        let (cols, vals) = matrix.row(j);
        let mut b = inst.rhs()[j];
        let mut row = Vec::with_capacity(cols.len());
        for (&i, &a) in cols.iter().zip(vals) {
            if fixed[i] {
                b -= a * lo[i];
            } else {
                row.push((new_index[i], a));
            }
        }
        kept_rows.push(j);
        rows.push(row);
        sense.push(inst.sense()[j]);
        rhs.push(b);
    }
    let reduced = MilpInstance::new(
        inst.name(),
        SparseMatrix::from_rows(kept_vars.len(), rows)?,
        sense,
        rhs,
        kept_vars.iter().map(|&i| inst.obj()[i]).collect(),
        kept_vars.iter().map(|&i| lo[i]).collect(),
        kept_vars.iter().map(|&i| hi[i]).collect(),
        kept_vars.iter().map(|&i| is_int[i]).collect(),
    )?;
    let map = PresolveMap {
        n_original: n,
        kept_vars,
        fixed_values,
        kept_rows,
        dropped_rows,
        objective_offset,
    };
    Ok((reduced, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpBuilder;

    fn tiny_cover() -> MilpInstance {
        // items 0..4, subsets: {0,1}, {1,2}, {2,3}, {0,3}, {0,2}
        let subsets = [vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3], vec![0, 2]];
        let mut b = MilpBuilder::new("sc-tiny");
        for _ in &subsets {
            b.add_binary(1.0);
        }
        for item in 0..4 {
            let row = subsets
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains(&item))
                .map(|(k, _)| (k, 1.0))
                .collect();
            b.add_row(row, Sense::Ge, 1.0);
        }
        b.build().unwrap()
    }

    #[test]
    fn full_fixing_empties_problem() {
        let inst = tiny_cover();
        let xbar = Solution::new(&inst, vec![1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let all = FixingSet::new(&inst, (0..5).collect()).unwrap();
        let (p, y, map) = presolve_fixing(&inst, &xbar, &all).unwrap();
        assert_eq!((p.n(), p.m()), (0, 0));
        assert_eq!(map.objective_offset, xbar.objective);
        let back = postsolve(&p, &y, &map).unwrap();
        assert_eq!(back, xbar);
    }

    #[test]
    fn empty_fixing_is_identity() {
        let inst = tiny_cover();
        let xbar = Solution::new(&inst, vec![1.0; 5]).unwrap();
        let none = FixingSet::new(&inst, vec![]).unwrap();
        let (p, y, map) = presolve_fixing(&inst, &xbar, &none).unwrap();
        assert_eq!(p, inst);
        assert_eq!(y, xbar);
        assert_eq!(map.objective_offset, 0.0);
    }

    #[test]
    fn fixing_a_subset_to_one_drops_its_rows() {
        let inst = tiny_cover();
        let xbar = Solution::new(&inst, vec![1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let f = FixingSet::new(&inst, vec![0]).unwrap();
        let (p, _, map) = presolve_fixing(&inst, &xbar, &f).unwrap();
        // subset 0 covers items 0 and 1
        assert_eq!(
            map.dropped_rows,
            vec![
                (0, DropReason::RedundantByActivity),
                (1, DropReason::RedundantByActivity)
            ]
        );
        assert_eq!(p.n(), 4);
        assert_eq!(map.objective_offset, 1.0);
    }

    #[test]
    fn singleton_rows_propagate() {
        // x0 + x1 >= 1 with x1 fixed to 0 forces x0 = 1, which then
        // satisfies x0 + x2 >= 1.
        let mut b = MilpBuilder::new("prop");
        for _ in 0..3 {
            b.add_binary(1.0);
        }
        b.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 1.0);
        b.add_row(vec![(0, 1.0), (2, 1.0)], Sense::Ge, 1.0);
        b.add_row(vec![(1, 1.0), (2, 1.0)], Sense::Le, 1.0);
        let inst = b.build().unwrap();
        let xbar = Solution::new(&inst, vec![1.0, 0.0, 1.0]).unwrap();
        let f = FixingSet::new(&inst, vec![1]).unwrap();
        let (p, y, map) = presolve_fixing(&inst, &xbar, &f).unwrap();
        assert_eq!(map.kept_vars, vec![2]);
        assert_eq!(map.fixed_values, vec![(0, 1.0), (1, 0.0)]);
        assert_eq!(p.m(), 0);
        assert_eq!(y.x, vec![1.0]);
        assert_eq!(map.objective_offset, 1.0);
    }

    #[test]
    fn infeasible_substitution_detected() {
        let inst = tiny_cover();
        let xbar = Solution::new(&inst, vec![0.0; 5]).unwrap();
        let f = FixingSet::new(&inst, (0..5).collect()).unwrap();
        assert!(matches!(
            presolve_fixing(&inst, &xbar, &f),
            Err(Error::InfeasibleInput(_))
        ));
    }

    #[test]
    fn reduce_is_idempotent() {
        let inst = tiny_cover();
        let xbar = Solution::new(&inst, vec![1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let f = FixingSet::new(&inst, vec![1, 3]).unwrap();
        let (p, _, _) = presolve_fixing(&inst, &xbar, &f).unwrap();
        let (again, map) = reduce(&p).unwrap();
        assert_eq!(again, p);
        assert!(map.fixed_values.is_empty() && map.dropped_rows.is_empty());
    }

    #[test]
    fn postsolve_dimension_mismatch() {
        let inst = tiny_cover();
        let (p, map) = reduce(&inst).unwrap();
        let bad = Solution {
            x: vec![0.0],
            objective: 0.0,
        };
        assert!(postsolve(&p, &bad, &map).is_err());
    }
}
