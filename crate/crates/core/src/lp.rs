//! Bounded-variable revised primal simplex for LP relaxations.
//!
//! Every row gets a slack column so the constraint block reads `A x + s = b`
//! with `s >= 0` (LE), `s <= 0` (GE) or `s = 0` (EQ). Phase one starts from a
//! slack basis, patching rows the slack cannot absorb with artificial columns,
//! and minimizes the artificial sum. Phase two re-optimizes with the true
//! costs while the artificials are pinned to zero.
//!
//! Slack and artificial basis columns are unit vectors, so only the block of
//! basic structural columns on the rows they leave uncovered is factorized
//! (dense LU). A product-form eta file sits on top; the basis is
//! refactorized every `refactor_every` pivots.
//! Pricing is Dantzig's rule, switching to Bland's rule after a run of
//! degenerate pivots.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::milp::{MilpInstance, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit, deadline, or stop request reached first.
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Values of the structural variables.
    pub x: Vec<f64>,
    /// Column index of each basic variable; indices `>= n` are row slacks
    /// (`n + row`) or artificials.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LpOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    pub iter_limit: usize,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before Bland's rule takes over.
    pub bland_after: usize,
    pub deadline: Option<Instant>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-6,
            opt_tol: 1e-7,
            pivot_tol: 1e-9,
            iter_limit: 1_000_000,
            refactor_every: 100,
            bland_after: 200,
            deadline: None,
            stop: None,
        }
    }
}

/// Solves the LP relaxation of `inst` (integrality ignored) with the listed
/// `(index, lower, upper)` bound overrides applied.
pub fn solve_lp(
    inst: &MilpInstance,
    overrides: &[(usize, f64, f64)],
    opts: &LpOptions,
) -> Result<LpResult> {
    let mut lower = inst.lower().to_vec();
    let mut upper = inst.upper().to_vec();
    for &(i, l, u) in overrides {
        if i >= inst.n() {
            return Err(Error::InvalidArgument(format!(
                "bound override for variable {i} but n = {}",
                inst.n()
            )));
        }
        if !(l <= u) {
            return Err(Error::InvalidArgument(format!(
                "bound override for variable {i} has l = {l} > u = {u}"
            )));
        }
        lower[i] = l;
        upper[i] = u;
    }
    solve_lp_with_bounds(inst, &lower, &upper, opts)
}

/// Same as [`solve_lp`] with complete bound vectors.
pub fn solve_lp_with_bounds(
    inst: &MilpInstance,
    lower: &[f64],
    upper: &[f64],
    opts: &LpOptions,
) -> Result<LpResult> {
    if lower.len() != inst.n() || upper.len() != inst.n() {
        return Err(Error::dim(
            "bound vectors",
            inst.n(),
            lower.len().min(upper.len()),
        ));
    }
    if (0..inst.n()).any(|i| lower[i] > upper[i]) {
        return Ok(LpResult {
            status: LpStatus::Infeasible,
            objective: f64::INFINITY,
            x: lower.to_vec(),
            basis: Vec::new(),
            iterations: 0,
        });
    }
    Simplex::new(inst, lower, upper, opts.clone()).run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NonBasic {
    Lower,
    Upper,
}

/// Dense LU factors with row pivoting: `P B = L U`, unit-lower `L`.
struct DenseLu {
    dim: usize,
    lu: Vec<f64>,
    /// `perm[k]` is the original row placed at position `k`.
    perm: Vec<usize>,
}

impl DenseLu {
    fn factorize(mut a: Vec<f64>, dim: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..dim).collect();
        for k in 0..dim {
            let mut piv = k;
            let mut best = a[k * dim + k].abs();
            for i in (k + 1)..dim {
                let v = a[i * dim + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-11 {
                return None;
            }
            if piv != k {
                for c in 0..dim {
                    a.swap(k * dim + c, piv * dim + c);
                }
                perm.swap(k, piv);
            }
            let pivot = a[k * dim + k];
            for i in (k + 1)..dim {
                let f = a[i * dim + k];
                if f == 0.0 {
                    continue;
                }
                let f = f / pivot;
                a[i * dim + k] = f;
                let (top, bottom) = a.split_at_mut(i * dim);
                let row_k = &top[k * dim + k + 1..k * dim + dim];
                let row_i = &mut bottom[k + 1..dim];
                for (x, &y) in row_i.iter_mut().zip(row_k) {
                    *x -= f * y;
                }
            }
        }
        Some(Self { dim, lu: a, perm })
    }

    /// Solves `B x = rhs` in place.
    fn solve(&self, rhs: &mut [f64]) {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        rhs.copy_from_slice(&x);
    }

    /// Solves `B^T y = rhs` in place.
    fn solve_transpose(&self, rhs: &mut [f64]) {
        let n = self.dim;
        let mut z = rhs.to_vec();
        // U^T z = rhs
        for i in 0..n {
            z[i] /= self.lu[i * n + i];
            let zi = z[i];
            if zi != 0.0 {
                for k in (i + 1)..n {
                    z[k] -= self.lu[i * n + k] * zi;
                }
            }
        }
        // L^T w = z
        for i in (0..n).rev() {
            let zi = z[i];
            if zi != 0.0 {
                for k in 0..i {
                    z[k] -= self.lu[i * n + k] * zi;
                }
            }
        }
        for (k, &p) in self.perm.iter().enumerate() {
            rhs[p] = z[k];
        }
    }
}

/// Factorization of a basis split into unit columns (slacks, artificials)
/// and a kernel of structural columns restricted to the uncovered rows.
struct BasisFactor {
    m: usize,
    /// `(basis position, row, sign)` of each unit column.
    units: Vec<(usize, usize, f64)>,
    /// Kernel column `t` is basis position `kpos[t]`, structural column `kcol[t]`.
    kpos: Vec<usize>,
    kcol: Vec<usize>,
    /// Kernel row `i` is constraint row `krow[i]`.
    krow: Vec<usize>,
    /// Kernel index of each constraint row, `NOT_BASIC` when covered by a unit column.
    row_k: Vec<usize>,
    lu: DenseLu,
}

impl BasisFactor {
    fn new(
        inst: &MilpInstance,
        units: Vec<(usize, usize, f64)>,
        structural: Vec<(usize, usize)>,
    ) -> Option<Self> {
        let m = inst.m();
        let mut covered = vec![false; m];
        for &(_, r, _) in &units {
            if std::mem::replace(&mut covered[r], true) {
                return None;
            }
        }
        let krow: Vec<usize> = (0..m).filter(|&r| !covered[r]).collect();
        let k = structural.len();
        if krow.len() != k {
            return None;
        }
        let mut row_k = vec![NOT_BASIC; m];
        for (i, &r) in krow.iter().enumerate() {
            row_k[r] = i;
        }
        let mut dense = vec![0.0; k * k];
        for (t, &(_, j)) in structural.iter().enumerate() {
            let (rows, vals) = inst.matrix().col(j);
            for (&r, &a) in rows.iter().zip(vals) {
                if row_k[r] != NOT_BASIC {
                    dense[row_k[r] * k + t] = a;
                }
            }
        }
        let lu = DenseLu::factorize(dense, k)?;
        Some(Self {
            m,
            units,
            kpos: structural.iter().map(|p| p.0).collect(),
            kcol: structural.iter().map(|p| p.1).collect(),
            krow,
            row_k,
            lu,
        })
    }

    /// Solves `B x = v` in place; `v` is indexed by row on entry and by basis
    /// position on exit.
    fn solve(&self, inst: &MilpInstance, v: &mut [f64]) {
        let mut xk: Vec<f64> = self.krow.iter().map(|&r| v[r]).collect();
        self.lu.solve(&mut xk);
        for (&j, &xj) in self.kcol.iter().zip(&xk) {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = inst.matrix().col(j);
            for (&r, &a) in rows.iter().zip(vals) {
                v[r] -= a * xj;
            }
        }
        let mut out = vec![0.0; self.m];
        for &(p, r, sign) in &self.units {
            out[p] = v[r] / sign;
        }
        for (&p, &xj) in self.kpos.iter().zip(&xk) {
            out[p] = xj;
        }
        v.copy_from_slice(&out);
    }

    /// Solves `B^T y = v` in place; `v` is indexed by basis position on entry
    /// and by row on exit.
    fn solve_transpose(&self, inst: &MilpInstance, v: &mut [f64]) {
        let mut y = vec![0.0; self.m];
        for &(p, r, sign) in &self.units {
            y[r] = v[p] / sign;
        }
        let mut rhs: Vec<f64> = self
            .kpos
            .iter()
            .zip(&self.kcol)
            .map(|(&p, &j)| {
                let (rows, vals) = inst.matrix().col(j);
                let covered: f64 = rows
                    .iter()
                    .zip(vals)
                    .filter(|(&r, _)| self.row_k[r] == NOT_BASIC)
                    .map(|(&r, &a)| a * y[r])
                    .sum();
                v[p] - covered
            })
            .collect();
        self.lu.solve_transpose(&mut rhs);
        for (&r, &yr) in self.krow.iter().zip(&rhs) {
            y[r] = yr;
        }
        v.copy_from_slice(&y);
    }
}

struct Eta {
    row: usize,
    col: Vec<f64>,
}

struct Simplex<'a> {
    inst: &'a MilpInstance,
    opts: LpOptions,
    n: usize,
    m: usize,
    /// Artificial column `n + m + k` lives in row `art_row[k]` with sign `art_sign[k]`.
    art_row: Vec<usize>,
    art_sign: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Basis position of each column, `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    state: Vec<NonBasic>,
    factor: Option<BasisFactor>,
    etas: Vec<Eta>,
    iterations: usize,
}

const NOT_BASIC: usize = usize::MAX;

enum PhaseOutcome {
    Optimal,
    Unbounded,
    Interrupted,
}

impl<'a> Simplex<'a> {
    fn new(inst: &'a MilpInstance, lower: &[f64], upper: &[f64], opts: LpOptions) -> Self {
        let n = inst.n();
        let m = inst.m();
        let mut lb = lower.to_vec();
        let mut ub = upper.to_vec();
        let mut x = lower.to_vec();
        let mut state = vec![NonBasic::Lower; n];
        for sense in inst.sense() {
            let (l, u) = match sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lb.push(l);
            ub.push(u);
            x.push(0.0);
            state.push(if l.is_finite() {
                NonBasic::Lower
            } else {
                NonBasic::Upper
            });
        }

        let activity = inst.matrix().mul_vec(&x[..n]);
        let mut basis = Vec::with_capacity(m);
        let mut art_row = Vec::new();
        let mut art_sign = Vec::new();
        for r in 0..m {
            let resid = inst.rhs()[r] - activity[r];
            let s = n + r;
            if resid >= lb[s] && resid <= ub[s] {
                x[s] = resid;
                basis.push(s);
            } else {
                let bound = if resid < lb[s] { lb[s] } else { ub[s] };
                x[s] = bound;
                state[s] = if resid < lb[s] {
                    NonBasic::Lower
                } else {
                    NonBasic::Upper
                };
                let diff = resid - bound;
                art_row.push(r);
                art_sign.push(diff.signum());
                lb.push(0.0);
                ub.push(f64::INFINITY);
                x.push(diff.abs());
                state.push(NonBasic::Lower);
                basis.push(n + m + art_row.len() - 1);
            }
        }
        let total = lb.len();
        let mut pos = vec![NOT_BASIC; total];
        for (k, &j) in basis.iter().enumerate() {
            pos[j] = k;
        }
        let mut cost = vec![0.0; total];
        for c in &mut cost[n + m..] {
            *c = 1.0;
        }
        Self {
            inst,
            opts,
            n,
            m,
            art_row,
            art_sign,
            lb,
            ub,
            x,
            cost,
            basis,
            pos,
            state,
            factor: None,
            etas: Vec::new(),
            iterations: 0,
        }
    }

    fn n_cols(&self) -> usize {
        self.lb.len()
    }

    /// Scatters column `j` of `[A | I | artificials]` into `out` (length m).
    fn column_into(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            let (rows, vals) = self.inst.matrix().col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                out[r] = v;
            }
        } else if j < self.n + self.m {
            out[j - self.n] = 1.0;
        } else {
            let k = j - self.n - self.m;
            out[self.art_row[k]] = self.art_sign[k];
        }
    }

    /// `y . column_j`.
    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let (rows, vals) = self.inst.matrix().col(j);
            rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum()
        } else if j < self.n + self.m {
            y[j - self.n]
        } else {
            let k = j - self.n - self.m;
            self.art_sign[k] * y[self.art_row[k]]
        }
    }

    fn refactorize(&mut self) -> Result<()> {
        let mut units = Vec::new();
        let mut structural = Vec::new();
        for (p, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                structural.push((p, j));
            } else if j < self.n + self.m {
                units.push((p, j - self.n, 1.0));
            } else {
                let k = j - self.n - self.m;
                units.push((p, self.art_row[k], self.art_sign[k]));
            }
        }
        self.factor =
            Some(BasisFactor::new(self.inst, units, structural).ok_or(Error::SingularBasis)?);
        self.etas.clear();

        // x_B = B^-1 (b - N x_N)
        let mut rhs = self.inst.rhs().to_vec();
        for j in 0..self.n_cols() {
            if self.pos[j] != NOT_BASIC || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                let (rows, vals) = self.inst.matrix().col(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    rhs[r] -= v * xj;
                }
            } else if j < self.n + self.m {
                rhs[j - self.n] -= xj;
            } else {
                let k = j - self.n - self.m;
                rhs[self.art_row[k]] -= self.art_sign[k] * xj;
            }
        }
        self.ftran(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularBasis);
        }
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[k];
        }
        Ok(())
    }

    fn ftran(&self, v: &mut [f64]) {
        self.factor
            .as_ref()
            .expect("factorized")
            .solve(self.inst, v);
        for eta in &self.etas {
            let zr = v[eta.row] / eta.col[eta.row];
            if zr != 0.0 {
                for (vi, &wi) in v.iter_mut().zip(&eta.col) {
                    *vi -= wi * zr;
                }
            }
            v[eta.row] = zr;
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let r = eta.row;
            let mut s = v[r];
            for (i, (&vi, &wi)) in v.iter().zip(&eta.col).enumerate() {
                if i != r {
                    s -= wi * vi;
                }
            }
            v[r] = s / eta.col[r];
        }
        self.factor
            .as_ref()
            .expect("factorized")
            .solve_transpose(self.inst, v);
    }

    fn interrupted(&self) -> bool {
        if let Some(stop) = &self.opts.stop {
            if stop.load(Ordering::Relaxed) {
                return true;
            }
        }
        matches!(self.opts.deadline, Some(d) if Instant::now() >= d)
    }

    fn run_phase(&mut self) -> Result<PhaseOutcome> {
        let m = self.m;
        let mut y = vec![0.0; m];
        let mut w = vec![0.0; m];
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.opts.iter_limit {
                return Ok(PhaseOutcome::Interrupted);
            }
            if self.iterations % 512 == 0 && self.interrupted() {
                return Ok(PhaseOutcome::Interrupted);
            }
            let bland = degenerate_run >= self.opts.bland_after;

            for (k, &j) in self.basis.iter().enumerate() {
                y[k] = self.cost[j];
            }
            self.btran(&mut y);

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n_cols() {
                if self.pos[j] != NOT_BASIC || self.lb[j] == self.ub[j] {
                    continue;
                }
                let d = self.cost[j] - self.dot_column(j, &y);
                let eligible = match self.state[j] {
                    NonBasic::Lower => d < -self.opts.opt_tol,
                    NonBasic::Upper => d > self.opts.opt_tol,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.map_or(true, |(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let dir = if self.state[q] == NonBasic::Lower {
                1.0
            } else {
                -1.0
            };

            self.column_into(q, &mut w);
            self.ftran(&mut w);

            // Ratio test.
            let mut theta = self.ub[q] - self.lb[q];
            let mut leave: Option<(usize, NonBasic)> = None;
            let mut leave_mag = 0.0;
            for k in 0..m {
                let rate = -dir * w[k];
                if rate.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let j = self.basis[k];
                let (limit, hits) = if rate < 0.0 {
                    if !self.lb[j].is_finite() {
                        continue;
                    }
                    (((self.x[j] - self.lb[j]) / -rate).max(0.0), NonBasic::Lower)
                } else {
                    if !self.ub[j].is_finite() {
                        continue;
                    }
                    (((self.ub[j] - self.x[j]) / rate).max(0.0), NonBasic::Upper)
                };
                let better = if limit < theta - 1e-12 {
                    true
                } else if limit <= theta + 1e-12 {
                    match leave {
                        None => false,
                        Some((kk, _)) => {
                            if bland {
                                j < self.basis[kk]
                            } else {
                                rate.abs() > leave_mag
                            }
                        }
                    }
                } else {
                    false
                };
                if better {
                    theta = limit;
                    leave = Some((k, hits));
                    leave_mag = rate.abs();
                }
            }
            if !theta.is_finite() {
                return Ok(PhaseOutcome::Unbounded);
            }

            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.iterations += 1;

            if theta != 0.0 {
                self.x[q] += dir * theta;
                for k in 0..m {
                    if w[k] != 0.0 {
                        let j = self.basis[k];
                        self.x[j] -= dir * theta * w[k];
                    }
                }
            }

            match leave {
                None => {
                    // Bound flip of the entering variable.
                    self.state[q] = match self.state[q] {
                        NonBasic::Lower => NonBasic::Upper,
                        NonBasic::Upper => NonBasic::Lower,
                    };
                    self.x[q] = match self.state[q] {
                        NonBasic::Lower => self.lb[q],
                        NonBasic::Upper => self.ub[q],
                    };
                }
                Some((r, hits)) => {
                    let out = self.basis[r];
                    self.x[out] = match hits {
                        NonBasic::Lower => self.lb[out],
                        NonBasic::Upper => self.ub[out],
                    };
                    self.state[out] = hits;
                    self.pos[out] = NOT_BASIC;
                    self.basis[r] = q;
                    self.pos[q] = r;
                    self.etas.push(Eta {
                        row: r,
                        col: w.clone(),
                    });
                    if self.etas.len() >= self.opts.refactor_every {
                        self.refactorize()?;
                    }
                }
            }
        }
    }

    fn result(&self, status: LpStatus) -> LpResult {
        let x = self.x[..self.n].to_vec();
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => self.inst.obj().iter().zip(&x).map(|(c, v)| c * v).sum(),
        };
        LpResult {
            status,
            objective,
            x,
            basis: self.basis.clone(),
            iterations: self.iterations,
        }
    }

    fn run(mut self) -> Result<LpResult> {
        if self.m == 0 {
            // Each variable sits at its cheaper bound.
            for i in 0..self.n {
                self.x[i] = if self.inst.obj()[i] < 0.0 {
                    self.ub[i]
                } else {
                    self.lb[i]
                };
            }
            return Ok(self.result(LpStatus::Optimal));
        }
        self.refactorize()?;

        if !self.art_row.is_empty() {
            match self.run_phase()? {
                PhaseOutcome::Interrupted => return Ok(self.result(LpStatus::IterationLimit)),
                PhaseOutcome::Unbounded => unreachable!("phase one objective is bounded below"),
                PhaseOutcome::Optimal => {}
            }
            self.refactorize()?;
            let n_struct = self.n + self.m;
            let infeas: f64 = self.x[n_struct..].iter().sum();
            if infeas > self.opts.feas_tol {
                return Ok(self.result(LpStatus::Infeasible));
            }
            for j in n_struct..self.n_cols() {
                self.ub[j] = 0.0;
                self.cost[j] = 0.0;
                if self.pos[j] == NOT_BASIC {
                    self.x[j] = 0.0;
                    self.state[j] = NonBasic::Lower;
                }
            }
        }

        for j in 0..self.n {
            self.cost[j] = self.inst.obj()[j];
        }
        match self.run_phase()? {
            PhaseOutcome::Interrupted => Ok(self.result(LpStatus::IterationLimit)),
            PhaseOutcome::Unbounded => Ok(self.result(LpStatus::Unbounded)),
            PhaseOutcome::Optimal => {
                self.refactorize()?;
                Ok(self.result(LpStatus::Optimal))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpBuilder;

    #[test]
    fn triangle() {
        let mut b = MilpBuilder::new("tri");
        let x = b.add_var(-1.0, 0.0, 1.0, false);
        let y = b.add_var(-1.0, 0.0, 1.0, false);
        b.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        let inst = b.build().unwrap();
        let r = solve_lp(&inst, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_row_against_bound() {
        let mut b = MilpBuilder::new("inf");
        let x = b.add_var(1.0, 0.0, 1.0, false);
        b.add_row(vec![(x, 1.0)], Sense::Ge, 2.0);
        let inst = b.build().unwrap();
        let r = solve_lp(&inst, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_overrides() {
        // min x + 2y, x + y = 1.5, x,y in [0,1]  -> x = 1, y = 0.5
        let mut b = MilpBuilder::new("eq");
        let x = b.add_var(1.0, 0.0, 1.0, false);
        let y = b.add_var(2.0, 0.0, 1.0, false);
        b.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 1.5);
        let inst = b.build().unwrap();
        let r = solve_lp(&inst, &[], &LpOptions::default()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-9);
        // Force x <= 0.5 -> y = 1, x = 0.5, objective 2.5
        let r = solve_lp(&inst, &[(x, 0.0, 0.5)], &LpOptions::default()).unwrap();
        assert!((r.objective - 2.5).abs() < 1e-9);
        assert!(solve_lp(&inst, &[(x, 1.0, 0.0)], &LpOptions::default()).is_err());
    }

    #[test]
    fn no_rows() {
        let mut b = MilpBuilder::new("free");
        b.add_var(-2.0, -1.0, 3.0, false);
        b.add_var(1.0, -1.0, 3.0, false);
        let r = solve_lp(&b.build().unwrap(), &[], &LpOptions::default()).unwrap();
        assert_eq!(r.x, vec![3.0, -1.0]);
        assert_eq!(r.objective, -7.0);
    }

    #[test]
    fn iteration_limit_reported_as_status() {
        let mut b = MilpBuilder::new("it");
        let v: Vec<usize> = (0..6).map(|_| b.add_var(-1.0, 0.0, 1.0, false)).collect();
        b.add_row(v.iter().map(|&i| (i, 1.0)).collect(), Sense::Ge, 1.0);
        b.add_row(v.iter().map(|&i| (i, 1.0)).collect(), Sense::Le, 3.0);
        let opts = LpOptions {
            iter_limit: 1,
            ..Default::default()
        };
        let r = solve_lp(&b.build().unwrap(), &[], &opts).unwrap();
        assert_eq!(r.status, LpStatus::IterationLimit);
    }

    #[test]
    fn lu_roundtrip() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = DenseLu::factorize(a.clone(), 3).unwrap();
        let mut v = vec![1.0, 2.0, 3.0];
        lu.solve(&mut v);
        let back: Vec<f64> = (0..3)
            .map(|r| (0..3).map(|c| a[r * 3 + c] * v[c]).sum())
            .collect();
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - e).abs() < 1e-12);
        }
        let mut t = vec![1.0, 2.0, 3.0];
        lu.solve_transpose(&mut t);
        let back: Vec<f64> = (0..3)
            .map(|c| (0..3).map(|r| a[r * 3 + c] * t[r]).sum())
            .collect();
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - e).abs() < 1e-12);
        }
    }
}
