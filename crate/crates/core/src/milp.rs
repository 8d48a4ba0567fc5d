//! MILP data model: sparse instances, solutions, feasibility checks and the
//! variable-constraint bipartite view.
//!
//! Instances are minimization problems
//!
//! ```text
//! min c'x  s.t.  a_j'x (<=|>=|=) b_j,  l <= x <= u,  x_i integer for i in I
//! ```
//!
//! stored with the coefficient matrix in compressed row layout plus a
//! column-major mirror. Instances are immutable once built; the matrix is
//! shared behind an `Arc` so bound-modified copies are cheap.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "LE")]
    Le,
    #[serde(rename = "GE")]
    Ge,
    #[serde(rename = "EQ")]
    Eq,
}

impl Sense {
    /// Amount by which `activity` violates `activity sense rhs` (0 when satisfied).
    #[inline]
    pub fn violation(self, activity: f64, rhs: f64) -> f64 {
        match self {
            Sense::Le => (activity - rhs).max(0.0),
            Sense::Ge => (rhs - activity).max(0.0),
            Sense::Eq => (activity - rhs).abs(),
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// Sparse matrix with both row-major and column-major access.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_start: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    col_start: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists. Entries are sorted by
    /// column and explicit zeros dropped; duplicate columns are rejected.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let mut row_start = Vec::with_capacity(n_rows + 1);
        let mut row_cols = Vec::new();
        let mut row_vals = Vec::new();
        row_start.push(0);
        for (j, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(col, _)| col);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::InvalidInstance(format!(
                        "row {j} has duplicate column index {}",
                        w[0].0
                    )));
                }
            }
            for (col, val) in row {
                if col >= n_cols {
                    return Err(Error::InvalidInstance(format!(
                        "row {j} references column {col} but n = {n_cols}"
                    )));
                }
                if !val.is_finite() {
                    return Err(Error::NonFinite(format!("coefficient ({j}, {col})")));
                }
                if val != 0.0 {
                    row_cols.push(col);
                    row_vals.push(val);
                }
            }
            row_start.push(row_cols.len());
        }

        let nnz = row_cols.len();
        let mut counts = vec![0usize; n_cols + 1];
        for &col in &row_cols {
            counts[col + 1] += 1;
        }
        for i in 0..n_cols {
            counts[i + 1] += counts[i];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0.0; nnz];
        for j in 0..n_rows {
            for k in row_start[j]..row_start[j + 1] {
                let col = row_cols[k];
                col_rows[fill[col]] = j;
                col_vals[fill[col]] = row_vals[k];
                fill[col] += 1;
            }
        }

        Ok(Self {
            n_rows,
            n_cols,
            row_start,
            row_cols,
            row_vals,
            col_start,
            col_rows,
            col_vals,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_cols.len()
    }

    /// Column indices and values of row `j`, sorted by column.
    #[inline]
    pub fn row(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.row_start[j]..self.row_start[j + 1];
        (&self.row_cols[range.clone()], &self.row_vals[range])
    }

    /// Row indices and values of column `i`, sorted by row.
    #[inline]
    pub fn col(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.col_start[i]..self.col_start[i + 1];
        (&self.col_rows[range.clone()], &self.col_vals[range])
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_start
    }

    /// `A x` evaluated row by row in column order.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|j| {
                let (cols, vals) = self.row(j);
                cols.iter().zip(vals).map(|(&i, &a)| a * x[i]).sum()
            })
            .collect()
    }
}

/// A mixed-integer linear program in minimization form.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance {
    name: String,
    matrix: Arc<SparseMatrix>,
    sense: Arc<Vec<Sense>>,
    rhs: Arc<Vec<f64>>,
    obj: Arc<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    is_integer: Arc<Vec<bool>>,
}

impl MilpInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        matrix: SparseMatrix,
        sense: Vec<Sense>,
        rhs: Vec<f64>,
        obj: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        is_integer: Vec<bool>,
    ) -> Result<Self> {
        let inst = Self {
            name: name.into(),
            matrix: Arc::new(matrix),
            sense: Arc::new(sense),
            rhs: Arc::new(rhs),
            obj: Arc::new(obj),
            lower,
            upper,
            is_integer: Arc::new(is_integer),
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks every structural invariant of the instance.
    pub fn validate(&self) -> Result<()> {
        let n = self.matrix.n_cols();
        let m = self.matrix.n_rows();
        let check_len = |what: &str, len: usize, expected: usize| {
            if len != expected {
                Err(Error::dim(what, expected, len))
            } else {
                Ok(())
            }
        };
        check_len("sense", self.sense.len(), m)?;
        check_len("b", self.rhs.len(), m)?;
        check_len("c", self.obj.len(), n)?;
        check_len("l", self.lower.len(), n)?;
        check_len("u", self.upper.len(), n)?;
        check_len("is_integer", self.is_integer.len(), n)?;

        let offsets = self.matrix.row_offsets();
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInstance("row offsets decrease".into()));
        }
        for (what, v) in [("b", &*self.rhs), ("c", &*self.obj)] {
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("{what}[{k}]")));
            }
        }
        for i in 0..n {
            let (l, u) = (self.lower[i], self.upper[i]);
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::NonFinite(format!("bounds of variable {i}")));
            }
            if l > u {
                return Err(Error::InvalidInstance(format!(
                    "variable {i} has l = {l} > u = {u}"
                )));
            }
            if self.is_integer[i] && (l.fract() != 0.0 || u.fract() != 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "integer variable {i} has fractional bounds [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn sense(&self) -> &[Sense] {
        &self.sense
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn obj(&self) -> &[f64] {
        &self.obj
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_integer(&self) -> &[bool] {
        &self.is_integer
    }

    /// Count of integer variables.
    pub fn n_integer(&self) -> usize {
        self.is_integer.iter().filter(|&&b| b).count()
    }

    pub fn integer_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_integer[i]).collect()
    }

    /// True when every integer variable has bounds within `{0, 1}`.
    pub fn is_binary(&self) -> bool {
        (0..self.n()).all(|i| !self.is_integer[i] || (self.lower[i] >= 0.0 && self.upper[i] <= 1.0))
    }

    /// Copy of this instance with replaced variable bounds. Matrix, rows and
    /// objective are shared with `self`.
    pub fn with_bounds(&self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let inst = Self {
            name: self.name.clone(),
            matrix: Arc::clone(&self.matrix),
            sense: Arc::clone(&self.sense),
            rhs: Arc::clone(&self.rhs),
            obj: Arc::clone(&self.obj),
            lower,
            upper,
            is_integer: Arc::clone(&self.is_integer),
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Copy with one extra constraint row appended.
    pub fn with_extra_row(&self, row: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = (0..self.m())
            .map(|j| {
                let (cols, vals) = self.matrix.row(j);
                cols.iter().copied().zip(vals.iter().copied()).collect()
            })
            .collect();
        rows.push(row);
        let mut senses = self.sense.to_vec();
        senses.push(sense);
        let mut b = self.rhs.to_vec();
        b.push(rhs);
        Self::new(
            self.name.clone(),
            SparseMatrix::from_rows(self.n(), rows)?,
            senses,
            b,
            self.obj.to_vec(),
            self.lower.clone(),
            self.upper.clone(),
            self.is_integer.to_vec(),
        )
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn evaluate_objective(&self, x: &[f64]) -> Result<f64> {
        evaluate_objective(self, x)
    }

    pub fn to_bipartite_graph(&self) -> BipartiteGraph {
        to_bipartite_graph(self)
    }

    pub fn check_feasibility(&self, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
        check_feasibility(self, x, tol)
    }
}

/// Incremental construction of an instance, one variable or row at a time.
#[derive(Debug, Default, Clone)]
pub struct MilpBuilder {
    name: String,
    obj: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    is_integer: Vec<bool>,
    rows: Vec<Vec<(usize, f64)>>,
    sense: Vec<Sense>,
    rhs: Vec<f64>,
}

impl MilpBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, obj: f64, lower: f64, upper: f64, integer: bool) -> usize {
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.is_integer.push(integer);
        self.obj.len() - 1
    }

    pub fn add_binary(&mut self, obj: f64) -> usize {
        self.add_var(obj, 0.0, 1.0, true)
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(coeffs);
        self.sense.push(sense);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn build(self) -> Result<MilpInstance> {
        let matrix = SparseMatrix::from_rows(self.obj.len(), self.rows)?;
        MilpInstance::new(
            self.name,
            matrix,
            self.sense,
            self.rhs,
            self.obj,
            self.lower,
            self.upper,
            self.is_integer,
        )
    }
}

/// A dense assignment together with its cached objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl Solution {
    pub fn new(inst: &MilpInstance, x: Vec<f64>) -> Result<Self> {
        let objective = evaluate_objective(inst, &x)?;
        Ok(Self { x, objective })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// `c'x` accumulated in index order.
pub fn evaluate_objective(inst: &MilpInstance, x: &[f64]) -> Result<f64> {
    if x.len() != inst.n() {
        return Err(Error::dim("solution vector", inst.n(), x.len()));
    }
    let mut acc = 0.0;
    for (c, v) in inst.obj().iter().zip(x) {
        acc += c * v;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    Row { index: usize, amount: f64 },
    Bound { index: usize, amount: f64 },
    Integrality { index: usize, amount: f64 },
}

impl Violation {
    pub fn amount(&self) -> f64 {
        match *self {
            Violation::Row { amount, .. }
            | Violation::Bound { amount, .. }
            | Violation::Integrality { amount, .. } => amount,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_violation: f64,
    /// Every row, bound or integrality condition violated by more than the tolerance.
    pub violations: Vec<Violation>,
}

pub fn check_feasibility(inst: &MilpInstance, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
    if x.len() != inst.n() {
        return Err(Error::dim("solution vector", inst.n(), x.len()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be >= 0"
        )));
    }
    let mut max_violation: f64 = 0.0;
    let mut violations = Vec::new();
    let mut record = |v: Violation| {
        let amount = v.amount();
        max_violation = max_violation.max(amount);
        if amount > tol || amount.is_nan() {
            violations.push(v);
        }
    };

    let matrix = inst.matrix();
    for j in 0..inst.m() {
        let (cols, vals) = matrix.row(j);
        let activity: f64 = cols.iter().zip(vals).map(|(&i, &a)| a * x[i]).sum();
        let amount = inst.sense()[j].violation(activity, inst.rhs()[j]);
        if amount > 0.0 || amount.is_nan() {
            record(Violation::Row { index: j, amount });
        }
    }
    for (i, &v) in x.iter().enumerate() {
        let amount = (inst.lower()[i] - v).max(v - inst.upper()[i]).max(0.0);
        if amount > 0.0 || v.is_nan() {
            record(Violation::Bound {
                index: i,
                amount: if v.is_nan() { f64::INFINITY } else { amount },
            });
        }
        if inst.is_integer()[i] {
            let amount = (v - v.round()).abs();
            if amount > 0.0 {
                record(Violation::Integrality { index: i, amount });
            }
        }
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        max_violation,
        violations,
    })
}

/// Variable-constraint bipartite graph: one edge per nonzero `A[j][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    pub n_var: usize,
    pub n_con: usize,
    /// `(variable, constraint, coefficient)`, ordered by constraint then variable.
    pub edges: Vec<(usize, usize, f64)>,
    pub var_degree: Vec<usize>,
    pub con_degree: Vec<usize>,
}

impl BipartiteGraph {
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
}

pub fn to_bipartite_graph(inst: &MilpInstance) -> BipartiteGraph {
    let matrix = inst.matrix();
    let mut edges = Vec::with_capacity(matrix.nnz());
    let mut var_degree = vec![0; inst.n()];
    let mut con_degree = vec![0; inst.m()];
    for j in 0..inst.m() {
        let (cols, vals) = matrix.row(j);
        con_degree[j] = cols.len();
        for (&i, &a) in cols.iter().zip(vals) {
            edges.push((i, j, a));
            var_degree[i] += 1;
        }
    }
    BipartiteGraph {
        n_var: inst.n(),
        n_con: inst.m(),
        edges,
        var_degree,
        con_degree,
    }
}

// ---------------------------------------------------------------------------
// Instance files

pub const INSTANCE_FORMAT_VERSION: &str = "tlns-1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: String,
    name: String,
    n: usize,
    m: usize,
    sense: Vec<Sense>,
    b: Vec<f64>,
    c: Vec<f64>,
    l: Vec<f64>,
    u: Vec<f64>,
    is_integer: Vec<bool>,
    rows: Vec<RowEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowEntry {
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Serializes an instance to the `tlns-1` JSON schema.
pub fn instance_to_json(inst: &MilpInstance) -> String {
    let matrix = inst.matrix();
    let file = InstanceFile {
        format_version: INSTANCE_FORMAT_VERSION.to_string(),
        name: inst.name().to_string(),
        n: inst.n(),
        m: inst.m(),
        sense: inst.sense().to_vec(),
        b: inst.rhs().to_vec(),
        c: inst.obj().to_vec(),
        l: inst.lower().to_vec(),
        u: inst.upper().to_vec(),
        is_integer: inst.is_integer().to_vec(),
        rows: (0..inst.m())
            .map(|j| {
                let (cols, vals) = matrix.row(j);
                RowEntry {
                    cols: cols.to_vec(),
                    vals: vals.to_vec(),
                }
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<MilpInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if file.format_version != INSTANCE_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            expected: INSTANCE_FORMAT_VERSION.into(),
            found: file.format_version,
        });
    }
    let field_len = |field: &str, len: usize, expected: usize| {
        if len == expected {
            Ok(())
        } else {
            Err(Error::Parse {
                context: format!("field `{field}`"),
                message: format!("expected length {expected}, found {len}"),
            })
        }
    };
    field_len("sense", file.sense.len(), file.m)?;
    field_len("b", file.b.len(), file.m)?;
    field_len("rows", file.rows.len(), file.m)?;
    field_len("c", file.c.len(), file.n)?;
    field_len("l", file.l.len(), file.n)?;
    field_len("u", file.u.len(), file.n)?;
    field_len("is_integer", file.is_integer.len(), file.n)?;
    let mut rows = Vec::with_capacity(file.m);
    for (j, row) in file.rows.into_iter().enumerate() {
        field_len(&format!("rows[{j}].vals"), row.vals.len(), row.cols.len())?;
        rows.push(row.cols.into_iter().zip(row.vals).collect());
    }
    let matrix = SparseMatrix::from_rows(file.n, rows)?;
    MilpInstance::new(
        file.name,
        matrix,
        file.sense,
        file.b,
        file.c,
        file.l,
        file.u,
        file.is_integer,
    )
}

pub fn write_instance(inst: &MilpInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<MilpInstance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}
