//! Fixing neighborhoods, auxiliary problems, local-branching problems and
//! the random / score-driven selectors that decide which variables stay free.
//!
//! Neighborhood sizes throughout the crate count the *unfixed* integer
//! variables.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::milp::{MilpInstance, Sense, Solution};
use crate::rng::Rng;

/// Sorted, deduplicated indices of the variables fixed to their incumbent values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FixingSet {
    indices: Vec<usize>,
}

impl FixingSet {
    /// Validates that every index is an integer variable of `inst`.
    pub fn new(inst: &MilpInstance, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        let set = Self { indices };
        set.check_against(inst)?;
        Ok(set)
    }

    /// Every integer variable except `free`.
    pub fn complement_of(inst: &MilpInstance, free: &[usize]) -> Self {
        let mut keep_free = vec![false; inst.n()];
        for &i in free {
            keep_free[i] = true;
        }
        Self {
            indices: (0..inst.n())
                .filter(|&i| inst.is_integer()[i] && !keep_free[i])
                .collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub(crate) fn check_against(&self, inst: &MilpInstance) -> Result<()> {
        for &i in &self.indices {
            if i >= inst.n() {
                return Err(Error::InvalidArgument(format!(
                    "fixing index {i} out of range (n = {})",
                    inst.n()
                )));
            }
            if !inst.is_integer()[i] {
                return Err(Error::InvalidArgument(format!(
                    "fixing index {i} is a continuous variable"
                )));
            }
        }
        Ok(())
    }
}

/// `A(M, xbar, F)`: `inst` with `l_i = u_i = xbar_i` for every `i` in `fixing`.
pub fn build_auxiliary(
    inst: &MilpInstance,
    incumbent: &Solution,
    fixing: &FixingSet,
) -> Result<MilpInstance> {
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
    inst.with_bounds(lower, upper)
}

/// `inst` plus the local-branching row `||x - xbar||_1 <= radius` over the
/// binary variables:
/// `sum_{xbar_i = 0} x_i - sum_{xbar_i = 1} x_i <= radius - |{i : xbar_i = 1}|`.
pub fn build_lb_milp(
    inst: &MilpInstance,
    incumbent: &Solution,
    radius: usize,
) -> Result<MilpInstance> {
    if !inst.is_binary() {
        return Err(Error::Unsupported(
            "local branching needs every integer variable to be binary".into(),
        ));
    }
    if incumbent.len() != inst.n() {
        return Err(Error::dim("incumbent", inst.n(), incumbent.len()));
    }
    let mut row = Vec::new();
    let mut ones = 0usize;
    for i in inst.integer_indices() {
        if incumbent.x[i] > 0.5 {
            row.push((i, -1.0));
            ones += 1;
        } else {
            row.push((i, 1.0));
        }
    }
    let mut lb = inst.with_extra_row(row, Sense::Le, radius as f64 - ones as f64)?;
    lb.set_name(format!("{}+lb{radius}", inst.name()));
    Ok(lb)
}

/// Fixes every integer variable except `unfix` of them, chosen uniformly
/// without replacement.
pub fn random_unfix(inst: &MilpInstance, unfix: usize, rng: &mut Rng) -> Result<FixingSet> {
    let ints = inst.integer_indices();
    if unfix > ints.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot unfix {unfix} of {} integer variables",
            ints.len()
        )));
    }
    let free: Vec<usize> = index::sample(rng, ints.len(), unfix)
        .into_iter()
        .map(|k| ints[k])
        .collect();
    Ok(FixingSet::complement_of(inst, &free))
}

/// Fixes every integer variable except `unfix` of them, drawn sequentially
/// without replacement with probability proportional to `scores` (indexed
/// by variable). When fewer than `unfix` integer variables have a positive
/// score, the remaining picks are uniform among the zero-score ones.
pub fn score_unfix(
    inst: &MilpInstance,
    scores: &[f64],
    unfix: usize,
    rng: &mut Rng,
) -> Result<FixingSet> {
    if scores.len() != inst.n() {
        return Err(Error::dim("scores", inst.n(), scores.len()));
    }
    let ints = inst.integer_indices();
    if unfix > ints.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot unfix {unfix} of {} integer variables",
            ints.len()
        )));
    }
    if let Some(&i) = ints
        .iter()
        .find(|&&i| !(scores[i] >= 0.0) || !scores[i].is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "score of variable {i} is {}",
            scores[i]
        )));
    }
    let (positive, zero): (Vec<usize>, Vec<usize>) = ints.iter().partition(|&&i| scores[i] > 0.0);

    let mut free = Vec::with_capacity(unfix);
    let mut pool = positive;
    let mut weights: Vec<f64> = pool.iter().map(|&i| scores[i]).collect();
    let mut total: f64 = weights.iter().sum();
    while free.len() < unfix && !pool.is_empty() {
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = pool.len() - 1;
        for (k, &w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                pick = k;
                break;
            }
        }
        free.push(pool.swap_remove(pick));
        weights.swap_remove(pick);
        // Recompute rather than subtract to avoid drift.
        total = weights.iter().sum();
    }
    if free.len() < unfix {
        let extra = index::sample(rng, zero.len(), unfix - free.len());
        free.extend(extra.into_iter().map(|k| zero[k]));
    }
    Ok(FixingSet::complement_of(inst, &free))
}
