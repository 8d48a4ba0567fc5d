//! Training data from local-branching (LB) expert trajectories.
//!
//! Starting from a solution-limit-1 incumbent, each step solves the LB
//! problem (Hamming ball of radius `lb_k` around the incumbent). An
//! improving step yields one record: the expert action (the set of flipped
//! variables), positives harvested from the step's solution pool, and
//! weight-preserving perturbations of the expert action whose best
//! completion improves the incumbent only marginally (negatives).

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::bnb::{solve_milp, SolveOptions, IMPROVEMENT_TOL};
use crate::engine::initial_solution;
use crate::error::{Error, Result};
use crate::milp::{read_instance, MilpInstance, Solution};
use crate::neighborhoods::{build_auxiliary, build_lb_milp, FixingSet};
use crate::rng::{stream_rng, streams, Rng};

pub const DEFAULT_KAPPA_P: f64 = 0.6;
pub const DEFAULT_KAPPA_N: f64 = 0.1;
pub const DEFAULT_NEGATIVES: usize = 9;

#[derive(Debug, Clone)]
pub struct CollectParams {
    /// LB radius.
    pub lb_k: usize,
    /// Seconds per LB solve.
    pub lb_time_limit: f64,
    pub kappa_p: f64,
    pub kappa_n: f64,
    /// Negatives wanted per record.
    pub negatives: usize,
    /// Candidate perturbations tried per wanted negative.
    pub retry_factor: usize,
    /// Seconds per negative-certification solve.
    pub negative_time_limit: f64,
    /// Upper bound on trajectory length.
    pub max_steps: usize,
}

impl CollectParams {
    pub fn new(lb_k: usize, lb_time_limit: f64) -> Self {
        Self {
            lb_k,
            lb_time_limit,
            kappa_p: DEFAULT_KAPPA_P,
            kappa_n: DEFAULT_KAPPA_N,
            negatives: DEFAULT_NEGATIVES,
            retry_factor: 10,
            negative_time_limit: lb_time_limit,
            max_steps: usize::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.kappa_n && self.kappa_n <= self.kappa_p && self.kappa_p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < kappa_n ({}) <= kappa_p ({}) < 1",
                self.kappa_n, self.kappa_p
            )));
        }
        if !(self.lb_time_limit > 0.0) || !(self.negative_time_limit > 0.0) {
            return Err(Error::InvalidArgument(
                "time limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One LB step. Actions are sorted variable indices of flipped binaries;
/// `positives[0]` is the expert action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub instance: String,
    pub incumbent: Vec<f64>,
    pub lb_k: usize,
    pub positives: Vec<Vec<usize>>,
    pub negatives: Vec<Vec<usize>>,
}

impl SampleRecord {
    /// Checks index ranges, ordering and the weight constraints.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.incumbent.len();
        let check = |kind: &str, k: usize, a: &[usize]| -> std::result::Result<(), String> {
            if a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("{kind} {k} is not strictly increasing"));
            }
            if let Some(&i) = a.iter().find(|&&i| i >= n) {
                return Err(format!("{kind} {k} has index {i} outside 0..{n}"));
            }
            Ok(())
        };
        let Some(expert) = self.positives.first() else {
            return Err("no positives".into());
        };
        for (k, a) in self.positives.iter().enumerate() {
            check("positive", k, a)?;
            if a.len() > self.lb_k {
                return Err(format!(
                    "positive {k} flips {} variables, more than lb_k = {}",
                    a.len(),
                    self.lb_k
                ));
            }
        }
        for (k, a) in self.negatives.iter().enumerate() {
            check("negative", k, a)?;
            if a.len() != expert.len() {
                return Err(format!(
                    "negative {k} has weight {} but the expert action has {}",
                    a.len(),
                    expert.len()
                ));
            }
        }
        Ok(())
    }
}

/// Support of `|a - b|` over the integer variables.
pub fn action_between(inst: &MilpInstance, a: &[f64], b: &[f64]) -> Vec<usize> {
    inst.integer_indices()
        .into_iter()
        .filter(|&i| (a[i] - b[i]).abs() > 0.5)
        .collect()
}

/// Expert action first, then every pool solution whose improvement over
/// `incumbent` reaches `kappa_p` times the expert's improvement.
pub fn harvest_positives(
    inst: &MilpInstance,
    pool: &[Solution],
    incumbent: &Solution,
    expert: &Solution,
    kappa_p: f64,
) -> Vec<Vec<usize>> {
    let delta = incumbent.objective - expert.objective;
    let tol = 1e-9 * delta.abs().max(1.0);
    let a_star = action_between(inst, &incumbent.x, &expert.x);
    let mut seen = HashSet::new();
    seen.insert(a_star.clone());
    let mut out = vec![a_star];
    for s in pool {
        if incumbent.objective - s.objective >= kappa_p * delta - tol {
            let a = action_between(inst, &incumbent.x, &s.x);
            if seen.insert(a.clone()) {
                out.push(a);
            }
        }
    }
    out
}

/// Best objective reachable from `incumbent` when only `free` may change.
pub fn best_completion(
    inst: &MilpInstance,
    incumbent: &Solution,
    free: &[usize],
    time_limit: f64,
) -> Result<Solution> {
    let aux = build_auxiliary(inst, incumbent, &FixingSet::complement_of(inst, free))?;
    let res = solve_milp(&aux, &SolveOptions::with_time_limit(time_limit))?;
    Ok(match res.best {
        Some(b) if b.objective < incumbent.objective => b,
        _ => incumbent.clone(),
    })
}

/// Swap count used to perturb an expert action of the given weight.
pub fn swap_count(weight: usize) -> usize {
    ((0.1 * weight as f64).round() as usize).max(1)
}

/// Perturbs `a_star` by swapping `swap_count(|a*|)` of its indices with
/// integer variables outside it and keeps candidates whose best completion
/// improves `incumbent` by at most `kappa_n` times the expert's improvement.
#[allow(clippy::too_many_arguments)]
pub fn generate_negatives(
    inst: &MilpInstance,
    incumbent: &Solution,
    expert: &Solution,
    a_star: &[usize],
    kappa_n: f64,
    count: usize,
    retry_budget: usize,
    time_limit: f64,
    rng: &mut Rng,
) -> Result<Vec<Vec<usize>>> {
    if a_star.is_empty() {
        return Err(Error::InvalidArgument("expert action is empty".into()));
    }
    let delta = incumbent.objective - expert.objective;
    let tol = 1e-9 * delta.abs().max(1.0);
    let in_star: HashSet<usize> = a_star.iter().copied().collect();
    let outside: Vec<usize> = inst
        .integer_indices()
        .into_iter()
        .filter(|i| !in_star.contains(i))
        .collect();
    let s = swap_count(a_star.len()).min(outside.len());
    if s == 0 {
        log::warn!("no variables outside the expert action; no negatives");
        return Ok(Vec::new());
    }
    let mut tried = HashSet::new();
    let mut accepted = Vec::new();
    let mut attempts = 0;
    while accepted.len() < count && attempts < retry_budget {
        attempts += 1;
        let drop: HashSet<usize> = index::sample(rng, a_star.len(), s)
            .into_iter()
            .map(|k| a_star[k])
            .collect();
        let mut cand: Vec<usize> = a_star
            .iter()
            .copied()
            .filter(|i| !drop.contains(i))
            .collect();
        cand.extend(
            index::sample(rng, outside.len(), s)
                .into_iter()
                .map(|k| outside[k]),
        );
        cand.sort_unstable();
        if !tried.insert(cand.clone()) {
            continue;
        }
        let completion = best_completion(inst, incumbent, &cand, time_limit)?;
        if incumbent.objective - completion.objective <= kappa_n * delta + tol {
            accepted.push(cand);
        }
    }
    if accepted.len() < count {
        log::warn!(
            "{} of {count} negatives after {attempts} candidates",
            accepted.len()
        );
    }
    Ok(accepted)
}

/// Runs the LB expert from the initial incumbent until a step fails to improve.
pub fn collect_lb_trajectory(
    inst: &MilpInstance,
    instance_ref: &str,
    params: &CollectParams,
    rng: &mut Rng,
) -> Result<Vec<SampleRecord>> {
    params.validate()?;
    let start = initial_solution(inst, None, params.lb_time_limit)?;
    collect_from(inst, instance_ref, start, params, rng)
}

/// As [`collect_lb_trajectory`] but from a given incumbent.
pub fn collect_from(
    inst: &MilpInstance,
    instance_ref: &str,
    start: Solution,
    params: &CollectParams,
    rng: &mut Rng,
) -> Result<Vec<SampleRecord>> {
    params.validate()?;
    let mut incumbent = start;
    let mut records = Vec::new();
    while records.len() < params.max_steps {
        let lb = build_lb_milp(inst, &incumbent, params.lb_k)?;
        let opts = SolveOptions {
            time_limit: params.lb_time_limit,
            cutoff: Some(incumbent.objective),
            ..Default::default()
        };
        let res = solve_milp(&lb, &opts)?;
        let Some(expert) = res
            .best
            .filter(|b| b.objective < incumbent.objective - IMPROVEMENT_TOL)
        else {
            break;
        };
        let pool: Vec<Solution> = res.pool.into_iter().map(|e| e.solution).collect();
        let positives = harvest_positives(inst, &pool, &incumbent, &expert, params.kappa_p);
        let negatives = generate_negatives(
            inst,
            &incumbent,
            &expert,
            &positives[0],
            params.kappa_n,
            params.negatives,
            params.negatives * params.retry_factor,
            params.negative_time_limit,
            rng,
        )?;
        records.push(SampleRecord {
            instance: instance_ref.to_string(),
            incumbent: incumbent.x.clone(),
            lb_k: params.lb_k,
            positives,
            negatives,
        });
        incumbent = expert;
    }
    Ok(records)
}

/// Collects trajectories for several instance files in parallel. Instances
/// that fail are reported and skipped.
pub fn collect_dataset(
    paths: &[PathBuf],
    params: &CollectParams,
    seed: u64,
) -> (Vec<SampleRecord>, Vec<(PathBuf, Error)>) {
    use rayon::prelude::*;
    let results: Vec<(PathBuf, Result<Vec<SampleRecord>>)> = paths
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let mut rng = stream_rng(seed.wrapping_add(k as u64), streams::COLLECT);
            let out = read_instance(p).and_then(|inst| {
                collect_lb_trajectory(&inst, &p.display().to_string(), params, &mut rng)
            });
            (p.clone(), out)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in results {
        match r {
            Ok(mut recs) => records.append(&mut recs),
            Err(e) => failures.push((p, e)),
        }
    }
    (records, failures)
}

pub fn write_dataset(records: &[SampleRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut f, r).map_err(|e| Error::Io(e.into()))?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = out.len();
        let r: SampleRecord = serde_json::from_str(&line).map_err(|e| Error::Dataset {
            record,
            message: e.to_string(),
        })?;
        r.validate()
            .map_err(|message| Error::Dataset { record, message })?;
        out.push(r);
    }
    Ok(out)
}
