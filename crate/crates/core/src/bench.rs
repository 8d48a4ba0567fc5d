//! Benchmark harness: primal gap and primal integral, batch runs over
//! (instance, method, seed) cells, CSV results, JSONL run logs and SVG
//! primal-bound plots.
//!
//! Config files are JSON:
//!
//! ```json
//! {
//!   "instances": ["data/sc-0.json", "data/sc-1.json"],
//!   "methods": [
//!     {"name": "R-LNS", "engine": "lns", "policy": "random", "r": 100},
//!     {"name": "R-TLNS", "engine": "tlns", "policy": "random", "r": 200, "r2": 40}
//!   ],
//!   "time_limit": 60,
//!   "seeds": [0, 1],
//!   "bks": {"policy": "computed", "extended_factor": 3.6},
//!   "clock": "wall",
//!   "out_dir": "bench-out"
//! }
//! ```
//!
//! Under `"clock": "iterations"` time limits count exact sub-solves (branch
//! and bound nodes for the `exact` engine) and the phase-time columns of the
//! CSV are left empty, which makes `results.csv` reproducible bit for bit.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bnb::{solve_milp, SolveOptions};
use crate::engine::{
    initial_solution, run_lns, run_tlns, ClockMode, Event, EventKind, FixingHeuristic, Layer,
    LearnedFixer, LnsParams, RandomFixer, RunLog, DEFAULT_COUNT_LIMIT, DEFAULT_ETA_INNER,
    DEFAULT_ETA_OUTER, DEFAULT_SUB_TIME_LIMIT,
};
use crate::error::{Error, Result};
use crate::milp::{read_instance, MilpInstance, Solution};
use crate::policy::{load_weights, SgtWeights};
use crate::rng::{stream_rng, streams};

/// Version tag of the CSV layout below.
pub const RESULTS_SCHEMA_VERSION: &str = "tlns-results-1";
pub const RESULTS_HEADER: &str = "instance,method,seed,pb_at_t,pi,iterations,sub_solves,t_presolve,t_subsolve,t_policy,t_postsolve,t_overhead";

/// Normalized distance between a primal bound and the best known value.
pub fn primal_gap(pb: f64, bks: f64) -> f64 {
    if pb == 0.0 && bks == 0.0 {
        0.0
    } else if pb * bks < 0.0 {
        1.0
    } else {
        (pb - bks).abs() / pb.abs().max(bks.abs())
    }
}

/// Integral of the primal gap over `[0, horizon]` for a step trajectory of
/// `(time, objective)` points; the gap is 1 before the first point.
pub fn primal_integral_of(points: &[(f64, f64)], bks: f64, horizon: f64) -> Result<f64> {
    if !bks.is_finite() {
        return Err(Error::Bench(format!(
            "best known value {bks} is not finite"
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::Bench(format!("horizon {horizon} must be positive")));
    }
    let mut total = 0.0;
    let mut t_prev = 0.0;
    let mut gap = 1.0;
    for &(t, pb) in points {
        let t = t.clamp(0.0, horizon);
        if t < t_prev {
            return Err(Error::Bench("trajectory times decrease".into()));
        }
        total += gap * (t - t_prev);
        t_prev = t;
        gap = primal_gap(pb, bks);
    }
    total += gap * (horizon - t_prev);
    Ok(total)
}

pub fn primal_integral(log: &RunLog, bks: f64, horizon: f64) -> Result<f64> {
    primal_integral_of(&log.pb_trajectory(), bks, horizon)
}

/// Last incumbent objective at or before `t`.
pub fn pb_at(log: &RunLog, t: f64) -> Option<f64> {
    log.incumbents()
        .take_while(|e| e.elapsed <= t)
        .last()
        .map(|e| e.objective)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Lns,
    Tlns,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Random,
    Learned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: String,
    pub engine: EngineKind,
    #[serde(default)]
    pub policy: PolicyKind,
    #[serde(default)]
    pub weights: Option<PathBuf>,
    /// Neighborhood size of LNS, or of the outer TLNS layer.
    #[serde(default = "default_r")]
    pub r: usize,
    /// Inner TLNS neighborhood size.
    #[serde(default = "default_r2")]
    pub r2: usize,
    #[serde(default = "default_eta1")]
    pub eta1: f64,
    #[serde(default = "default_eta2")]
    pub eta2: f64,
    /// Count limit of LNS or of the inner TLNS layer; `null` means unlimited.
    #[serde(default = "default_count_limit")]
    pub count_limit: Option<usize>,
    #[serde(default = "default_sub_time_limit")]
    pub sub_time_limit: f64,
    #[serde(default)]
    pub sub_node_limit: Option<u64>,
}

fn default_r() -> usize {
    100
}
fn default_r2() -> usize {
    30
}
fn default_eta1() -> f64 {
    DEFAULT_ETA_OUTER
}
fn default_eta2() -> f64 {
    DEFAULT_ETA_INNER
}
fn default_count_limit() -> Option<usize> {
    Some(DEFAULT_COUNT_LIMIT)
}
fn default_sub_time_limit() -> f64 {
    DEFAULT_SUB_TIME_LIMIT
}

impl MethodSpec {
    pub fn new(name: impl Into<String>, engine: EngineKind) -> Self {
        Self {
            name: name.into(),
            engine,
            policy: PolicyKind::Random,
            weights: None,
            r: default_r(),
            r2: default_r2(),
            eta1: default_eta1(),
            eta2: default_eta2(),
            count_limit: default_count_limit(),
            sub_time_limit: default_sub_time_limit(),
            sub_node_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum BksPolicy {
    /// Best known objective per instance file path.
    Provided { values: BTreeMap<String, f64> },
    /// Minimum over an extended-budget pre-pass and all main runs.
    Computed {
        #[serde(default = "default_extended_factor")]
        extended_factor: f64,
    },
}

fn default_extended_factor() -> f64 {
    3.6
}

impl Default for BksPolicy {
    fn default() -> Self {
        BksPolicy::Computed {
            extended_factor: default_extended_factor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub instances: Vec<PathBuf>,
    pub methods: Vec<MethodSpec>,
    pub time_limit: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub bks: BksPolicy,
    #[serde(default)]
    pub clock: ClockMode,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker count; `TLNS_THREADS` caps it further.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Time limit of the initial solution-limit-1 solve.
    #[serde(default = "default_initial_time_limit")]
    pub initial_time_limit: f64,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("bench-out")
}
fn default_initial_time_limit() -> f64 {
    60.0
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "bench config".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit > 0.0) {
            return Err(Error::Bench("time_limit must be positive".into()));
        }
        let mut names = HashSet::new();
        for m in &self.methods {
            if !names.insert(&m.name) {
                return Err(Error::Bench(format!("duplicate method name `{}`", m.name)));
            }
            if m.policy == PolicyKind::Learned && m.weights.is_none() {
                return Err(Error::Bench(format!(
                    "method `{}` uses the learned policy but has no weights",
                    m.name
                )));
            }
        }
        if self.methods.is_empty() || self.seeds.is_empty() {
            return Err(Error::Bench("need at least one method and one seed".into()));
        }
        Ok(())
    }
}

/// Runs one method on one instance from `x0`.
pub fn run_method(
    inst: &MilpInstance,
    x0: &Solution,
    method: &MethodSpec,
    weights: Option<Arc<SgtWeights>>,
    time_limit: f64,
    clock: ClockMode,
    seed: u64,
) -> Result<RunLog> {
    let mut rng = stream_rng(seed, streams::ENGINE);
    let mut fixer: Box<dyn FixingHeuristic> = match method.policy {
        PolicyKind::Random => Box::new(RandomFixer),
        PolicyKind::Learned => {
            let w = weights.ok_or_else(|| {
                Error::Bench(format!("method `{}` has no weights loaded", method.name))
            })?;
            Box::new(LearnedFixer::new(w)?)
        }
    };
    let params = |r: usize, eta: f64| LnsParams {
        r,
        eta,
        count_limit: method.count_limit.unwrap_or(usize::MAX),
        sub_time_limit: method.sub_time_limit,
        time_limit,
        sub_node_limit: method.sub_node_limit,
        clock,
        stop: None,
    };
    match method.engine {
        EngineKind::Lns => {
            let (_, log) = run_lns(
                inst,
                x0,
                fixer.as_mut(),
                &params(method.r, method.eta1),
                &mut rng,
            )?;
            Ok(log)
        }
        EngineKind::Tlns => {
            let outer = params(method.r, method.eta1);
            let inner = params(method.r2, method.eta2);
            let (_, log) = run_tlns(inst, x0, fixer.as_mut(), &outer, &inner, &mut rng)?;
            Ok(log)
        }
        EngineKind::Exact => exact_log(inst, x0, time_limit, clock),
    }
}

/// Branch and bound from scratch; `x0` is logged at time zero for parity
/// with the LNS engines. Under the iteration clock, time counts nodes.
fn exact_log(
    inst: &MilpInstance,
    x0: &Solution,
    time_limit: f64,
    clock: ClockMode,
) -> Result<RunLog> {
    let opts = match clock {
        ClockMode::Wall => SolveOptions::with_time_limit(time_limit),
        ClockMode::Iterations => SolveOptions {
            node_limit: Some(time_limit.max(1.0) as u64),
            ..Default::default()
        },
    };
    let t = std::time::Instant::now();
    let res = solve_milp(inst, &opts)?;
    let mut log = RunLog {
        clock,
        ..Default::default()
    };
    let mut push = |elapsed: f64, wall: f64, objective: f64, sol: Option<Solution>| {
        log.events.push(Event {
            elapsed,
            wall,
            kind: EventKind::Incumbent,
            objective,
            r_current: inst.n_integer(),
            layer: Layer::Single,
            solution: sol,
        });
    };
    push(0.0, 0.0, x0.objective, Some(x0.clone()));
    let mut best = x0.objective;
    for entry in &res.pool {
        if entry.solution.objective < best - crate::bnb::IMPROVEMENT_TOL {
            best = entry.solution.objective;
            let at = match clock {
                ClockMode::Wall => entry.elapsed,
                ClockMode::Iterations => entry.nodes as f64,
            };
            push(at, entry.elapsed, best, Some(entry.solution.clone()));
        }
    }
    log.iterations = res.nodes;
    log.sub_solves = 1;
    log.phase_times.sub_solve = t.elapsed().as_secs_f64();
    Ok(log)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub method: String,
    pub seed: u64,
    pub pb_at_t: f64,
    pub pi: f64,
    pub iterations: u64,
    pub sub_solves: u64,
    pub log: RunLog,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<ResultRow>,
    pub bks: BTreeMap<String, f64>,
    /// Instances that failed to load or solve, with the reason.
    pub failures: Vec<(String, String)>,
    pub csv_path: PathBuf,
}

impl BenchReport {
    /// Mean primal integral per method, in config order.
    pub fn mean_pi(&self) -> Vec<(String, f64)> {
        let mut order: Vec<String> = Vec::new();
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            if !sums.contains_key(&r.method) {
                order.push(r.method.clone());
            }
            let e = sums.entry(r.method.clone()).or_default();
            e.0 += r.pi;
            e.1 += 1;
        }
        order
            .into_iter()
            .map(|m| {
                let (s, k) = sums[&m];
                (m.clone(), s / k as f64)
            })
            .collect()
    }
}

fn instance_key(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn thread_count(config: &BenchConfig) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let env_cap = std::env::var("TLNS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0);
    let mut n = config.threads.unwrap_or(available);
    if let Some(cap) = env_cap {
        n = n.min(cap);
    }
    n.max(1)
}

fn fmt_phase(clock: ClockMode, v: f64) -> String {
    match clock {
        ClockMode::Wall => format!("{v:.6}"),
        ClockMode::Iterations => String::new(),
    }
}

pub fn results_csv(rows: &[ResultRow], clock: ClockMode) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(RESULTS_HEADER.split(','))
        .map_err(|e| Error::Bench(e.to_string()))?;
    for r in rows {
        let p = &r.log.phase_times;
        w.write_record([
            r.instance.clone(),
            r.method.clone(),
            r.seed.to_string(),
            format!("{}", r.pb_at_t),
            format!("{}", r.pi),
            r.iterations.to_string(),
            r.sub_solves.to_string(),
            fmt_phase(clock, p.presolve),
            fmt_phase(clock, p.sub_solve),
            fmt_phase(clock, p.policy),
            fmt_phase(clock, p.postsolve),
            fmt_phase(clock, p.overhead),
        ])
        .map_err(|e| Error::Bench(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Bench(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

struct Loaded {
    key: String,
    path: PathBuf,
    inst: MilpInstance,
    x0: Solution,
}

/// Executes every (instance, method, seed) cell and writes `results.csv`,
/// `runs/*.jsonl` and `plots/*.svg` under `config.out_dir`.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut weights: BTreeMap<String, Arc<SgtWeights>> = BTreeMap::new();
    for m in &config.methods {
        if let Some(path) = &m.weights {
            let w = load_weights(path).map_err(|e| {
                Error::Bench(format!(
                    "weights for `{}` ({}): {e}",
                    m.name,
                    path.display()
                ))
            })?;
            weights.insert(m.name.clone(), Arc::new(w));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(config))
        .build()
        .map_err(|e| Error::Bench(e.to_string()))?;

    let loaded: Vec<std::result::Result<Loaded, (String, String)>> = pool.install(|| {
        config
            .instances
            .par_iter()
            .map(|path| {
                let key = instance_key(path);
                let inst = read_instance(path).map_err(|e| (key.clone(), e.to_string()))?;
                let x0 = initial_solution(&inst, None, config.initial_time_limit)
                    .map_err(|e| (key.clone(), e.to_string()))?;
                Ok(Loaded {
                    key,
                    path: path.clone(),
                    inst,
                    x0,
                })
            })
            .collect()
    });
    let mut failures = Vec::new();
    let mut instances = Vec::new();
    for l in loaded {
        match l {
            Ok(l) => instances.push(l),
            Err(f) => {
                log::warn!("skipping instance {}: {}", f.0, f.1);
                failures.push(f);
            }
        }
    }

    let run_cells = |limit: f64, seeds: &[u64]| -> Vec<(usize, usize, u64, Result<RunLog>)> {
        let cells: Vec<(usize, usize, u64)> = (0..instances.len())
            .flat_map(|i| {
                (0..config.methods.len()).flat_map(move |m| seeds.iter().map(move |&s| (i, m, s)))
            })
            .collect();
        pool.install(|| {
            cells
                .par_iter()
                .map(|&(i, m, s)| {
                    let method = &config.methods[m];
                    let l = &instances[i];
                    let log = run_method(
                        &l.inst,
                        &l.x0,
                        method,
                        weights.get(&method.name).cloned(),
                        limit,
                        config.clock,
                        s,
                    );
                    (i, m, s, log)
                })
                .collect()
        })
    };

    let main = run_cells(config.time_limit, &config.seeds);
    let mut bks: BTreeMap<String, f64> = BTreeMap::new();
    match &config.bks {
        BksPolicy::Provided { values } => {
            for l in &instances {
                let v = values
                    .get(&l.key)
                    .or_else(|| values.get(&l.path.display().to_string()))
                    .ok_or_else(|| Error::Bench(format!("no best known value for {}", l.key)))?;
                bks.insert(l.key.clone(), *v);
            }
        }
        BksPolicy::Computed { extended_factor } => {
            let pre = run_cells(
                config.time_limit * extended_factor.max(1.0),
                &config.seeds[..1],
            );
            for (i, _, _, log) in pre.iter().chain(main.iter()) {
                if let Ok(log) = log {
                    if let Some(v) = log.final_objective() {
                        let e = bks
                            .entry(instances[*i].key.clone())
                            .or_insert(f64::INFINITY);
                        *e = e.min(v);
                    }
                }
            }
        }
    }

    std::fs::create_dir_all(config.out_dir.join("runs"))?;
    std::fs::create_dir_all(config.out_dir.join("plots"))?;
    let mut rows = Vec::new();
    for (i, m, s, log) in main {
        let key = &instances[i].key;
        let method = &config.methods[m];
        let log = match log {
            Ok(log) => log,
            Err(e) => {
                failures.push((key.clone(), format!("{} seed {s}: {e}", method.name)));
                continue;
            }
        };
        let b = bks[key];
        let pi = primal_integral(&log, b, config.time_limit)?;
        let pb = pb_at(&log, config.time_limit).unwrap_or(f64::NAN);
        let file = format!("{key}__{}__{s}.jsonl", sanitize(&method.name));
        log.write_jsonl(config.out_dir.join("runs").join(file))?;
        rows.push(ResultRow {
            instance: key.clone(),
            method: method.name.clone(),
            seed: s,
            pb_at_t: pb,
            pi,
            iterations: log.iterations,
            sub_solves: log.sub_solves,
            log,
        });
    }

    for l in &instances {
        let first_seed = config.seeds[0];
        let curves: Vec<(String, Vec<(f64, f64)>)> = config
            .methods
            .iter()
            .filter_map(|m| {
                rows.iter()
                    .find(|r| r.instance == l.key && r.method == m.name && r.seed == first_seed)
                    .map(|r| (m.name.clone(), r.log.pb_trajectory()))
            })
            .collect();
        if !curves.is_empty() {
            let path = config.out_dir.join("plots").join(format!("{}.svg", l.key));
            emit_plot(&curves, bks[&l.key], config.time_limit, &path)?;
        }
    }

    let csv_path = config.out_dir.join("results.csv");
    std::fs::write(&csv_path, results_csv(&rows, config.clock)?)?;
    Ok(BenchReport {
        rows,
        bks,
        failures,
        csv_path,
    })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Renders primal-bound step curves (one per method) with a dashed
/// best-known line. Each incumbent is drawn as a `circle` of class `pt mK`
/// for the K-th curve.
pub fn render_plot(curves: &[(String, Vec<(f64, f64)>)], bks: f64, horizon: f64) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::Bench("nothing to plot".into()));
    }
    let (w, h, left, right, top, bottom) = (720.0, 420.0, 70.0, 170.0, 20.0, 40.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let t_max = curves
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.0))
        .fold(horizon, f64::max)
        .max(1e-9);
    let values: Vec<f64> = curves
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .chain(std::iter::once(bks))
        .filter(|v| v.is_finite())
        .collect();
    let mut y_lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut y_hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(y_hi > y_lo) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let x = |t: f64| left + plot_w * (t / t_max);
    let y = |v: f64| top + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let t = t_max * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y(v) + 4.0,
            fmt_tick(v)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x(t),
            h - bottom + 16.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r##"<line class="bks" x1="{left}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#000" stroke-dasharray="5,4"/>"##,
        left + plot_w,
        y(bks),
        y(bks)
    );
    for (k, (name, points)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if let Some(&(t0, v0)) = points.first() {
            let mut d = format!("M{:.2},{:.2}", x(t0), y(v0));
            for &(t, v) in &points[1..] {
                let _ = write!(d, " H{:.2} V{:.2}", x(t), y(v));
            }
            let _ = write!(d, " H{:.2}", x(t_max));
            let _ = writeln!(
                s,
                r#"<path class="curve m{k}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
        }
        for &(t, v) in points {
            let _ = writeln!(
                s,
                r#"<circle class="pt m{k}" cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                x(t),
                y(v)
            );
        }
        let ly = top + 14.0 + 16.0 * k as f64;
        let lx = left + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" x2="{:.1}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 100.0).round() / 100.0)
    }
}

pub fn emit_plot(
    curves: &[(String, Vec<(f64, f64)>)],
    bks: f64,
    horizon: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(path, render_plot(curves, bks, horizon)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_conventions() {
        assert_eq!(primal_gap(0.0, 0.0), 0.0);
        assert_eq!(primal_gap(-1.0, 2.0), 1.0);
        assert_eq!(primal_gap(200.0, 100.0), 0.5);
        assert_eq!(primal_gap(-50.0, -100.0), 0.5);
    }

    #[test]
    fn step_example() {
        let pi = primal_integral_of(&[(2.0, 200.0), (6.0, 100.0)], 100.0, 10.0).unwrap();
        assert!((pi - 4.0).abs() <= 1e-12);
        assert_eq!(primal_integral_of(&[], 5.0, 7.0).unwrap(), 7.0);
        assert_eq!(primal_integral_of(&[(0.0, 5.0)], 5.0, 7.0).unwrap(), 0.0);
        assert!(primal_integral_of(&[], f64::NAN, 7.0).is_err());
    }

    #[test]
    fn config_rejects_duplicates_and_missing_weights() {
        let base = r#"{"instances": [], "time_limit": 1, "methods": [
            {"name": "a", "engine": "lns"}, {"name": "a", "engine": "tlns"}]}"#;
        assert!(BenchConfig::from_json(base).is_err());
        let learned = r#"{"instances": [], "time_limit": 1, "methods": [
            {"name": "a", "engine": "lns", "policy": "learned"}]}"#;
        assert!(BenchConfig::from_json(learned).is_err());
        let ok = r#"{"instances": ["x.json"], "time_limit": 1, "methods": [
            {"name": "a", "engine": "lns", "count_limit": null}]}"#;
        let cfg = BenchConfig::from_json(ok).unwrap();
        assert_eq!(cfg.methods[0].count_limit, None);
        assert_eq!(cfg.bks, BksPolicy::default());
    }

    #[test]
    fn plot_marks_every_incumbent() {
        let curves = vec![
            ("A".to_string(), vec![(0.0, 10.0), (1.0, 8.0), (3.0, 5.0)]),
            ("B".to_string(), vec![(0.0, 10.0)]),
        ];
        let svg = render_plot(&curves, 5.0, 4.0).unwrap();
        assert_eq!(svg.matches(r#"class="pt m0""#).count(), 3);
        assert_eq!(svg.matches(r#"class="pt m1""#).count(), 1);
        assert_eq!(svg.matches(r#"class="bks""#).count(), 1);
        assert!(render_plot(&[], 0.0, 1.0).is_err());
    }
}
