//! LNS and two-layer LNS (TLNS) drivers.
//!
//! LNS repeatedly fixes all but `r` integer variables at the incumbent,
//! solves the resulting auxiliary MILP exactly, and grows `r` by `eta` after
//! every non-improving iteration until `count_limit` such iterations pile up.
//! TLNS wraps this: an outer layer fixes all but `r1` variables, presolves
//! the auxiliary problem once, and runs a complete inner LNS on the reduced
//! problem, growing `r1` whenever the inner search fails to improve.
//!
//! Time can be measured on the wall clock or, for reproducible runs, in
//! exact sub-solves (`ClockMode::Iterations`), where every sub-MILP solve
//! advances the clock by one.

use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{solve_milp, SolveOptions, SolveStatus, IMPROVEMENT_TOL};
use crate::error::{Error, Result};
use crate::generators::Family;
use crate::milp::{check_feasibility, MilpInstance, Solution, FEAS_TOL};
use crate::neighborhoods::{build_auxiliary, random_unfix, score_unfix, FixingSet};
use crate::policy::{extract_features, sgt_forward, SgtWeights};
use crate::presolve::{postsolve, presolve_fixing, PresolveMap};
use crate::rng::Rng;

pub const DEFAULT_ETA_OUTER: f64 = 1.05;
pub const DEFAULT_ETA_INNER: f64 = 1.15;
pub const DEFAULT_COUNT_LIMIT: usize = 4;
pub const DEFAULT_SUB_TIME_LIMIT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    #[default]
    Wall,
    /// Elapsed time is the number of exact sub-solves performed so far.
    Iterations,
}

#[derive(Debug, Clone)]
pub struct LnsParams {
    /// Number of integer variables left free.
    pub r: usize,
    pub eta: f64,
    pub count_limit: usize,
    /// Seconds per auxiliary solve (ignored under `ClockMode::Iterations`).
    pub sub_time_limit: f64,
    /// Total budget in seconds, or in sub-solves under `ClockMode::Iterations`.
    pub time_limit: f64,
    /// Node limit per auxiliary solve.
    pub sub_node_limit: Option<u64>,
    pub clock: ClockMode,
    pub stop: Option<Arc<AtomicBool>>,
}

impl LnsParams {
    pub fn new(r: usize, eta: f64, time_limit: f64) -> Self {
        Self {
            r,
            eta,
            count_limit: DEFAULT_COUNT_LIMIT,
            sub_time_limit: DEFAULT_SUB_TIME_LIMIT,
            time_limit,
            sub_node_limit: None,
            clock: ClockMode::Wall,
            stop: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        if !(self.eta >= 1.0) || !self.eta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "eta = {} must be >= 1",
                self.eta
            )));
        }
        if self.count_limit < 1 {
            return Err(Error::InvalidArgument(
                "count limit must be at least 1".into(),
            ));
        }
        if !(self.sub_time_limit > 0.0) || !(self.time_limit > 0.0) {
            return Err(Error::InvalidArgument(
                "time limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `min(ceil(eta * r), cap)`, ignoring float noise just above an integer.
pub fn grow_r(r: usize, eta: f64, cap: usize) -> usize {
    (((eta * r as f64) - 1e-9).ceil() as usize).max(r).min(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Incumbent,
    NeighborhoodGrown,
    IterationEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    /// Plain LNS, or the initial incumbent.
    Single,
    Outer,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub elapsed: f64,
    pub kind: EventKind,
    /// Incumbent objective of the original problem after the event.
    pub objective: f64,
    /// Neighborhood size of the emitting layer after the event.
    pub r_current: usize,
    pub layer: Layer,
    /// Wall-clock seconds since the run started, whatever the clock mode.
    #[serde(skip)]
    pub wall: f64,
    /// The new incumbent in the original space, for `Incumbent` events.
    #[serde(skip)]
    pub solution: Option<Solution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Presolve,
    SubSolve,
    Policy,
    Postsolve,
    Overhead,
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub presolve: f64,
    pub sub_solve: f64,
    pub policy: f64,
    pub postsolve: f64,
    pub overhead: f64,
}

impl PhaseTimes {
    fn slot(&mut self, phase: Phase) -> &mut f64 {
        match phase {
            Phase::Presolve => &mut self.presolve,
            Phase::SubSolve => &mut self.sub_solve,
            Phase::Policy => &mut self.policy,
            Phase::Postsolve => &mut self.postsolve,
            Phase::Overhead => &mut self.overhead,
        }
    }

    pub fn get(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Presolve => self.presolve,
            Phase::SubSolve => self.sub_solve,
            Phase::Policy => self.policy,
            Phase::Postsolve => self.postsolve,
            Phase::Overhead => self.overhead,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub events: Vec<Event>,
    pub phase_times: PhaseTimes,
    /// LNS iterations, or outer iterations for TLNS.
    pub iterations: u64,
    /// Exact auxiliary solves across all layers.
    pub sub_solves: u64,
    /// Number of presolve calls (one per outer TLNS iteration).
    pub presolve_calls: u64,
    pub clock: ClockMode,
}

#[derive(Serialize)]
struct Summary<'a> {
    kind: &'static str,
    /// Omitted under the iteration clock so that logs are reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_times: Option<&'a PhaseTimes>,
    iterations: u64,
    sub_solves: u64,
    presolve_calls: u64,
    clock: ClockMode,
}

impl RunLog {
    pub fn incumbents(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Incumbent)
    }

    /// `(elapsed, objective)` of every incumbent.
    pub fn pb_trajectory(&self) -> Vec<(f64, f64)> {
        self.incumbents()
            .map(|e| (e.elapsed, e.objective))
            .collect()
    }

    /// `(wall seconds, objective)` of every incumbent.
    pub fn pb_wall_trajectory(&self) -> Vec<(f64, f64)> {
        self.incumbents().map(|e| (e.wall, e.objective)).collect()
    }

    /// Wall-clock seconds of the last event.
    pub fn wall_duration(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.wall)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.incumbents().last().map(|e| e.objective)
    }

    /// One JSON object per event, then a summary line with `"kind":"Summary"`.
    /// Under the iteration clock the output depends only on seeds and limits.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        let summary = Summary {
            kind: "Summary",
            phase_times: (self.clock == ClockMode::Wall).then_some(&self.phase_times),
            iterations: self.iterations,
            sub_solves: self.sub_solves,
            presolve_calls: self.presolve_calls,
            clock: self.clock,
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
        out
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_jsonl().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    /// Parses the event lines of a JSONL log (the summary line is skipped).
    pub fn events_from_jsonl(text: &str) -> Result<Vec<Event>> {
        let mut events = Vec::new();
        for (k, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.contains("\"kind\":\"Summary\"") {
                continue;
            }
            events.push(serde_json::from_str(line).map_err(|e| Error::Parse {
                context: format!("log line {}", k + 1),
                message: e.to_string(),
            })?);
        }
        Ok(events)
    }
}

/// Chooses which integer variables to fix around the incumbent.
pub trait FixingHeuristic {
    fn name(&self) -> &str;
    /// Returns a fixing set leaving exactly `unfix` integer variables free.
    fn select(
        &mut self,
        inst: &MilpInstance,
        incumbent: &Solution,
        unfix: usize,
        rng: &mut Rng,
    ) -> Result<FixingSet>;
}

#[derive(Debug, Default, Clone)]
pub struct RandomFixer;

impl FixingHeuristic for RandomFixer {
    fn name(&self) -> &str {
        "random"
    }

    fn select(
        &mut self,
        inst: &MilpInstance,
        _incumbent: &Solution,
        unfix: usize,
        rng: &mut Rng,
    ) -> Result<FixingSet> {
        random_unfix(inst, unfix, rng)
    }
}

/// Samples free variables in proportion to scores from the graph transformer.
#[derive(Debug, Clone)]
pub struct LearnedFixer {
    weights: Arc<SgtWeights>,
}

impl LearnedFixer {
    pub fn new(weights: Arc<SgtWeights>) -> Result<Self> {
        weights.validate()?;
        Ok(Self { weights })
    }
}

impl FixingHeuristic for LearnedFixer {
    fn name(&self) -> &str {
        "learned"
    }

    fn select(
        &mut self,
        inst: &MilpInstance,
        incumbent: &Solution,
        unfix: usize,
        rng: &mut Rng,
    ) -> Result<FixingSet> {
        let state = extract_features(inst, incumbent)?;
        let scores = sgt_forward(&state, &self.weights)?;
        score_unfix(inst, &scores, unfix, rng)
    }
}

/// Incumbent from a solution-limit-1 solve, falling back to the family's
/// trivially feasible point.
pub fn initial_solution(
    inst: &MilpInstance,
    family: Option<Family>,
    time_limit: f64,
) -> Result<Solution> {
    let opts = SolveOptions {
        time_limit,
        solution_limit: Some(1),
        ..Default::default()
    };
    match solve_milp(inst, &opts) {
        Ok(res) => {
            if let Some(best) = res.best {
                return Ok(best);
            }
            if res.status == SolveStatus::Infeasible {
                return Err(Error::NoIncumbent(format!("{} is infeasible", inst.name())));
            }
        }
        Err(e) => log::warn!("initial solve failed: {e}"),
    }
    let family = family
        .or_else(|| Family::from_instance_name(inst.name()))
        .ok_or_else(|| Error::NoIncumbent(format!("no solution found for {}", inst.name())))?;
    let x = family.trivial_solution(inst.n());
    if check_feasibility(inst, &x, FEAS_TOL)?.feasible {
        Solution::new(inst, x)
    } else {
        Err(Error::NoIncumbent(format!(
            "{family} fallback point infeasible for {}",
            inst.name()
        )))
    }
}

struct Clock {
    mode: ClockMode,
    start: Instant,
    ticks: u64,
}

impl Clock {
    fn new(mode: ClockMode) -> Self {
        Self {
            mode,
            start: Instant::now(),
            ticks: 0,
        }
    }

    fn now(&self) -> f64 {
        match self.mode {
            ClockMode::Wall => self.start.elapsed().as_secs_f64(),
            ClockMode::Iterations => self.ticks as f64,
        }
    }
}

/// Maps reduced-space solutions back to the original problem.
struct Lift<'a> {
    reduced: &'a MilpInstance,
    map: &'a PresolveMap,
}

struct Runner {
    clock: Clock,
    total_limit: f64,
    stop: Option<Arc<AtomicBool>>,
    log: RunLog,
    wall_start: Instant,
}

impl Runner {
    fn new(mode: ClockMode, total_limit: f64, stop: Option<Arc<AtomicBool>>) -> Self {
        Self {
            clock: Clock::new(mode),
            total_limit,
            stop,
            log: RunLog {
                clock: mode,
                ..Default::default()
            },
            wall_start: Instant::now(),
        }
    }

    fn out_of_budget(&self) -> bool {
        self.stop
            .as_ref()
            .is_some_and(|s| s.load(Ordering::Relaxed))
            || self.clock.now() >= self.total_limit
    }

    fn timed<T>(&mut self, phase: Phase, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.log.phase_times.slot(phase) += t.elapsed().as_secs_f64();
        out
    }

    fn event(
        &mut self,
        kind: EventKind,
        objective: f64,
        r: usize,
        layer: Layer,
        sol: Option<Solution>,
    ) {
        let elapsed = self.clock.now();
        let wall = self.wall_start.elapsed().as_secs_f64();
        self.log.events.push(Event {
            elapsed,
            wall,
            kind,
            objective,
            r_current: r,
            layer,
            solution: sol,
        });
    }

    fn finish(mut self) -> RunLog {
        let total = self.wall_start.elapsed().as_secs_f64();
        let p = self.log.phase_times;
        let accounted = p.presolve + p.sub_solve + p.policy + p.postsolve;
        self.log.phase_times.overhead = (total - accounted).max(0.0);
        self.log
    }

    /// One exact auxiliary solve; returns an improving solution if found.
    fn sub_solve(
        &mut self,
        aux: &MilpInstance,
        incumbent: &Solution,
        p: &LnsParams,
    ) -> Result<Option<Solution>> {
        let time_limit = match self.clock.mode {
            ClockMode::Wall => p
                .sub_time_limit
                .min(self.total_limit - self.clock.now())
                .max(1e-3),
            ClockMode::Iterations => f64::INFINITY,
        };
        let opts = SolveOptions {
            time_limit,
            node_limit: p.sub_node_limit,
            cutoff: Some(incumbent.objective),
            stop: self.stop.clone(),
            ..Default::default()
        };
        let res = self.timed(Phase::SubSolve, || solve_milp(aux, &opts));
        self.clock.ticks += 1;
        self.log.sub_solves += 1;
        match res {
            Ok(r) => Ok(r
                .best
                .filter(|b| b.objective < incumbent.objective - IMPROVEMENT_TOL)),
            Err(e @ Error::Unsupported(_)) => Err(e),
            Err(e) => {
                log::warn!("auxiliary solve failed, treating as no improvement: {e}");
                Ok(None)
            }
        }
    }

    /// Plain LNS loop on `inst`. With `lift`, `inst` is a reduced problem
    /// and improvements are reported in the original space.
    fn lns_loop(
        &mut self,
        inst: &MilpInstance,
        start: Solution,
        fixer: &mut dyn FixingHeuristic,
        p: &LnsParams,
        rng: &mut Rng,
        lift: Option<&Lift>,
        layer: Layer,
    ) -> Result<Solution> {
        let n_int = inst.n_integer();
        let mut r = p.r.min(n_int);
        let mut cnt = 0usize;
        let mut incumbent = start;
        while cnt < p.count_limit && !self.out_of_budget() {
            let fixing = self.timed(Phase::Policy, || fixer.select(inst, &incumbent, r, rng))?;
            let aux = self.timed(Phase::Overhead, || {
                build_auxiliary(inst, &incumbent, &fixing)
            })?;
            match self.sub_solve(&aux, &incumbent, p)? {
                Some(better) => {
                    let (objective, full) = match lift {
                        Some(l) => {
                            let full = self
                                .timed(Phase::Postsolve, || postsolve(l.reduced, &better, l.map))?;
                            (better.objective + l.map.objective_offset, full)
                        }
                        None => (better.objective, better.clone()),
                    };
                    incumbent = better;
                    self.event(EventKind::Incumbent, objective, r, layer, Some(full));
                }
                None => {
                    r = grow_r(r, p.eta, n_int);
                    cnt += 1;
                    let objective = self.current_objective(&incumbent, lift);
                    self.event(EventKind::NeighborhoodGrown, objective, r, layer, None);
                }
            }
            if layer != Layer::Inner {
                self.log.iterations += 1;
            }
            let objective = self.current_objective(&incumbent, lift);
            self.event(EventKind::IterationEnd, objective, r, layer, None);
        }
        Ok(incumbent)
    }

    fn current_objective(&self, incumbent: &Solution, lift: Option<&Lift>) -> f64 {
        incumbent.objective + lift.map_or(0.0, |l| l.map.objective_offset)
    }
}

fn check_start(inst: &MilpInstance, x0: &Solution) -> Result<()> {
    if x0.len() != inst.n() {
        return Err(Error::dim("initial solution", inst.n(), x0.len()));
    }
    let report = check_feasibility(inst, &x0.x, FEAS_TOL)?;
    if !report.feasible {
        return Err(Error::InfeasibleInput(format!(
            "initial solution violates the model by {:.3e}",
            report.max_violation
        )));
    }
    Ok(())
}

/// Plain LNS. Returns the final incumbent and the run log.
pub fn run_lns(
    inst: &MilpInstance,
    x0: &Solution,
    fixer: &mut dyn FixingHeuristic,
    p: &LnsParams,
    rng: &mut Rng,
) -> Result<(Solution, RunLog)> {
    p.validate()?;
    check_start(inst, x0)?;
    let mut runner = Runner::new(p.clock, p.time_limit, p.stop.clone());
    let r0 = p.r.min(inst.n_integer());
    runner.event(
        EventKind::Incumbent,
        x0.objective,
        r0,
        Layer::Single,
        Some(x0.clone()),
    );
    let best = runner.lns_loop(inst, x0.clone(), fixer, p, rng, None, Layer::Single)?;
    Ok((best, runner.finish()))
}

/// Two-layer LNS. The outer layer runs until `outer.time_limit` (its
/// `count_limit` is unused); every inner LNS starts from `inner.r`.
/// `inner.time_limit` is ignored in favour of the outer budget, and the
/// outer clock mode and stop flag govern both layers.
pub fn run_tlns(
    inst: &MilpInstance,
    x0: &Solution,
    fixer: &mut dyn FixingHeuristic,
    outer: &LnsParams,
    inner: &LnsParams,
    rng: &mut Rng,
) -> Result<(Solution, RunLog)> {
    outer.validate()?;
    inner.validate()?;
    check_start(inst, x0)?;
    let mut runner = Runner::new(outer.clock, outer.time_limit, outer.stop.clone());
    let n_int = inst.n_integer();
    let mut r1 = outer.r.min(n_int);
    let mut incumbent = x0.clone();
    runner.event(
        EventKind::Incumbent,
        x0.objective,
        r1,
        Layer::Single,
        Some(x0.clone()),
    );

    while !runner.out_of_budget() {
        let fixing = runner.timed(Phase::Policy, || fixer.select(inst, &incumbent, r1, rng))?;
        let (reduced, start, map) = runner.timed(Phase::Presolve, || {
            presolve_fixing(inst, &incumbent, &fixing)
        })?;
        runner.log.presolve_calls += 1;
        let lift = Lift {
            reduced: &reduced,
            map: &map,
        };
        let y = runner.lns_loop(
            &reduced,
            start,
            fixer,
            inner,
            rng,
            Some(&lift),
            Layer::Inner,
        )?;
        let candidate = runner.timed(Phase::Postsolve, || postsolve(&reduced, &y, &map))?;
        if candidate.objective < incumbent.objective - IMPROVEMENT_TOL {
            incumbent = candidate;
        } else {
            r1 = grow_r(r1, outer.eta, n_int);
            runner.event(
                EventKind::NeighborhoodGrown,
                incumbent.objective,
                r1,
                Layer::Outer,
                None,
            );
        }
        runner.log.iterations += 1;
        runner.event(
            EventKind::IterationEnd,
            incumbent.objective,
            r1,
            Layer::Outer,
            None,
        );
    }
    Ok((incumbent, runner.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_rounding() {
        assert_eq!(grow_r(100, 1.05, 1000), 105);
        assert_eq!(grow_r(105, 1.05, 1000), 111);
        assert_eq!(grow_r(10, 1.15, 1000), 12);
        assert_eq!(grow_r(100, 1.05, 103), 103);
        assert_eq!(grow_r(7, 1.0, 10), 7);
    }

    #[test]
    fn params_validation() {
        assert!(LnsParams::new(0, 1.1, 1.0).validate().is_err());
        assert!(LnsParams::new(1, 0.9, 1.0).validate().is_err());
        assert!(LnsParams::new(1, 1.1, 0.0).validate().is_err());
        assert!(LnsParams::new(1, 1.1, 1.0).validate().is_ok());
    }
}
