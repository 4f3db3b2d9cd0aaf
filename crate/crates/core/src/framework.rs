//! The staged solution pipeline.
//!
//! Stages run from cheapest to most expensive and the pipeline stops as soon
//! as the lower and upper bounds meet:
//!
//! 1. load-balance lower bound;
//! 2. multi-start ILS for the first incumbent;
//! 3. column generation for the LP bound, seeded with the incumbent;
//! 4. MIP over the generated columns, then local search;
//! 5. MIP over a location subset around the incumbent, then local search;
//! 6. full arc-flow MIP warm-started from the incumbent, then local search.
//!
//! Every arc-flow model uses the current upper bound as its horizon, so the
//! optimum always fits and the model's bounds are valid for the instance.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arcflow::build_graph;
use crate::colgen::{run_colgen, ColgenOptions};
use crate::heuristics::{
    af_cg_heuristic, af_subset_m_heuristic, default_subset, framework_subset, local_search, run_ils,
    IlsConfig,
};
use crate::lpsolve::{LpStats, MipStatus, SimplexSolver, Solver};
use crate::model::{evaluate, initial_lower_bound, Bounds, Instance, Solution, Time};

/// Tolerance used when rounding fractional bounds up to integers.
const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Bound,
    Ils,
    Cg,
    AfCg,
    AfSubsetM,
    Full,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Bound, Stage::Ils, Stage::Cg, Stage::AfCg, Stage::AfSubsetM, Stage::Full];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Bound => "bound",
            Stage::Ils => "ils",
            Stage::Cg => "cg",
            Stage::AfCg => "afcg",
            Stage::AfSubsetM => "afsubsetm",
            Stage::Full => "full",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .iter()
            .copied()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct FrameworkConfig {
    pub ils: IlsConfig,
    pub colgen: ColgenOptions,
    pub afcg_time_limit: Duration,
    pub subset_time_limit: Duration,
    pub full_time_limit: Duration,
    /// Added to the upper bound to get the arc-flow horizon.
    pub horizon_slack: Time,
    /// Let ILS starts stop once they reach the initial lower bound.
    pub ils_stop_at_bound: bool,
    /// Stages to skip (the bound and ILS stages always run).
    pub disabled: Vec<Stage>,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        let limit = Duration::from_secs(300);
        Self {
            ils: IlsConfig::default(),
            colgen: ColgenOptions::default(),
            afcg_time_limit: limit,
            subset_time_limit: limit,
            full_time_limit: limit,
            horizon_slack: 0,
            ils_stop_at_bound: true,
            disabled: Vec::new(),
        }
    }
}

impl FrameworkConfig {
    /// Same time limit for the three MIP stages.
    pub fn with_mip_time_limit(mut self, limit: Duration) -> Self {
        self.afcg_time_limit = limit;
        self.subset_time_limit = limit;
        self.full_time_limit = limit;
        self.ils.mip_time_limit = limit;
        self
    }
}

/// Arc-flow horizon for an incumbent of makespan `ub`.
pub fn horizon_for_stage(ub: Time, slack: Time) -> Time {
    ub + slack.max(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub entry: Bounds,
    pub exit: Bounds,
    pub wall_time_s: f64,
    pub optimal: bool,
}

#[derive(Debug, Clone)]
pub struct FrameworkResult {
    pub solution: Solution,
    pub bounds: Bounds,
    pub optimal: bool,
    pub reports: Vec<StageReport>,
    /// First stage after which the bounds met.
    pub closed_by: Option<Stage>,
    /// Value of the arc-flow LP relaxation, when column generation converged.
    pub lp_bound: Option<f64>,
    pub stats: LpStats,
    pub wall_time_s: f64,
}

struct Pipeline<'a> {
    instance: &'a Instance,
    config: &'a FrameworkConfig,
    solver: &'a dyn Solver,
    started: Instant,
    incumbent: Solution,
    bounds: Bounds,
    reports: Vec<StageReport>,
    closed_by: Option<Stage>,
    lp_bound: Option<f64>,
    stats: LpStats,
}

impl Pipeline<'_> {
    fn record(&mut self, stage: Stage, entry: Bounds, t0: Instant) {
        let optimal = self.bounds.optimal();
        if optimal && self.closed_by.is_none() {
            self.closed_by = Some(stage);
        }
        info!("stage {stage}: {entry} -> {} in {:.3}s", self.bounds, t0.elapsed().as_secs_f64());
        self.reports.push(StageReport {
            stage,
            entry,
            exit: self.bounds,
            wall_time_s: t0.elapsed().as_secs_f64(),
            optimal,
        });
    }

    fn raise_lb(&mut self, value: f64) {
        if value.is_finite() {
            let lb = (value - BOUND_TOL).ceil() as Time;
            self.bounds.lb = self.bounds.lb.max(lb).min(self.bounds.ub);
        }
    }

    /// Local search on `candidate`; adopted when strictly better.
    fn offer(&mut self, candidate: Option<Solution>) {
        let Some(candidate) = candidate else { return };
        let machines: Vec<(usize, Vec<usize>)> =
            candidate.machines.iter().map(|m| (m.location, m.job_ids().collect())).collect();
        let improved = Solution::from_assignment(self.instance, local_search(self.instance, &machines));
        debug_assert_eq!(evaluate(&improved, self.instance), Ok(improved.makespan));
        if improved.makespan < self.incumbent.makespan {
            self.incumbent = improved;
            self.bounds.ub = self.incumbent.makespan;
        }
    }

    fn enabled(&self, stage: Stage) -> bool {
        !self.config.disabled.contains(&stage)
    }

    fn horizon(&self) -> Time {
        horizon_for_stage(self.bounds.ub, self.config.horizon_slack)
    }

    fn bound_and_ils(&mut self) {
        let t0 = Instant::now();
        let entry = Bounds::new(0, Time::MAX);
        self.bounds.lb = initial_lower_bound(self.instance);
        let pre = Bounds::new(self.bounds.lb, Time::MAX);
        self.reports.push(StageReport { stage: Stage::Bound, entry, exit: pre, wall_time_s: t0.elapsed().as_secs_f64(), optimal: false });

        let t0 = Instant::now();
        let mut ils = self.config.ils.clone();
        if self.config.ils_stop_at_bound {
            ils.stop_at = Some(self.bounds.lb);
        }
        self.incumbent = run_ils(self.instance, &ils).solution;
        self.bounds.ub = self.incumbent.makespan;
        self.bounds.lb = self.bounds.lb.min(self.bounds.ub);
        self.record(Stage::Ils, pre, t0);
    }

    /// Column generation followed by the MIP over its columns.
    fn cg_and_afcg(&mut self, run_afcg: bool) {
        let t0 = Instant::now();
        let entry = self.bounds;
        let graph = match build_graph(self.instance, self.horizon()) {
            Ok(g) => g,
            Err(e) => {
                warn!("cannot build graph: {e}");
                self.record(Stage::Cg, entry, t0);
                return;
            }
        };
        let cg = match run_colgen(&graph, self.instance, &self.incumbent, self.solver, &self.config.colgen) {
            Ok(cg) => cg,
            Err(e) => {
                warn!("column generation failed: {e}");
                self.record(Stage::Cg, entry, t0);
                return;
            }
        };
        self.stats.merge(&cg.stats);
        if cg.proven {
            self.lp_bound = Some(cg.lb_lr);
            self.raise_lb(cg.lb_lr);
        }
        self.record(Stage::Cg, entry, t0);
        if self.bounds.optimal() || !run_afcg {
            return;
        }

        let t0 = Instant::now();
        let entry = self.bounds;
        let res = af_cg_heuristic(self.instance, &graph, &cg, &self.incumbent, self.solver, self.config.afcg_time_limit);
        self.stats.merge(&res.stats);
        self.offer(res.solution);
        self.record(Stage::AfCg, entry, t0);
    }

    fn af_subset(&mut self, subset: Vec<usize>, warm: Option<Solution>) {
        let t0 = Instant::now();
        let entry = self.bounds;
        let warm = warm.unwrap_or_else(|| self.incumbent.clone());
        match af_subset_m_heuristic(self.instance, &subset, self.horizon(), Some(&warm), self.solver, self.config.subset_time_limit) {
            Ok(res) => {
                self.stats.merge(&res.stats);
                self.offer(res.solution);
            }
            Err(e) => warn!("location subset model: {e}"),
        }
        self.record(Stage::AfSubsetM, entry, t0);
    }

    fn full(&mut self) {
        let t0 = Instant::now();
        let entry = self.bounds;
        let all: Vec<usize> = (0..self.instance.m()).collect();
        let warm = self.incumbent.clone();
        match af_subset_m_heuristic(self.instance, &all, self.horizon(), Some(&warm), self.solver, self.config.full_time_limit) {
            Ok(res) => {
                self.stats.merge(&res.stats);
                self.offer(res.solution);
                match res.status {
                    Some(MipStatus::Optimal | MipStatus::Feasible | MipStatus::NoSolution) => self.raise_lb(res.bound),
                    // the incumbent always fits the horizon
                    Some(MipStatus::Infeasible) => warn!("full model reported infeasible"),
                    None => {}
                }
            }
            Err(e) => warn!("full model: {e}"),
        }
        self.record(Stage::Full, entry, t0);
    }

    fn finish(self) -> FrameworkResult {
        debug_assert!(self.bounds.lb <= self.bounds.ub);
        FrameworkResult {
            optimal: self.bounds.optimal(),
            solution: self.incumbent,
            bounds: self.bounds,
            reports: self.reports,
            closed_by: self.closed_by,
            lp_bound: self.lp_bound,
            stats: self.stats,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
    }
}

fn pipeline<'a>(instance: &'a Instance, config: &'a FrameworkConfig, solver: &'a dyn Solver) -> Pipeline<'a> {
    Pipeline {
        instance,
        config,
        solver,
        started: Instant::now(),
        incumbent: Solution { machines: Vec::new(), makespan: Time::MAX },
        bounds: Bounds::new(0, Time::MAX),
        reports: Vec::new(),
        closed_by: None,
        lp_bound: None,
        stats: LpStats::default(),
    }
}

/// Random stream for the location subset, separate from the ILS streams.
fn subset_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

/// Runs the whole pipeline with the built-in simplex solver.
pub fn run_framework(instance: &Instance, config: &FrameworkConfig) -> FrameworkResult {
    run_framework_with(instance, config, &SimplexSolver::default())
}

pub fn run_framework_with(instance: &Instance, config: &FrameworkConfig, solver: &dyn Solver) -> FrameworkResult {
    let mut p = pipeline(instance, config, solver);
    p.bound_and_ils();
    if p.bounds.optimal() {
        return p.finish();
    }
    if p.enabled(Stage::Cg) {
        p.cg_and_afcg(p.enabled(Stage::AfCg));
        if p.bounds.optimal() {
            return p.finish();
        }
    }
    if p.enabled(Stage::AfSubsetM) {
        let mut rng = subset_rng(config.ils.seed);
        let subset = framework_subset(instance, &p.incumbent.locations(), &mut rng);
        p.af_subset(subset, None);
        if p.bounds.optimal() {
            return p.finish();
        }
    }
    if p.enabled(Stage::Full) {
        p.full();
    }
    p.finish()
}

/// Runs one stage on its own. Stages after the ILS start from the ILS
/// incumbent, except the location-subset model which uses the ranked
/// constructive solution and its default subset.
pub fn run_stage(instance: &Instance, stage: Stage, config: &FrameworkConfig, solver: &dyn Solver) -> FrameworkResult {
    let mut p = pipeline(instance, config, solver);
    match stage {
        Stage::Bound | Stage::Ils => p.bound_and_ils(),
        Stage::Cg | Stage::AfCg => {
            p.bound_and_ils();
            if !p.bounds.optimal() {
                p.cg_and_afcg(stage == Stage::AfCg);
            }
        }
        Stage::AfSubsetM => {
            let t0 = Instant::now();
            p.bounds.lb = initial_lower_bound(instance);
            let mut rng = crate::heuristics::start_rng(config.ils.seed, 0);
            let start = crate::heuristics::construct(instance, true, &mut rng);
            p.incumbent = Solution::from_assignment(instance, start);
            p.bounds.ub = p.incumbent.makespan;
            p.bounds.lb = p.bounds.lb.min(p.bounds.ub);
            p.record(Stage::Bound, Bounds::new(0, Time::MAX), t0);
            if !p.bounds.optimal() {
                p.af_subset(default_subset(instance), None);
            }
        }
        Stage::Full => {
            p.bound_and_ils();
            if !p.bounds.optimal() {
                p.full();
            }
        }
    }
    p.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>(), Ok(s));
        }
        assert!("nope".parse::<Stage>().is_err());
    }

    #[test]
    fn horizon_is_upper_bound() {
        assert_eq!(horizon_for_stage(10, 0), 10);
        assert_eq!(horizon_for_stage(10, 2), 12);
    }

    #[test]
    fn ils_closing_the_bound_skips_later_stages() {
        // four unit jobs released at 0 everywhere: bound 2 on 2 machines
        let inst = Instance::new("easy", 2, vec![1; 4], vec![vec![0, 0, 0]; 4], 1).unwrap();
        let res = run_framework(&inst, &FrameworkConfig::default());
        assert!(res.optimal);
        assert_eq!(res.closed_by, Some(Stage::Ils));
        assert_eq!(res.bounds, Bounds::new(2, 2));
        assert!(res.reports.iter().all(|r| r.stage <= Stage::Ils));
    }

    #[test]
    fn closes_small_instance() {
        let inst = Instance::new(
            "f",
            2,
            vec![2, 3, 1, 2, 2],
            vec![vec![0, 2, 1], vec![1, 0, 3], vec![4, 1, 0], vec![2, 2, 2], vec![0, 3, 1]],
            1,
        )
        .unwrap();
        let res = run_framework(&inst, &FrameworkConfig::default());
        let opt = crate::oracle::solve_exact(&inst, 1e8).unwrap().makespan;
        assert!(res.optimal);
        assert_eq!(res.solution.makespan, opt);
        for w in res.reports.windows(2) {
            assert!(w[1].exit.lb >= w[0].exit.lb && w[1].exit.ub <= w[0].exit.ub);
        }
    }
}
