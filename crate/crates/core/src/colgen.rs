//! Column generation for the LP relaxation of the arc-flow model.
//!
//! The restricted master starts with the makespan, every `y`, every idle arc
//! and the job arcs of a feasible seed schedule, so it is always feasible.
//! Each round re-solves the master from the previous basis, prices every job
//! arc of the graph explicitly and adds the most negative ones.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use log::debug;
use thiserror::Error;

use crate::arcflow::{AfModel, ArcFlowGraph, Column};
use crate::lpsolve::{Basis, LpError, LpStats, Solver};
use crate::model::{erd_schedule, Instance, Solution, Time};
use crate::par::*;

/// Duals of the cover, completion-link and flow rows of the master.
///
/// Signs follow [`crate::lpsolve`]: `pi >= 0` (cover rows are `>=`),
/// `gamma <= 0` (link rows are `<=`), `tau` free.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValues {
    /// Per job, cover row.
    pub pi: Vec<f64>,
    /// Per job, completion-link row.
    pub gamma: Vec<f64>,
    /// Per graph position, per node, flow row.
    pub tau: Vec<Vec<f64>>,
}

impl DualValues {
    pub fn zeros(graph: &ArcFlowGraph, n: usize) -> Self {
        Self {
            pi: vec![0.0; n],
            gamma: vec![0.0; n],
            tau: graph.locations.iter().map(|g| vec![0.0; g.nodes.len()]).collect(),
        }
    }

    /// Reduced cost of the job arc `(q, r)` of `job` at graph position `pos`.
    pub fn arc_reduced_cost(&self, graph: &ArcFlowGraph, pos: usize, job: usize, q: Time, r: Time) -> f64 {
        let g = &graph.locations[pos];
        let tq = self.tau[pos][g.node_index(q).expect("arc start is a node")];
        let tr = self.tau[pos][g.node_index(r).expect("arc end is a node")];
        reduced_cost(self.pi[job], tq, tr, self.gamma[job], r)
    }
}

/// `-pi_j - tau_kq + tau_kr - r gamma_j`.
pub fn reduced_cost(pi: f64, tau_q: f64, tau_r: f64, gamma: f64, r: Time) -> f64 {
    -pi - tau_q + tau_r - r as f64 * gamma
}

/// A priced job arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub pos: usize,
    pub job: usize,
    pub q: Time,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone)]
pub struct ColgenOptions {
    /// Columns kept per (job, location) pair each round.
    pub per_pair: usize,
    /// An arc enters when its reduced cost is below `-tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
}

impl Default for ColgenOptions {
    fn default() -> Self {
        Self { per_pair: 10, tolerance: 1e-9, max_iterations: 10_000, time_limit: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColgenIteration {
    pub iteration: usize,
    pub lp_value: f64,
    pub columns_added: usize,
}

#[derive(Debug, Clone)]
pub struct ColgenResult {
    /// Value of the last restricted master.
    pub lb_lr: f64,
    /// Pricing found no improving arc, so `lb_lr` is the full LP optimum.
    pub proven: bool,
    /// The master with every generated column.
    pub model: AfModel,
    pub duals: DualValues,
    /// Primal values of the last master.
    pub x: Vec<f64>,
    pub trace: Vec<ColgenIteration>,
    pub stats: LpStats,
}

#[derive(Debug, Error, PartialEq)]
pub enum ColgenError {
    #[error("seed schedule does not fit the graph (makespan above horizon or location missing)")]
    Seed,
    #[error("restricted master: {0}")]
    Lp(#[from] LpError),
}

/// Job arcs used by the ERD schedules of `solution`, as `(pos, job, q)`.
pub fn solution_arcs(graph: &ArcFlowGraph, instance: &Instance, solution: &Solution) -> Option<HashSet<(usize, usize, Time)>> {
    let mut arcs = HashSet::new();
    for machine in &solution.machines {
        let jobs: Vec<usize> = machine.job_ids().collect();
        if jobs.is_empty() {
            continue;
        }
        let pos = graph.position(machine.location)?;
        for s in erd_schedule(instance, machine.location, &jobs).jobs {
            if s.completion > graph.horizon {
                return None;
            }
            arcs.insert((pos, s.job, s.start));
        }
    }
    Some(arcs)
}

/// Every job arc with reduced cost below `-tolerance` that is not yet in
/// `model`, ordered by position, job and start.
pub fn price(graph: &ArcFlowGraph, instance: &Instance, model: &AfModel, duals: &DualValues, tolerance: f64) -> Vec<Candidate> {
    let per_location: Vec<Vec<Candidate>> = (0..graph.locations.len())
        .into_par_iter()
        .map(|pos| {
            let g = &graph.locations[pos];
            let mut out = Vec::new();
            for (job, starts) in g.job_arcs.iter().enumerate() {
                for &q in starts {
                    let rc = duals.arc_reduced_cost(graph, pos, job, q, q + instance.proc(job));
                    if rc < -tolerance && model.column_index(&Column::Job { pos, job, q }).is_none() {
                        out.push(Candidate { pos, job, q, reduced_cost: rc });
                    }
                }
            }
            out
        })
        .collect();
    per_location.into_iter().flatten().collect()
}

/// Keeps the `per_pair` most negative candidates of every (job, location)
/// pair plus the overall most negative one.
pub fn select_columns(candidates: &[Candidate], per_pair: usize) -> Vec<Candidate> {
    let key = |c: &Candidate| (c.reduced_cost, c.pos, c.job, c.q);
    let mut groups: BTreeMap<(usize, usize), Vec<Candidate>> = BTreeMap::new();
    for c in candidates {
        groups.entry((c.pos, c.job)).or_default().push(*c);
    }
    let mut out = Vec::new();
    for (_, mut group) in groups {
        group.sort_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite reduced costs"));
        group.truncate(per_pair);
        out.extend(group);
    }
    let best = candidates
        .iter()
        .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite reduced costs"));
    if let Some(best) = best {
        if !out.iter().any(|c| (c.pos, c.job, c.q) == (best.pos, best.job, best.q)) {
            out.push(*best);
        }
    }
    out
}

/// Runs column generation on `graph` from the columns of `seed`.
pub fn run_colgen(
    graph: &ArcFlowGraph,
    instance: &Instance,
    seed: &Solution,
    solver: &dyn Solver,
    options: &ColgenOptions,
) -> Result<ColgenResult, ColgenError> {
    let started = Instant::now();
    let seed_arcs = solution_arcs(graph, instance, seed).ok_or(ColgenError::Seed)?;
    let mut model = AfModel::build_with(graph, instance, |pos, job, q| seed_arcs.contains(&(pos, job, q)));
    let mut stats = LpStats::default();
    let mut trace = Vec::new();
    let mut basis: Option<Basis> = None;

    for iteration in 0.. {
        let sol = solver.solve_lp(&model.lp, basis.as_ref())?;
        stats.record_lp(&model.lp, &sol);
        let duals = model.duals(graph, &sol);
        let out_of_budget = iteration >= options.max_iterations
            || options.time_limit.is_some_and(|t| started.elapsed() >= t);
        let candidates = price(graph, instance, &model, &duals, options.tolerance);
        if candidates.is_empty() || out_of_budget {
            let proven = candidates.is_empty();
            trace.push(ColgenIteration { iteration, lp_value: sol.objective, columns_added: 0 });
            debug!("colgen: stop after {iteration} rounds, value {:.6}, proven {proven}", sol.objective);
            return Ok(ColgenResult {
                lb_lr: sol.objective,
                proven,
                model,
                duals,
                x: sol.x,
                trace,
                stats,
            });
        }
        let chosen = select_columns(&candidates, options.per_pair);
        for c in &chosen {
            model.add_job_column(graph, instance, c.pos, c.job, c.q);
        }
        debug!("colgen round {iteration}: value {:.6}, {} columns added", sol.objective, chosen.len());
        trace.push(ColgenIteration { iteration, lp_value: sol.objective, columns_added: chosen.len() });
        basis = Some(sol.basis);
    }
    unreachable!("loop returns")
}
