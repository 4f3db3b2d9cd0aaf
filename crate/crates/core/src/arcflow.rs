//! Reduced arc-flow multigraph and the arc-flow MIP built on it.
//!
//! For each location `k` the graph has a node per reachable start/completion
//! time in `[0, T]`. A job arc `(q, q + p_j)` exists when the job can start at
//! `q` in some ERD-ordered machine schedule; dummy arcs jump from a node to
//! the next release date (or to `T`), representing idle time. A machine
//! schedule is a path from the earliest release date at `k` to `T`.
//!
//! The model minimizes `C_max` subject to: every job covered at least once,
//! unit flow through each opened location, `C_max` at least every used job
//! arc's end, and at most `p` opened locations.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use crate::colgen::DualValues;
use crate::lpsolve::{LinearProgram, LpSolution, ObjectiveSense, RowSense};
use crate::model::{erd_schedule, Instance, Solution, Time};
use crate::par::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("horizon {0} is negative")]
    NegativeHorizon(Time),
    #[error("job {job} has no arc within horizon {horizon} at any location")]
    Uncoverable { job: usize, horizon: Time },
    #[error("location {0} is out of range")]
    BadLocation(usize),
}

/// The graph of one candidate location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationGraph {
    pub location: usize,
    /// Sorted node times; always ends with the horizon.
    pub nodes: Vec<Time>,
    /// Start times of the arcs of each job, ascending.
    pub job_arcs: Vec<Vec<Time>>,
    /// `(q, r)` idle arcs, ascending in `q`.
    pub dummy_arcs: Vec<(Time, Time)>,
    /// Distinct release dates below the horizon, plus the horizon.
    pub release_set: Vec<Time>,
}

impl LocationGraph {
    /// Node where the unit flow of an opened machine enters.
    pub fn source(&self) -> Time {
        self.nodes[0]
    }

    pub fn node_index(&self, t: Time) -> Option<usize> {
        self.nodes.binary_search(&t).ok()
    }

    /// End of the idle arc leaving node `q`.
    pub fn idle_target(&self, q: Time) -> Option<Time> {
        // every node except the horizon has exactly one idle arc, stored in node order
        self.node_index(q).and_then(|i| self.dummy_arcs.get(i)).map(|a| a.1)
    }

    pub fn num_real_arcs(&self) -> usize {
        self.job_arcs.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcFlowGraph {
    pub horizon: Time,
    pub locations: Vec<LocationGraph>,
}

impl ArcFlowGraph {
    pub fn num_real_arcs(&self) -> usize {
        self.locations.iter().map(LocationGraph::num_real_arcs).sum()
    }

    pub fn num_dummy_arcs(&self) -> usize {
        self.locations.iter().map(|g| g.dummy_arcs.len()).sum()
    }

    pub fn num_nodes(&self) -> usize {
        self.locations.iter().map(|g| g.nodes.len()).sum()
    }

    /// Index into `locations` of the graph for instance location `k`.
    pub fn position(&self, k: usize) -> Option<usize> {
        self.locations.iter().position(|g| g.location == k)
    }

    /// One arc per line as `k j q r`, with `j = 0` for idle arcs and jobs
    /// numbered from 1.
    pub fn dump<W: io::Write>(&self, instance: &Instance, mut out: W) -> io::Result<()> {
        for g in &self.locations {
            let mut text = String::new();
            for (j, starts) in g.job_arcs.iter().enumerate() {
                for &q in starts {
                    let _ = writeln!(text, "{} {} {} {}", g.location, j + 1, q, q + instance.proc(j));
                }
            }
            for &(q, r) in &g.dummy_arcs {
                let _ = writeln!(text, "{} 0 {} {}", g.location, q, r);
            }
            out.write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

/// Number of job arcs of the time-indexed graph without pattern reduction:
/// every start in `[r_jk, T - p_j]`.
pub fn unreduced_arc_count(instance: &Instance, horizon: Time) -> u64 {
    let mut total = 0u64;
    for j in 0..instance.n() {
        for k in 0..instance.m() {
            let span = horizon - instance.proc(j) - instance.release(j, k) + 1;
            total += span.max(0) as u64;
        }
    }
    total
}

fn build_location(instance: &Instance, horizon: Time, k: usize) -> LocationGraph {
    let mut pattern = vec![false; horizon as usize + 1];
    let mut job_arcs = vec![Vec::new(); instance.n()];
    for j in instance.erd_order(k) {
        let p = instance.proc(j);
        let r = instance.release(j, k);
        if r <= horizon {
            pattern[r as usize] = true;
        }
        let mut t = horizon - p;
        // descending so an arc created here cannot seed another arc of the same job
        while t >= r {
            if pattern[t as usize] {
                pattern[(t + p) as usize] = true;
                job_arcs[j].push(t);
            }
            t -= 1;
        }
        job_arcs[j].reverse();
    }

    let mut release_set: Vec<Time> = (0..instance.n())
        .map(|j| instance.release(j, k))
        .filter(|&r| r < horizon)
        .collect();
    release_set.push(horizon);
    release_set.sort_unstable();
    release_set.dedup();

    let mut nodes = Vec::new();
    let mut dummy_arcs = Vec::new();
    let mut i = 0;
    for t in 0..horizon {
        while release_set[i] <= t {
            i += 1;
        }
        if pattern[t as usize] {
            nodes.push(t);
            dummy_arcs.push((t, release_set[i]));
        }
    }
    nodes.push(horizon);
    LocationGraph { location: k, nodes, job_arcs, dummy_arcs, release_set }
}

/// Builds the reduced graph over all locations.
pub fn build_graph(instance: &Instance, horizon: Time) -> Result<ArcFlowGraph, GraphError> {
    let all: Vec<usize> = (0..instance.m()).collect();
    build_graph_for(instance, horizon, &all)
}

/// Builds the reduced graph restricted to the given locations.
pub fn build_graph_for(instance: &Instance, horizon: Time, locations: &[usize]) -> Result<ArcFlowGraph, GraphError> {
    if horizon < 0 {
        return Err(GraphError::NegativeHorizon(horizon));
    }
    if let Some(&bad) = locations.iter().find(|&&k| k >= instance.m()) {
        return Err(GraphError::BadLocation(bad));
    }
    let graphs: Vec<LocationGraph> = locations
        .par_iter()
        .map(|&k| build_location(instance, horizon, k))
        .collect();
    for j in 0..instance.n() {
        if graphs.iter().all(|g| g.job_arcs[j].is_empty()) {
            return Err(GraphError::Uncoverable { job: j, horizon });
        }
    }
    Ok(ArcFlowGraph { horizon, locations: graphs })
}

/// What a model column stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Makespan,
    /// `y` of the location graph at this position.
    Open(usize),
    /// Job arc: graph position, job, start.
    Job { pos: usize, job: usize, q: Time },
    /// Idle arc: graph position, start.
    Idle { pos: usize, q: Time },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("value of column {0} is not integral")]
    Fractional(usize),
    #[error("flow at location {location} stops at node {node}")]
    BrokenPath { location: usize, node: Time },
    #[error("job {0} is not covered")]
    Uncovered(usize),
    #[error("more than p locations are opened")]
    TooManyMachines,
    #[error("assignment has {got} values, model has {expected} columns")]
    Length { got: usize, expected: usize },
}

const INTEGRALITY_TOL: f64 = 1e-6;

/// The arc-flow MIP (or a restricted master containing only some job arcs).
#[derive(Debug, Clone)]
pub struct AfModel {
    pub lp: LinearProgram,
    columns: Vec<Column>,
    index: HashMap<Column, usize>,
    n: usize,
    p: usize,
    // first flow row of each graph position
    flow_offset: Vec<usize>,
}

impl AfModel {
    /// Full model with every job arc.
    pub fn build(graph: &ArcFlowGraph, instance: &Instance) -> Self {
        Self::build_with(graph, instance, |_, _, _| true)
    }

    /// Model with the makespan, every `y`, every idle arc and the job arcs
    /// accepted by `keep(pos, job, q)`.
    pub fn build_with<F>(graph: &ArcFlowGraph, instance: &Instance, mut keep: F) -> Self
    where
        F: FnMut(usize, usize, Time) -> bool,
    {
        let n = instance.n();
        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        for _ in 0..n {
            lp.add_row(RowSense::Ge, 1.0);
        }
        for _ in 0..n {
            lp.add_row(RowSense::Le, 0.0);
        }
        lp.add_row(RowSense::Le, instance.p() as f64);
        let mut flow_offset = Vec::with_capacity(graph.locations.len());
        for g in &graph.locations {
            flow_offset.push(lp.num_rows());
            for _ in &g.nodes {
                lp.add_row(RowSense::Eq, 0.0);
            }
        }
        let mut model = Self {
            lp,
            columns: Vec::new(),
            index: HashMap::new(),
            n,
            p: instance.p(),
            flow_offset,
        };

        let cmax_entries = (0..n).map(|j| (model.link_row(j), -1.0)).collect();
        model.push(Column::Makespan, 1.0, 0.0, graph.horizon as f64, cmax_entries);
        for (pos, g) in graph.locations.iter().enumerate() {
            let src = model.flow_row(pos, 0);
            let sink = model.flow_row(pos, g.nodes.len() - 1);
            let upper = if src == sink { 0.0 } else { 1.0 };
            let entries = if src == sink {
                vec![(model.cardinality_row(), 1.0)]
            } else {
                vec![(src, -1.0), (sink, 1.0), (model.cardinality_row(), 1.0)]
            };
            model.push(Column::Open(pos), 0.0, 0.0, upper, entries);
        }
        for (pos, g) in graph.locations.iter().enumerate() {
            for &(q, _) in &g.dummy_arcs {
                model.add_idle_column(graph, pos, q);
            }
        }
        for (pos, g) in graph.locations.iter().enumerate() {
            for (j, starts) in g.job_arcs.iter().enumerate() {
                for &q in starts {
                    if keep(pos, j, q) {
                        model.add_job_column(graph, instance, pos, j, q);
                    }
                }
            }
        }
        model
    }

    fn push(&mut self, col: Column, cost: f64, lower: f64, upper: f64, entries: Vec<(usize, f64)>) -> usize {
        let idx = self.lp.add_column(cost, lower, upper, entries);
        self.columns.push(col);
        self.index.insert(col, idx);
        idx
    }

    pub fn cover_row(&self, job: usize) -> usize {
        job
    }

    pub fn link_row(&self, job: usize) -> usize {
        self.n + job
    }

    pub fn cardinality_row(&self) -> usize {
        2 * self.n
    }

    pub fn flow_row(&self, pos: usize, node: usize) -> usize {
        self.flow_offset[pos] + node
    }

    fn add_idle_column(&mut self, graph: &ArcFlowGraph, pos: usize, q: Time) -> usize {
        let g = &graph.locations[pos];
        let i = g.node_index(q).expect("idle arc start is a node");
        let r = g.idle_target(q).expect("idle arc exists");
        let o = g.node_index(r).expect("idle arc end is a node");
        let entries = vec![(self.flow_row(pos, i), 1.0), (self.flow_row(pos, o), -1.0)];
        self.push(Column::Idle { pos, q }, 0.0, 0.0, 1.0, entries)
    }

    /// Adds the job arc column if absent; returns its index.
    pub fn add_job_column(&mut self, graph: &ArcFlowGraph, instance: &Instance, pos: usize, job: usize, q: Time) -> usize {
        let key = Column::Job { pos, job, q };
        if let Some(&idx) = self.index.get(&key) {
            return idx;
        }
        let g = &graph.locations[pos];
        let r = q + instance.proc(job);
        let i = g.node_index(q).expect("job arc start is a node");
        let o = g.node_index(r).expect("job arc end is a node");
        let entries = vec![
            (self.cover_row(job), 1.0),
            (self.link_row(job), r as f64),
            (self.flow_row(pos, i), 1.0),
            (self.flow_row(pos, o), -1.0),
        ];
        self.push(key, 0.0, 0.0, 1.0, entries)
    }

    pub fn column_index(&self, col: &Column) -> Option<usize> {
        self.index.get(col).copied()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn num_job_columns(&self) -> usize {
        self.columns.iter().filter(|c| matches!(c, Column::Job { .. })).count()
    }

    /// `y` and job arcs are integer; the makespan and idle arcs are continuous.
    pub fn integrality(&self) -> Vec<bool> {
        self.columns
            .iter()
            .map(|c| matches!(c, Column::Open(_) | Column::Job { .. }))
            .collect()
    }

    /// Branching classes: locations first, then job arcs.
    pub fn priorities(&self) -> Vec<u8> {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Open(_) => 2,
                Column::Job { .. } => 1,
                _ => 0,
            })
            .collect()
    }

    pub fn duals(&self, graph: &ArcFlowGraph, sol: &LpSolution) -> DualValues {
        DualValues {
            pi: (0..self.n).map(|j| sol.duals[self.cover_row(j)]).collect(),
            gamma: (0..self.n).map(|j| sol.duals[self.link_row(j)]).collect(),
            tau: graph
                .locations
                .iter()
                .enumerate()
                .map(|(pos, g)| (0..g.nodes.len()).map(|i| sol.duals[self.flow_row(pos, i)]).collect())
                .collect(),
        }
    }

    /// Column values representing `solution`, or `None` when some machine
    /// schedule uses a location or arc missing from the model, or ends after
    /// the horizon.
    pub fn encode(&self, graph: &ArcFlowGraph, instance: &Instance, solution: &Solution) -> Option<Vec<f64>> {
        let mut x = vec![0.0; self.lp.num_cols()];
        let mut cmax = 0;
        for machine in &solution.machines {
            let schedule = erd_schedule(instance, machine.location, &machine.job_ids().collect::<Vec<_>>());
            if schedule.jobs.is_empty() {
                continue;
            }
            let pos = graph.position(machine.location)?;
            let g = &graph.locations[pos];
            x[self.column_index(&Column::Open(pos))?] = 1.0;
            let mut t = g.source();
            let walk_to = |t: &mut Time, target: Time, x: &mut Vec<f64>| -> Option<()> {
                while *t < target {
                    let idx = self.column_index(&Column::Idle { pos, q: *t })?;
                    x[idx] = 1.0;
                    *t = g.idle_target(*t)?;
                }
                (*t == target).then_some(())
            };
            for s in &schedule.jobs {
                walk_to(&mut t, s.start, &mut x)?;
                x[self.column_index(&Column::Job { pos, job: s.job, q: s.start })?] = 1.0;
                t = s.completion;
                cmax = cmax.max(s.completion);
            }
            walk_to(&mut t, graph.horizon, &mut x)?;
        }
        x[self.column_index(&Column::Makespan)?] = cmax as f64;
        Some(x)
    }

    /// Turns an integral assignment into a schedule. Jobs covered by more than
    /// one machine stay on the first one; each machine is then re-sequenced by
    /// ERD.
    pub fn extract_solution(&self, graph: &ArcFlowGraph, instance: &Instance, x: &[f64]) -> Result<Solution, ExtractError> {
        if x.len() != self.columns.len() {
            return Err(ExtractError::Length { got: x.len(), expected: self.columns.len() });
        }
        let integral = self.integrality();
        for (i, &v) in x.iter().enumerate() {
            if integral[i] && (v - v.round()).abs() > INTEGRALITY_TOL {
                return Err(ExtractError::Fractional(i));
            }
        }
        let on = |v: f64| v > 0.5;
        let mut next_arc: Vec<HashMap<Time, (Option<usize>, Time)>> = vec![HashMap::new(); graph.locations.len()];
        let mut opened = vec![false; graph.locations.len()];
        for (col, &v) in self.columns.iter().zip(x) {
            if !on(v) {
                continue;
            }
            match *col {
                Column::Open(pos) => opened[pos] = true,
                Column::Job { pos, job, q } => {
                    next_arc[pos].insert(q, (Some(job), q + instance.proc(job)));
                }
                Column::Idle { pos, q } => {
                    let r = graph.locations[pos].idle_target(q).unwrap_or(graph.horizon);
                    next_arc[pos].entry(q).or_insert((None, r));
                }
                Column::Makespan => {}
            }
        }
        if opened.iter().filter(|&&o| o).count() > self.p {
            return Err(ExtractError::TooManyMachines);
        }
        let mut covered = vec![false; instance.n()];
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (pos, g) in graph.locations.iter().enumerate() {
            if !opened[pos] {
                continue;
            }
            let mut t = g.source();
            let mut jobs = Vec::new();
            while t < graph.horizon {
                let &(job, r) = next_arc[pos]
                    .get(&t)
                    .ok_or(ExtractError::BrokenPath { location: g.location, node: t })?;
                if let Some(j) = job {
                    if !covered[j] {
                        covered[j] = true;
                        jobs.push(j);
                    }
                }
                t = r;
            }
            if !jobs.is_empty() {
                groups.push((g.location, jobs));
            }
        }
        if let Some(j) = covered.iter().position(|&c| !c) {
            return Err(ExtractError::Uncovered(j));
        }
        Ok(Solution::from_assignment(instance, groups))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpsolve::{SimplexSolver, Solver};

    fn two_jobs() -> Instance {
        Instance::new("two", 1, vec![2, 3], vec![vec![0], vec![1]], 1).unwrap()
    }

    #[test]
    fn hand_built_graph() {
        let inst = two_jobs();
        let g = build_graph(&inst, 6).unwrap();
        let lg = &g.locations[0];
        assert_eq!(lg.job_arcs[0], vec![0]);
        assert_eq!(lg.job_arcs[1], vec![1, 2]);
        assert_eq!(lg.nodes, vec![0, 1, 2, 4, 5, 6]);
        assert_eq!(lg.dummy_arcs, vec![(0, 1), (1, 6), (2, 6), (4, 6), (5, 6)]);
        assert_eq!(lg.release_set, vec![0, 1, 6]);
    }

    #[test]
    fn single_job_fills_horizon() {
        let inst = Instance::new("one", 1, vec![4], vec![vec![0]], 1).unwrap();
        let g = build_graph(&inst, 4).unwrap();
        assert_eq!(g.locations[0].job_arcs[0], vec![0]);
        assert_eq!(g.num_real_arcs(), 1);
    }

    #[test]
    fn too_small_horizon() {
        let inst = two_jobs();
        assert_eq!(build_graph(&inst, 3), Err(GraphError::Uncoverable { job: 1, horizon: 3 }));
    }

    #[test]
    fn release_beyond_horizon_is_ignored() {
        let inst = Instance::new("far", 1, vec![1, 1], vec![vec![0, 9], vec![0, 0]], 1).unwrap();
        let g = build_graph(&inst, 3).unwrap();
        assert!(g.locations[1].job_arcs[0].is_empty());
        assert_eq!(*g.locations[1].release_set.last().unwrap(), 3);
    }

    #[test]
    fn model_row_counts() {
        let inst = two_jobs();
        let g = build_graph(&inst, 6).unwrap();
        let model = AfModel::build(&g, &inst);
        // 2 cover + 2 link + 1 cardinality + 6 flow
        assert_eq!(model.lp.num_rows(), 2 + 2 + 1 + 6);
        // Cmax + y + 5 idle + 3 job arcs
        assert_eq!(model.lp.num_cols(), 1 + 1 + 5 + 3);
    }

    #[test]
    fn tiny_model_solves_to_optimum() {
        let inst = two_jobs();
        let g = build_graph(&inst, 6).unwrap();
        let model = AfModel::build(&g, &inst);
        let res = SimplexSolver::default()
            .solve_mip(&model.lp, &model.integrality(), None, &Default::default())
            .unwrap();
        assert_eq!(res.objective.map(|v| v.round() as Time), Some(5));
        let sol = model.extract_solution(&g, &inst, res.incumbent.as_ref().unwrap()).unwrap();
        assert_eq!(sol.makespan, 5);
    }

    #[test]
    fn encode_round_trip() {
        let inst = two_jobs();
        let g = build_graph(&inst, 6).unwrap();
        let model = AfModel::build(&g, &inst);
        let sol = Solution::from_assignment(&inst, [(0, vec![0, 1])]);
        let x = model.encode(&g, &inst, &sol).unwrap();
        assert!(model.lp.check_feasibility(&x, Some(&model.integrality()), 1e-9).is_ok());
        assert_eq!(model.extract_solution(&g, &inst, &x).unwrap(), sol);
    }

    #[test]
    fn dump_format() {
        let inst = two_jobs();
        let g = build_graph(&inst, 6).unwrap();
        let mut buf = Vec::new();
        g.dump(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l == "0 2 1 4"));
        assert!(text.lines().any(|l| l == "0 0 1 6"));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn reduction_never_exceeds_time_indexed_count() {
        let inst = Instance::new("u", 1, vec![2, 3, 1], vec![vec![0, 4], vec![3, 0], vec![5, 2]], 1).unwrap();
        for t in 6..15 {
            let g = build_graph(&inst, t).unwrap();
            assert!(g.num_real_arcs() as u64 <= unreduced_arc_count(&inst, t));
        }
    }
}
