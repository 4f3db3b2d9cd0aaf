//! Exhaustive exact solver for tiny instances.
//!
//! Every `p`-subset of locations is combined with every assignment of jobs to
//! the chosen machines; each machine is sequenced by ERD, which is optimal for
//! a single machine with release dates. Partial assignments whose machines
//! already finish later than the best known makespan are cut, which never
//! removes an optimal completion.

use std::sync::atomic::{AtomicI64, Ordering};

use thiserror::Error;

use crate::model::{Instance, Solution, Time};
use crate::par::*;

/// Default cap on `C(m, p) * p^n`.
pub const DEFAULT_CAP: f64 = 1e8;

#[derive(Debug, Error, PartialEq)]
#[error("search space {size:.3e} exceeds the cap {cap:.3e}")]
pub struct TooLarge {
    pub size: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub makespan: Time,
    pub solution: Solution,
    /// Search nodes visited over all subsets.
    pub nodes: u64,
}

/// `C(m, p) * p^n` as a float.
pub fn search_space(instance: &Instance) -> f64 {
    let (n, m, p) = (instance.n() as i32, instance.m(), instance.p());
    let mut subsets = 1.0;
    for i in 0..p {
        subsets = subsets * (m - i) as f64 / (i + 1) as f64;
    }
    subsets.round() * (p as f64).powi(n)
}

/// All `p`-subsets of `0..m` in lexicographic order.
pub fn location_subsets(m: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..p).collect();
    if p > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..p).rev().find(|&i| cur[i] < m - p + i) else {
            return out;
        };
        cur[i] += 1;
        for t in i + 1..p {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

struct Search<'a> {
    instance: &'a Instance,
    locations: &'a [usize],
    order: Vec<usize>,
    // per machine, jobs kept in ERD order
    machines: Vec<Vec<usize>>,
    best: Time,
    best_groups: Option<Vec<Vec<usize>>>,
    shared: &'a AtomicI64,
    nodes: u64,
}

impl Search<'_> {
    fn completion(&self, machine: usize) -> Time {
        let k = self.locations[machine];
        let mut clock = 0;
        for &j in &self.machines[machine] {
            clock = clock.max(self.instance.release(j, k)) + self.instance.proc(j);
        }
        clock
    }

    fn dfs(&mut self, depth: usize, current: Time) {
        self.nodes += 1;
        if depth == self.order.len() {
            if current < self.best {
                self.best = current;
                self.best_groups = Some(self.machines.clone());
                self.shared.fetch_min(current, Ordering::Relaxed);
            }
            return;
        }
        let job = self.order[depth];
        for machine in 0..self.machines.len() {
            let k = self.locations[machine];
            let at = self.machines[machine]
                .partition_point(|&o| self.instance.erd_key(o, k) < self.instance.erd_key(job, k));
            self.machines[machine].insert(at, job);
            let c = self.completion(machine);
            // local cut keeps the first optimum in search order; the shared cut is strict
            if c < self.best && c <= self.shared.load(Ordering::Relaxed) {
                self.dfs(depth + 1, current.max(c));
            }
            self.machines[machine].remove(at);
        }
    }
}

/// Exact optimum, or [`TooLarge`] when the enumeration exceeds `cap`.
pub fn solve_exact(instance: &Instance, cap: f64) -> Result<OracleResult, TooLarge> {
    let size = search_space(instance);
    if size > cap {
        return Err(TooLarge { size, cap });
    }
    let mut order: Vec<usize> = (0..instance.n()).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(instance.proc(j)), j));
    let subsets = location_subsets(instance.m(), instance.p());
    let shared = AtomicI64::new(Time::MAX);

    let results: Vec<(Option<(Time, Vec<Vec<usize>>)>, u64)> = subsets
        .par_iter()
        .map(|locations| {
            let mut search = Search {
                instance,
                locations,
                order: order.clone(),
                machines: vec![Vec::new(); locations.len()],
                best: Time::MAX,
                best_groups: None,
                shared: &shared,
                nodes: 0,
            };
            search.dfs(0, 0);
            (search.best_groups.map(|g| (search.best, g)), search.nodes)
        })
        .collect();

    let nodes = results.iter().map(|r| r.1).sum();
    let (idx, makespan, groups) = results
        .into_iter()
        .enumerate()
        .filter_map(|(i, (found, _))| found.map(|(c, g)| (i, c, g)))
        .min_by_key(|&(i, c, _)| (c, i))
        .expect("every instance has a feasible assignment");
    let solution = Solution::from_assignment(
        instance,
        subsets[idx]
            .iter()
            .zip(groups)
            .filter(|(_, jobs)| !jobs.is_empty())
            .map(|(&k, jobs)| (k, jobs)),
    );
    debug_assert_eq!(solution.makespan, makespan);
    Ok(OracleResult { makespan, solution, nodes })
}
