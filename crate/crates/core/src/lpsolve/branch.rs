//! Depth-first branch-and-bound for 0/1 (or general integer) MIPs.
//!
//! Nodes re-solve from their parent's optimal basis. Branching takes the
//! fractional variable with the highest priority class, most fractional
//! first. Every `restart_interval` nodes the open node with the best bound is
//! moved to the top of the stack.

use std::rc::Rc;
use std::time::{Duration, Instant};

use log::debug;

use super::simplex::{self, Basis, SimplexOptions};
use super::{LinearProgram, LpError, LpStats, ObjectiveSense};

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MipOptions {
    pub time_limit: Option<Duration>,
    /// Every integer-feasible objective value is an integer, so nodes whose
    /// bound rounds up to the incumbent can be pruned.
    pub integral_objective: bool,
    pub node_limit: Option<u64>,
    pub restart_interval: u64,
    /// Branching priority per column; higher classes branch first.
    pub priority: Option<Vec<u8>>,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            time_limit: None,
            integral_objective: false,
            node_limit: None,
            restart_interval: 10_000,
            priority: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    /// Stopped early with an incumbent.
    Feasible,
    Infeasible,
    /// Stopped early without an incumbent.
    NoSolution,
}

#[derive(Debug, Clone)]
pub struct MipResult {
    pub status: MipStatus,
    pub incumbent: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Valid bound on the optimum (lower bound when minimizing).
    pub bound: f64,
    pub nodes: u64,
    pub stats: LpStats,
}

struct Node {
    fixes: Vec<(usize, f64, f64)>,
    bound: f64,
    basis: Option<Rc<Basis>>,
}

pub(crate) fn branch_and_bound(
    lp: &LinearProgram,
    integer: &[bool],
    warm_start: Option<&[f64]>,
    options: &MipOptions,
    simplex_opts: &SimplexOptions,
    started: Instant,
) -> Result<MipResult, LpError> {
    if integer.len() != lp.num_cols() {
        return Err(LpError::Malformed("integrality mask length".into()));
    }
    // Internally minimize.
    let sign = match lp.sense() {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let deadline = options.time_limit.map(|d| started + d);
    let mut stats = LpStats::default();

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if let Some(x) = warm_start {
        lp.check_feasibility(x, Some(integer), INT_TOL)
            .map_err(LpError::InvalidWarmStart)?;
        incumbent = Some((sign * lp.objective_value(x), x.to_vec()));
    }

    let finish = |status: MipStatus, incumbent: Option<(f64, Vec<f64>)>, bound: f64, nodes: u64, stats: LpStats| {
        let (objective, x) = match incumbent {
            Some((v, x)) => (Some(sign * v), Some(x)),
            None => (None, None),
        };
        MipResult { status, incumbent: x, objective, bound: sign * bound, nodes, stats }
    };

    let timed_out = |now: Instant| deadline.is_some_and(|d| now >= d);
    if timed_out(Instant::now()) {
        let status = if incumbent.is_some() { MipStatus::Feasible } else { MipStatus::NoSolution };
        return Ok(finish(status, incumbent, f64::NEG_INFINITY, 0, stats));
    }

    let prunes = |bound: f64, inc: &Option<(f64, Vec<f64>)>| -> bool {
        match inc {
            None => false,
            Some((best, _)) => {
                if options.integral_objective {
                    bound > best - 1.0 + 1e-6
                } else {
                    bound >= best - 1e-9 * (1.0 + best.abs())
                }
            }
        }
    };

    let mut stack = vec![Node { fixes: Vec::new(), bound: f64::NEG_INFINITY, basis: None }];
    let mut nodes = 0u64;
    let base_lower = lp.lower().to_vec();
    let base_upper = lp.upper().to_vec();

    while let Some(node) = stack.pop() {
        if prunes(node.bound, &incumbent) {
            continue;
        }
        let now = Instant::now();
        let limit_hit = timed_out(now) || options.node_limit.is_some_and(|l| nodes >= l);
        if limit_hit {
            stack.push(node);
            break;
        }
        nodes += 1;
        if options.restart_interval > 0 && nodes.is_multiple_of(options.restart_interval) && !stack.is_empty() {
            let best = (0..stack.len())
                .min_by(|&a, &b| stack[a].bound.total_cmp(&stack[b].bound))
                .unwrap();
            let last = stack.len() - 1;
            stack.swap(best, last);
        }

        let mut lower = base_lower.clone();
        let mut upper = base_upper.clone();
        for &(j, lo, up) in &node.fixes {
            lower[j] = lo;
            upper[j] = up;
        }
        let sol = match simplex::solve(lp, &lower, &upper, node.basis.as_deref(), simplex_opts, deadline) {
            Ok(s) => s,
            Err(LpError::Infeasible) => continue,
            Err(LpError::TimeLimit) => {
                stack.push(node);
                break;
            }
            Err(e) => return Err(e),
        };
        stats.lps_solved += 1;
        stats.max_duality_gap = stats.max_duality_gap.max(sol.duality_gap_with_bounds(lp, &lower, &upper));
        let value = sign * sol.objective;
        if prunes(value, &incumbent) {
            continue;
        }

        let mut pick: Option<(usize, u8, f64)> = None;
        for (j, &v) in sol.x.iter().enumerate() {
            if !integer[j] {
                continue;
            }
            let frac = v - v.floor();
            if !(INT_TOL..=1.0 - INT_TOL).contains(&frac) {
                continue;
            }
            let class = options.priority.as_ref().map_or(0, |p| p[j]);
            let score = 0.5 - (frac - 0.5).abs();
            let better = match pick {
                None => true,
                Some((_, c, s)) => class > c || (class == c && score > s + 1e-12),
            };
            if better {
                pick = Some((j, class, score));
            }
        }

        match pick {
            None => {
                let mut x = sol.x;
                for (j, v) in x.iter_mut().enumerate() {
                    if integer[j] {
                        *v = v.round();
                    }
                }
                stats.incumbents_checked += 1;
                if lp.check_feasibility(&x, Some(integer), INT_TOL).is_err() {
                    stats.incumbent_violations += 1;
                    continue;
                }
                let obj = sign * lp.objective_value(&x);
                if incumbent.as_ref().is_none_or(|(best, _)| obj < *best - 1e-9) {
                    debug!("b&b node {nodes}: incumbent {obj}");
                    incumbent = Some((obj, x));
                }
            }
            Some((j, _, _)) => {
                let v = sol.x[j];
                let basis = Rc::new(sol.basis);
                let mut down = node.fixes.clone();
                down.push((j, lower[j], v.floor()));
                let mut up = node.fixes;
                up.push((j, v.ceil(), upper[j]));
                let down = Node { fixes: down, bound: value, basis: Some(basis.clone()) };
                let up = Node { fixes: up, bound: value, basis: Some(basis) };
                if v - v.floor() >= 0.5 {
                    stack.push(down);
                    stack.push(up);
                } else {
                    stack.push(up);
                    stack.push(down);
                }
            }
        }
    }

    let exhausted = stack.is_empty();
    if exhausted {
        return Ok(match incumbent {
            Some(inc) => {
                let v = inc.0;
                finish(MipStatus::Optimal, Some(inc), v, nodes, stats)
            }
            None => finish(MipStatus::Infeasible, None, f64::INFINITY, nodes, stats),
        });
    }
    // Open subtrees are bounded by their parents' LP values; pruned ones by the incumbent.
    let mut bound = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    if let Some((best, _)) = &incumbent {
        bound = bound.min(*best);
    }
    let status = if incumbent.is_some() { MipStatus::Feasible } else { MipStatus::NoSolution };
    Ok(finish(status, incumbent, bound, nodes, stats))
}
