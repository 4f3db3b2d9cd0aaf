//! MIP heuristics: the arc-flow model restricted to column-generation
//! columns, or restricted to a subset of candidate locations.

use std::time::Duration;

use log::{debug, warn};
use rand::seq::index::sample;
use rand::Rng;

use crate::arcflow::{build_graph_for, AfModel, ArcFlowGraph, GraphError};
use crate::colgen::ColgenResult;
use crate::lpsolve::{LpStats, MipOptions, MipStatus, Solver};
use crate::model::{Instance, Solution, Time};

use super::construct::ranked_locations;

#[derive(Debug, Clone)]
pub struct MipHeuristicResult {
    /// Best schedule found (the warm start when the solver found nothing better).
    pub solution: Option<Solution>,
    /// `None` when the solver failed and the warm start was kept.
    pub status: Option<MipStatus>,
    /// Dual bound of the model that was solved.
    pub bound: f64,
    pub stats: LpStats,
}

fn mip_options(model: &AfModel, time_limit: Duration) -> MipOptions {
    MipOptions {
        time_limit: Some(time_limit),
        integral_objective: true,
        priority: Some(model.priorities()),
        ..MipOptions::default()
    }
}

/// Solves `model` as a MIP, warm-started from `warm` when it fits, and turns
/// the incumbent into a schedule.
pub fn solve_model(
    model: &AfModel,
    graph: &ArcFlowGraph,
    instance: &Instance,
    warm: Option<&Solution>,
    solver: &dyn Solver,
    time_limit: Duration,
) -> MipHeuristicResult {
    let warm_x = warm.and_then(|s| model.encode(graph, instance, s));
    if warm.is_some() && warm_x.is_none() {
        debug!("warm start does not fit the restricted model");
    }
    let warm_value = warm.filter(|_| warm_x.is_some()).cloned();
    let integer = model.integrality();
    let res = match solver.solve_mip(&model.lp, &integer, warm_x.as_deref(), &mip_options(model, time_limit)) {
        Ok(r) => r,
        Err(e) => {
            warn!("mip solve failed: {e}");
            return MipHeuristicResult { solution: warm_value, status: None, bound: f64::NEG_INFINITY, stats: LpStats::default() };
        }
    };
    let mut solution = res
        .incumbent
        .as_ref()
        .and_then(|x| match model.extract_solution(graph, instance, x) {
            Ok(s) => Some(s),
            Err(e) => {
                warn!("could not extract mip incumbent: {e}");
                None
            }
        });
    if let Some(w) = &warm_value {
        if solution.as_ref().is_none_or(|s| s.makespan > w.makespan) {
            solution = Some(w.clone());
        }
    }
    MipHeuristicResult { solution, status: Some(res.status), bound: res.bound, stats: res.stats }
}

/// Integer solve over the columns generated by column generation, seeded
/// with `seed`; never worse than the seed.
pub fn af_cg_heuristic(
    instance: &Instance,
    graph: &ArcFlowGraph,
    colgen: &ColgenResult,
    seed: &Solution,
    solver: &dyn Solver,
    time_limit: Duration,
) -> MipHeuristicResult {
    solve_model(&colgen.model, graph, instance, Some(seed), solver, time_limit)
}

/// Integer solve of the arc-flow model over the locations in `subset` with
/// horizon `horizon`.
pub fn af_subset_m_heuristic(
    instance: &Instance,
    subset: &[usize],
    horizon: Time,
    warm: Option<&Solution>,
    solver: &dyn Solver,
    time_limit: Duration,
) -> Result<MipHeuristicResult, GraphError> {
    let mut locations = subset.to_vec();
    locations.sort_unstable();
    locations.dedup();
    let graph = build_graph_for(instance, horizon, &locations)?;
    let model = AfModel::build(&graph, instance);
    debug!(
        "subset model: {} locations, {} rows, {} columns",
        locations.len(),
        model.lp.num_rows(),
        model.lp.num_cols()
    );
    Ok(solve_model(&model, &graph, instance, warm, solver, time_limit))
}

/// `min(m, floor(1.5 p))` locations in ranked order.
pub fn default_subset(instance: &Instance) -> Vec<usize> {
    let count = (3 * instance.p() / 2).min(instance.m()).max(instance.p());
    ranked_locations(instance, count)
}

/// The incumbent's locations plus `min(floor(p / 2), m - p)` others drawn at
/// random.
pub fn framework_subset<R: Rng + ?Sized>(instance: &Instance, incumbent: &[usize], rng: &mut R) -> Vec<usize> {
    let mut subset = incumbent.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let others: Vec<usize> = (0..instance.m()).filter(|k| !subset.contains(k)).collect();
    let extra = (instance.p() / 2).min(instance.m() - instance.p()).min(others.len());
    subset.extend(sample(rng, others.len(), extra).into_iter().map(|i| others[i]));
    subset.sort_unstable();
    subset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcflow::build_graph;
    use crate::colgen::{run_colgen, ColgenOptions};
    use crate::lpsolve::SimplexSolver;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inst() -> Instance {
        Instance::new(
            "m",
            2,
            vec![2, 3, 1, 2, 2],
            vec![vec![0, 2, 1], vec![1, 0, 3], vec![4, 1, 0], vec![2, 2, 2], vec![0, 3, 1]],
            1,
        )
        .unwrap()
    }

    #[test]
    fn subset_sizes() {
        let i = inst();
        assert_eq!(default_subset(&i).len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = framework_subset(&i, &[0, 2], &mut rng);
        assert_eq!(s.len(), 3);
        assert!(s.contains(&0) && s.contains(&2));
    }

    #[test]
    fn cg_heuristic_never_worse_than_seed() {
        let i = inst();
        let seed = Solution::from_assignment(&i, [(0, vec![0, 1, 2]), (1, vec![3, 4])]);
        let graph = build_graph(&i, seed.makespan).unwrap();
        let solver = SimplexSolver::default();
        let cg = run_colgen(&graph, &i, &seed, &solver, &ColgenOptions::default()).unwrap();
        let res = af_cg_heuristic(&i, &graph, &cg, &seed, &solver, Duration::from_secs(10));
        let sol = res.solution.unwrap();
        assert!(sol.makespan <= seed.makespan);
        assert_eq!(crate::model::evaluate(&sol, &i), Ok(sol.makespan));
    }

    #[test]
    fn full_subset_matches_full_model() {
        let i = inst();
        let seed = Solution::from_assignment(&i, [(0, vec![0, 1, 2]), (1, vec![3, 4])]);
        let solver = SimplexSolver::default();
        let res = af_subset_m_heuristic(&i, &[0, 1, 2], seed.makespan, Some(&seed), &solver, Duration::from_secs(10)).unwrap();
        assert_eq!(res.status, Some(MipStatus::Optimal));
        let opt = crate::oracle::solve_exact(&i, 1e8).unwrap().makespan;
        assert_eq!(res.solution.unwrap().makespan, opt);
    }
}
