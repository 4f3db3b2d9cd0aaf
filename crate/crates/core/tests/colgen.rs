mod common;

use scheloc::arcflow::{build_graph, AfModel};
use scheloc::colgen::{run_colgen, ColgenOptions};
use scheloc::heuristics::{run_ils, IlsConfig};
use scheloc::lpsolve::{SimplexSolver, Solver};
use scheloc::oracle::{solve_exact, DEFAULT_CAP};

#[test]
fn converged_value_equals_full_relaxation() {
    let solver = SimplexSolver::default();
    for inst in common::corpus(30) {
        let seed = run_ils(&inst, &IlsConfig { n_iter: 2, n_ils: 10, ..IlsConfig::default() }).solution;
        let g = build_graph(&inst, seed.makespan).unwrap();
        let cg = run_colgen(&g, &inst, &seed, &solver, &ColgenOptions::default()).unwrap();
        assert!(cg.proven);
        let full = solver.solve_lp(&AfModel::build(&g, &inst).lp, None).unwrap();
        assert!((cg.lb_lr - full.objective).abs() < 1e-6, "{}: {} vs {}", inst.name(), cg.lb_lr, full.objective);
        let opt = solve_exact(&inst, DEFAULT_CAP).unwrap().makespan;
        assert!(cg.lb_lr <= opt as f64 + 1e-6);
        assert!(cg.stats.max_duality_gap < 1e-6);
        assert!(cg.model.num_job_columns() <= AfModel::build(&g, &inst).num_job_columns());
    }
}

#[test]
fn iteration_cap_leaves_bound_unproven() {
    let solver = SimplexSolver::default();
    let inst = common::corpus(40).into_iter().max_by_key(|i| i.n()).unwrap();
    let seed = run_ils(&inst, &IlsConfig::default()).solution;
    let g = build_graph(&inst, seed.makespan).unwrap();
    let cg = run_colgen(&g, &inst, &seed, &solver, &ColgenOptions { max_iterations: 0, ..ColgenOptions::default() }).unwrap();
    let full = solver.solve_lp(&AfModel::build(&g, &inst).lp, None).unwrap();
    // a restricted master can only sit above the full relaxation
    assert!(cg.lb_lr >= full.objective - 1e-6);
    if !cg.proven {
        assert_eq!(cg.trace.len(), 1);
    }
}
