mod common;

use std::time::Duration;

use scheloc::framework::{run_framework, FrameworkConfig, Stage};
use scheloc::model::evaluate;
use scheloc::oracle::{solve_exact, DEFAULT_CAP};

fn config() -> FrameworkConfig {
    FrameworkConfig::default().with_mip_time_limit(Duration::from_secs(30))
}

#[test]
fn matches_oracle_with_monotone_bounds() {
    for inst in common::corpus(40) {
        let opt = solve_exact(&inst, DEFAULT_CAP).unwrap().makespan;
        let res = run_framework(&inst, &config());
        assert!(res.optimal, "{} not closed: {}", inst.name(), res.bounds);
        assert_eq!(res.solution.makespan, opt);
        assert_eq!(evaluate(&res.solution, &inst), Ok(res.bounds.lb));
        for w in res.reports.windows(2) {
            assert!(w[1].exit.lb >= w[0].exit.lb && w[1].exit.ub <= w[0].exit.ub);
        }
        for r in &res.reports {
            assert!(r.exit.lb <= opt && (r.exit.ub == i64::MAX || r.exit.ub >= opt));
        }
    }
}

#[test]
fn dropping_a_stage_never_helps() {
    // weak ILS so later stages matter
    let mut base = config();
    base.ils.n_iter = 1;
    base.ils.n_ils = 1;
    for inst in common::corpus(30) {
        let full = run_framework(&inst, &base).bounds.ub;
        for stage in [Stage::Cg, Stage::AfCg, Stage::AfSubsetM, Stage::Full] {
            let mut cfg = base.clone();
            cfg.disabled.push(stage);
            assert!(run_framework(&inst, &cfg).bounds.ub >= full, "{} without {stage}", inst.name());
        }
    }
}

#[test]
fn full_model_with_zero_time_keeps_warm_start() {
    let inst = common::tiny_instance(7);
    let cfg = FrameworkConfig::default().with_mip_time_limit(Duration::ZERO);
    let solver = scheloc::lpsolve::SimplexSolver::default();
    let ils = scheloc::framework::run_stage(&inst, Stage::Ils, &cfg, &solver);
    let full = scheloc::framework::run_stage(&inst, Stage::Full, &cfg, &solver);
    assert!(full.solution.makespan <= ils.solution.makespan);
    assert!(full.bounds.lb <= full.bounds.ub);
}
