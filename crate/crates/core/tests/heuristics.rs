mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scheloc::heuristics::{local_search, perturb, run_ils, CaseCoverage, IlsConfig, SearchAuxiliary};
use scheloc::model::{erd_schedule, evaluate, Solution};

#[test]
fn swap_prediction_matches_rebuild() {
    let mut coverage = CaseCoverage::default();
    for seed in 0..20 {
        let inst = common::search_instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let machines = common::random_machines(&inst, &mut rng);
            let aux = SearchAuxiliary::new(&inst, &machines);
            let seqs: Vec<(usize, Vec<usize>)> = aux.machines();
            for m1 in 0..seqs.len() {
                for m2 in m1 + 1..seqs.len() {
                    for i1 in 0..seqs[m1].1.len() {
                        for i2 in 0..seqs[m2].1.len() {
                            let out = aux.swap_outcome(m1, i1, m2, i2);
                            coverage.record(out.cases[0]);
                            coverage.record(out.cases[1]);
                            let mut after = seqs.clone();
                            let (j1, j2) = (after[m1].1[i1], after[m2].1[i2]);
                            after[m1].1[i1] = j2;
                            after[m2].1[i2] = j1;
                            let rebuilt = Solution::from_assignment(&inst, after.iter().cloned());
                            assert_eq!(out.makespan, rebuilt.makespan);
                            assert_eq!(out.completion[0], erd_schedule(&inst, after[m1].0, &after[m1].1).completion());
                            assert_eq!(out.completion[1], erd_schedule(&inst, after[m2].0, &after[m2].1).completion());
                        }
                    }
                }
            }
        }
    }
    assert!(coverage.all_covered(), "{:?}", coverage.counts);
}

#[test]
fn local_search_never_worsens() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..40 {
        let inst = common::search_instance(seed);
        let machines = common::random_machines(&inst, &mut rng);
        let before = Solution::from_assignment(&inst, machines.iter().cloned()).makespan;
        let after = Solution::from_assignment(&inst, local_search(&inst, &machines));
        assert!(after.makespan <= before);
        assert_eq!(evaluate(&after, &inst), Ok(after.makespan));
    }
}

#[test]
fn perturbation_keeps_every_job_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..40 {
        let inst = common::search_instance(seed);
        let machines = common::random_machines(&inst, &mut rng);
        let next = perturb(&inst, &machines, &mut rng);
        let sol = Solution::from_assignment(&inst, next.iter().cloned());
        assert!(evaluate(&sol, &inst).is_ok());
        assert_eq!(next.len(), machines.len());
    }
}

#[test]
fn ils_is_reproducible_and_never_below_oracle() {
    for inst in common::corpus(20) {
        let cfg = IlsConfig { seed: 4, ..IlsConfig::default() };
        let a = run_ils(&inst, &cfg);
        let b = run_ils(&inst, &cfg);
        assert_eq!(a.solution, b.solution);
        let opt = scheloc::oracle::solve_exact(&inst, 1e8).unwrap().makespan;
        assert!(a.solution.makespan >= opt);
    }
}
