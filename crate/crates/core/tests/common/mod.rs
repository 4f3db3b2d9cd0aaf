//! Shared helpers for the integration tests: a seeded tiny-instance corpus
//! and small reference solvers that share no code with the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scheloc::lpsolve::{LinearProgram, ObjectiveSense, RowSense};
use scheloc::{Instance, Time};

/// Random instance with `n <= 9`, `m <= 5`, `p <= 3`, processing times in
/// `[1, 9]` and release dates in `[0, 9]`.
pub fn tiny_instance(seed: u64) -> Instance {
    tiny_instance_with(seed, 9)
}

pub fn tiny_instance_with(seed: u64, max_n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=5);
    let p = rng.gen_range(1..=m.min(3));
    let proc = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let release = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..=9)).collect()).collect();
    Instance::new(format!("tiny{seed}"), p, proc, release, 1).expect("valid tiny instance")
}

/// The seeded corpus used by the acceptance suite.
pub fn corpus(count: usize) -> Vec<Instance> {
    (0..count as u64).map(|s| tiny_instance(1000 + s)).collect()
}

/// Shortest completion of the job set `mask` on one machine at `k`, by
/// dynamic programming over the last job processed.
fn single_machine_table(inst: &Instance, k: usize) -> Vec<Time> {
    let n = inst.n();
    let mut best = vec![Time::MAX; 1 << n];
    best[0] = 0;
    for mask in 1usize..1 << n {
        for j in 0..n {
            if mask & (1 << j) != 0 {
                let prev = best[mask ^ (1 << j)];
                let c = prev.max(inst.release(j, k)) + inst.proc(j);
                best[mask] = best[mask].min(c);
            }
        }
    }
    best
}

/// Optimal makespan by dynamic programming over job subsets, for `n <= 8`.
/// Machines may stay empty, so at most `p` distinct locations are used.
pub fn dp_optimum(inst: &Instance) -> Time {
    let n = inst.n();
    assert!(n <= 8, "dp oracle is exponential");
    let full = (1usize << n) - 1;
    let tables: Vec<Vec<Time>> = (0..inst.m()).map(|k| single_machine_table(inst, k)).collect();
    // f[c][mask]: best makespan of mask over locations < k using c machines
    let p = inst.p();
    let mut f = vec![vec![Time::MAX; 1 << n]; p + 1];
    f[0][0] = 0;
    for table in &tables {
        let mut next = f.clone();
        for c in 0..p {
            for mask in 0..=full {
                let base = f[c][mask];
                if base == Time::MAX {
                    continue;
                }
                let rest = full ^ mask;
                let mut sub = rest;
                while sub > 0 {
                    let v = base.max(table[sub]);
                    let slot = &mut next[c + 1][mask | sub];
                    *slot = (*slot).min(v);
                    sub = (sub - 1) & rest;
                }
            }
        }
        f = next;
    }
    (0..=p).map(|c| f[c][full]).min().unwrap()
}

/// Best single-machine makespan by trying every order.
pub fn permutation_optimum(inst: &Instance, k: usize, jobs: &[usize]) -> Time {
    fn rec(inst: &Instance, k: usize, left: &mut Vec<usize>, clock: Time, best: &mut Time) {
        if left.is_empty() {
            *best = (*best).min(clock);
            return;
        }
        for i in 0..left.len() {
            let j = left.remove(i);
            rec(inst, k, left, clock.max(inst.release(j, k)) + inst.proc(j), best);
            left.insert(i, j);
        }
    }
    let mut best = Time::MAX;
    rec(inst, k, &mut jobs.to_vec(), 0, &mut best);
    best
}

#[derive(Debug, PartialEq)]
pub enum DenseOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Two-phase dense tableau simplex with Bland's rule. Lower bounds must be
/// finite; finite upper bounds become explicit rows.
pub fn dense_simplex(lp: &LinearProgram) -> DenseOutcome {
    const EPS: f64 = 1e-9;
    let ncols = lp.num_cols();
    let sign = if lp.sense() == ObjectiveSense::Maximize { -1.0 } else { 1.0 };

    // rows over shifted variables x' = x - l
    let mut rows: Vec<(Vec<f64>, RowSense, f64)> = Vec::new();
    let mut dense = vec![vec![0.0; ncols]; lp.num_rows()];
    for j in 0..ncols {
        for &(i, a) in lp.column(j) {
            dense[i][j] += a;
        }
    }
    for (i, row) in dense.into_iter().enumerate() {
        let shift: f64 = (0..ncols).map(|j| row[j] * lp.lower()[j]).sum();
        rows.push((row, lp.row_sense()[i], lp.rhs()[i] - shift));
    }
    for j in 0..ncols {
        assert!(lp.lower()[j].is_finite(), "dense simplex needs finite lower bounds");
        if lp.upper()[j].is_finite() {
            let mut row = vec![0.0; ncols];
            row[j] = 1.0;
            rows.push((row, RowSense::Le, lp.upper()[j] - lp.lower()[j]));
        }
    }
    for (row, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            row.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *sense = match *sense {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != RowSense::Le).count();
    let width = ncols + n_slack + n_art;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut a) = (ncols, ncols + n_slack);
    for (i, (row, sense, rhs)) in rows.iter().enumerate() {
        t[i][..ncols].copy_from_slice(row);
        t[i][width] = *rhs;
        match sense {
            RowSense::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            RowSense::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            RowSense::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }

    fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> bool {
        let m = t.len();
        let width = cost.len();
        loop {
            // reduced costs d_j = c_j - c_B B^-1 a_j
            let entering = (0..allowed).find(|&j| {
                if basis.contains(&j) {
                    return false;
                }
                let d = cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                d < -EPS
            });
            let Some(e) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][e] > EPS {
                    let ratio = t[i][width] / t[i][e];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            let piv = t[r][e];
            t[r].iter_mut().for_each(|v| *v /= piv);
            for i in 0..m {
                if i != r && t[i][e].abs() > 0.0 {
                    let f = t[i][e];
                    let pivot_row = t[r].clone();
                    t[i].iter_mut().zip(pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
            basis[r] = e;
        }
    }

    let mut phase1 = vec![0.0; width];
    phase1[ncols + n_slack..].iter_mut().for_each(|c| *c = 1.0);
    run(&mut t, &mut basis, &phase1, width);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= ncols + n_slack).map(|i| t[i][width]).sum();
    if infeas > 1e-7 {
        return DenseOutcome::Infeasible;
    }
    // drive zero-valued artificials out of the basis where possible
    for i in 0..m {
        if basis[i] >= ncols + n_slack {
            if let Some(e) = (0..ncols + n_slack).find(|&j| t[i][j].abs() > 1e-7 && !basis.contains(&j)) {
                let piv = t[i][e];
                t[i].iter_mut().for_each(|v| *v /= piv);
                for r in 0..m {
                    if r != i && t[r][e].abs() > 0.0 {
                        let f = t[r][e];
                        let pivot_row = t[i].clone();
                        t[r].iter_mut().zip(pivot_row).for_each(|(v, p)| *v -= f * p);
                    }
                }
                basis[i] = e;
            }
        }
    }
    let mut phase2 = vec![0.0; width];
    for j in 0..ncols {
        phase2[j] = sign * lp.cost()[j];
    }
    if !run(&mut t, &mut basis, &phase2, ncols + n_slack) {
        return DenseOutcome::Unbounded;
    }
    let mut x = lp.lower().to_vec();
    for i in 0..m {
        if basis[i] < ncols {
            x[basis[i]] += t[i][width];
        }
    }
    DenseOutcome::Optimal(lp.objective_value(&x))
}

/// Medium random instance for move-evaluation tests: longer machine
/// sequences than the tiny corpus.
pub fn search_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(8..=16);
    let m = rng.gen_range(3..=6);
    let p = rng.gen_range(2..=3.min(m));
    let proc = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let release = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..=25)).collect()).collect();
    Instance::new(format!("search{seed}"), p, proc, release, 1).expect("valid instance")
}

/// Random `p` distinct locations and a random job assignment; machines may
/// be empty.
pub fn random_machines<R: Rng>(inst: &Instance, rng: &mut R) -> Vec<(usize, Vec<usize>)> {
    let locs = rand::seq::index::sample(rng, inst.m(), inst.p()).into_vec();
    let mut machines: Vec<(usize, Vec<usize>)> = locs.into_iter().map(|k| (k, Vec::new())).collect();
    for j in 0..inst.n() {
        let i = rng.gen_range(0..machines.len());
        machines[i].1.push(j);
    }
    machines
}
