//! Relocation perturbation.

use rand::Rng;

use crate::model::Instance;

use super::Machines;

/// Moves every machine in turn to a random location that no machine
/// currently occupies, then re-sequences it by ERD. Identity when `m == p`.
pub fn perturb<R: Rng + ?Sized>(instance: &Instance, machines: &[(usize, Vec<usize>)], rng: &mut R) -> Machines {
    let mut out = machines.to_vec();
    let m = instance.m();
    if out.len() >= m {
        return out;
    }
    let mut used = vec![false; m];
    for (k, _) in &out {
        used[*k] = true;
    }
    for i in 0..out.len() {
        let free: Vec<usize> = (0..m).filter(|&k| !used[k]).collect();
        let next = free[rng.gen_range(0..free.len())];
        used[out[i].0] = false;
        used[next] = true;
        out[i].0 = next;
        out[i].1.sort_by_key(|&j| instance.erd_key(j, next));
    }
    out
}
