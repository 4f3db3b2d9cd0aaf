//! Initial solutions: location choice, then greedy earliest-completion
//! assignment, then ERD sequencing.

use rand::seq::index::sample;
use rand::Rng;

use crate::model::{Instance, Time};

use super::Machines;

/// `count` locations ranked by the release dates of the jobs they are
/// closest to.
///
/// Each job's closest location is taken (excluding the location with the
/// job's own index when `n == m`); pairs are sorted by release date and the
/// first distinct locations are kept. If fewer than `count` emerge, the
/// procedure repeats without the locations already chosen.
pub fn ranked_locations(instance: &Instance, count: usize) -> Vec<usize> {
    let (n, m) = (instance.n(), instance.m());
    let count = count.min(m);
    let square = n == m;
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    let mut taken = vec![false; m];
    while chosen.len() < count {
        let mut closest: Vec<(Time, usize, usize)> = (0..n)
            .filter_map(|j| {
                (0..m)
                    .filter(|&k| !taken[k] && !(square && k == j))
                    .min_by_key(|&k| (instance.release(j, k), k))
                    .map(|k| (instance.release(j, k), j, k))
            })
            .collect();
        closest.sort();
        let before = chosen.len();
        for (_, _, k) in closest {
            if chosen.len() == count {
                break;
            }
            if !taken[k] {
                taken[k] = true;
                chosen.push(k);
            }
        }
        if chosen.len() == before {
            // only self-locations remained; take them in index order
            for k in 0..m {
                if chosen.len() < count && !taken[k] {
                    taken[k] = true;
                    chosen.push(k);
                }
            }
        }
    }
    chosen
}

/// `p` distinct locations drawn uniformly.
pub fn random_locations<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Vec<usize> {
    sample(rng, instance.m(), instance.p()).into_vec()
}

/// Greedy assignment: for every machine find the unassigned job that can
/// start earliest there (ties to the longer job), then commit the
/// machine/job pair finishing first (ties to the longer job, then the lower
/// machine). Machines are finally sequenced by ERD.
pub fn assign_jobs(instance: &Instance, locations: &[usize]) -> Machines {
    let n = instance.n();
    let mut clock: Vec<Time> = vec![0; locations.len()];
    let mut jobs: Vec<Vec<usize>> = vec![Vec::new(); locations.len()];
    let mut assigned = vec![false; n];
    for _ in 0..n {
        let mut best: Option<(Time, std::cmp::Reverse<Time>, usize, usize)> = None;
        for (i, &k) in locations.iter().enumerate() {
            let pick = (0..n)
                .filter(|&j| !assigned[j])
                .min_by_key(|&j| (clock[i].max(instance.release(j, k)), std::cmp::Reverse(instance.proc(j)), j))
                .expect("an unassigned job remains");
            let finish = clock[i].max(instance.release(pick, k)) + instance.proc(pick);
            let key = (finish, std::cmp::Reverse(instance.proc(pick)), i, pick);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let (finish, _, i, j) = best.expect("at least one machine");
        clock[i] = finish;
        assigned[j] = true;
        jobs[i].push(j);
    }
    locations
        .iter()
        .zip(jobs)
        .map(|(&k, mut js)| {
            js.sort_by_key(|&j| instance.erd_key(j, k));
            (k, js)
        })
        .collect()
}

/// Initial solution with ranked (`deterministic`) or random locations.
pub fn construct<R: Rng + ?Sized>(instance: &Instance, deterministic: bool, rng: &mut R) -> Machines {
    let locations = if deterministic {
        ranked_locations(instance, instance.p())
    } else {
        random_locations(instance, rng)
    };
    assign_jobs(instance, &locations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Solution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_machine_goes_to_closest_location() {
        let inst = Instance::new("c", 1, vec![2, 3], vec![vec![5, 1, 4], vec![6, 3, 0]], 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sol = construct(&inst, true, &mut rng);
        // job 1 has release 0 at location 2, the smallest release overall
        assert_eq!(sol.len(), 1);
        assert_eq!(sol[0].0, 2);
        assert_eq!(sol[0].1, vec![1, 0]);
    }

    #[test]
    fn square_instance_skips_own_index() {
        // job j is released at 0 at location j
        let inst = Instance::new("sq", 1, vec![1, 1], vec![vec![0, 5], vec![3, 0]], 1).unwrap();
        assert_eq!(ranked_locations(&inst, 1), vec![0]);
        assert_eq!(ranked_locations(&inst, 2), vec![0, 1]);
    }

    #[test]
    fn repeats_when_few_distinct_locations() {
        let inst = Instance::new("r", 3, vec![1, 1, 1], vec![vec![0, 4, 5, 6], vec![0, 3, 9, 9], vec![1, 2, 2, 9]], 1).unwrap();
        // every job is closest to location 0, then to 1, then to 2
        assert_eq!(ranked_locations(&inst, 3), vec![0, 1, 2]);
    }

    #[test]
    fn random_constructions_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..100u64 {
            let n = 1 + (seed % 8) as usize;
            let m = 2 + (seed % 3) as usize;
            let p = 1 + (seed % 2) as usize;
            let proc: Vec<Time> = (0..n).map(|j| 1 + ((seed as usize + j) % 5) as Time).collect();
            let rel: Vec<Vec<Time>> = (0..n).map(|j| (0..m).map(|k| ((j * 7 + k * 3 + seed as usize) % 10) as Time).collect()).collect();
            let inst = Instance::new("r", p, proc, rel, 1).unwrap();
            let groups = construct(&inst, seed % 2 == 0, &mut rng);
            let sol = Solution::from_assignment(&inst, groups);
            assert_eq!(evaluate(&sol, &inst), Ok(sol.makespan));
        }
    }
}
