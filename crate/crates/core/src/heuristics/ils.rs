//! Multi-start iterated local search.

use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, Solution, Time};
use crate::par::*;

use super::construct::construct;
use super::local_search::local_search;
use super::perturb::perturb;
use super::{IlsConfig, Machines};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlsResult {
    pub solution: Solution,
    /// Final incumbent makespan of every start.
    pub start_makespans: Vec<Time>,
}

fn makespan(instance: &Instance, machines: &Machines) -> Time {
    Solution::from_assignment(instance, machines.iter().cloned()).makespan
}

/// Generator of start `index`: the configured seed on its own stream.
pub fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One start: construct, then alternate local search and perturbation of the
/// incumbent until `n_ils` consecutive rounds fail to improve it strictly.
pub fn run_start(instance: &Instance, config: &IlsConfig, index: usize) -> (Machines, Time) {
    let mut rng = start_rng(config.seed, index);
    let deterministic = index + 1 == config.n_iter;
    let mut current = construct(instance, deterministic, &mut rng);
    let mut incumbent = current.clone();
    let mut incumbent_value = makespan(instance, &incumbent);
    let mut rounds = 1;
    while rounds <= config.n_ils {
        current = local_search(instance, &current);
        let value = makespan(instance, &current);
        if value < incumbent_value {
            incumbent = current.clone();
            incumbent_value = value;
            rounds = 0;
            debug!("ils start {index}: incumbent {value}");
        }
        if config.stop_at.is_some_and(|lb| incumbent_value <= lb) {
            break;
        }
        current = perturb(instance, &incumbent, &mut rng);
        rounds += 1;
    }
    (incumbent, incumbent_value)
}

/// Runs `n_iter` independent starts (the last with ranked locations, the
/// others random) and keeps the best; ties go to the earliest start.
pub fn run_ils(instance: &Instance, config: &IlsConfig) -> IlsResult {
    let starts: Vec<(Machines, Time)> = (0..config.n_iter.max(1))
        .into_par_iter()
        .map(|i| run_start(instance, config, i))
        .collect();
    let start_makespans: Vec<Time> = starts.iter().map(|s| s.1).collect();
    let (best, _) = starts
        .into_iter()
        .enumerate()
        .min_by_key(|(i, s)| (s.1, *i))
        .map(|(_, s)| s)
        .expect("at least one start");
    IlsResult { solution: Solution::from_assignment(instance, best), start_makespans }
}
