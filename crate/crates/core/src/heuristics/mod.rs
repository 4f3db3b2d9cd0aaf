//! Upper-bound procedures: multi-start ILS and two MIP-based heuristics
//! over restricted arc-flow models.

mod auxiliary;
mod concat;
mod construct;
mod ils;
mod local_search;
mod mip;
mod perturb;

use std::time::Duration;

use crate::model::Time;

pub use auxiliary::{CaseCoverage, SearchAuxiliary, SwapCase, SwapOutcome};
pub use concat::SubsequenceStats;
pub use construct::{assign_jobs, construct, random_locations, ranked_locations};
pub use ils::{run_ils, run_start, start_rng, IlsResult};
pub use local_search::{best_swap, local_search};
pub use mip::{af_cg_heuristic, af_subset_m_heuristic, default_subset, framework_subset, MipHeuristicResult};
pub use perturb::perturb;

/// Machines as `(location, jobs)`.
pub type Machines = Vec<(usize, Vec<usize>)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlsConfig {
    /// Number of starts.
    pub n_iter: usize,
    /// Consecutive non-improving rounds that end a start.
    pub n_ils: usize,
    pub seed: u64,
    /// Time limit for each MIP heuristic.
    pub mip_time_limit: Duration,
    /// A start stops as soon as its incumbent reaches this value.
    pub stop_at: Option<Time>,
}

impl Default for IlsConfig {
    fn default() -> Self {
        Self { n_iter: 10, n_ils: 100, seed: 0, mip_time_limit: Duration::from_secs(120), stop_at: None }
    }
}
