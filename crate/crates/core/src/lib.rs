//! Solvers for the discrete parallel machine makespan scheduling-location
//! problem: pick `p` machine sites among `m` candidates and schedule `n` jobs
//! with location-dependent release dates so the last job finishes as early as
//! possible.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: instances, ERD schedules, makespan evaluation, bounds and gaps.
//! * [`io`]: text instance format, benchmark generator, JSON solutions.
//! * [`arcflow`]: reduced time-indexed multigraph and the arc-flow MIP.
//! * [`lpsolve`]: bounded-variable simplex and branch-and-bound.
//! * [`colgen`]: column generation for the arc-flow LP relaxation.
//! * [`heuristics`]: multi-start iterated local search and the two
//!   MIP-based heuristics.
//! * [`framework`]: the staged pipeline that closes the gap between bounds.
//! * [`oracle`]: brute-force exact solver for tiny instances.
//!
//! Data-parallel loops (oracle enumeration, ILS starts, pricing) use rayon
//! unless the `parallel` feature is disabled.

pub mod arcflow;
pub mod colgen;
pub mod framework;
pub mod heuristics;
pub mod io;
pub mod lpsolve;
pub mod model;
pub mod oracle;
pub mod par;

pub use model::{Bounds, Instance, Solution, Time};
