//! Problem data, schedules and the basic measures used by every solver.
//!
//! All times are integers. Instances whose raw release dates are fractional
//! are scaled on input (see [`crate::io`]) and remember the factor in
//! [`Instance::scale`].

use std::cmp::{Ordering, Reverse};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer time unit (after scaling).
pub type Time = i64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("machine count p={p} must satisfy 1 <= p <= m={m}")]
    MachineCount { p: usize, m: usize },
    #[error("release matrix row {row} has {got} entries, expected {expected}")]
    RaggedRelease { row: usize, got: usize, expected: usize },
    #[error("release matrix has {got} rows, expected {expected}")]
    ReleaseRows { got: usize, expected: usize },
    #[error("processing time of job {job} is {value}; must be >= 1")]
    ProcessingTime { job: usize, value: Time },
    #[error("release date r[{job}][{location}] = {value} is negative")]
    NegativeRelease { job: usize, location: usize, value: Time },
    #[error("scale must be positive")]
    Scale,
    #[error("coordinate table has {got} entries, expected {expected}")]
    Coordinates { got: usize, expected: usize },
}

/// Planar coordinates of jobs and candidate locations, kept for generated
/// instances so release dates can be recomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordinates {
    pub jobs: Vec<(i64, i64)>,
    pub locations: Vec<(i64, i64)>,
}

/// An immutable problem instance: `n` jobs, `m` candidate locations and `p`
/// machines to place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    machines: usize,
    proc: Vec<Time>,
    // row-major n x m
    release: Vec<Time>,
    locations: usize,
    scale: u32,
    coordinates: Option<Coordinates>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        machines: usize,
        proc: Vec<Time>,
        release: Vec<Vec<Time>>,
        scale: u32,
    ) -> Result<Self, InstanceError> {
        let n = proc.len();
        if n == 0 {
            return Err(InstanceError::NoJobs);
        }
        if release.len() != n {
            return Err(InstanceError::ReleaseRows { got: release.len(), expected: n });
        }
        let m = release[0].len();
        if machines == 0 || machines > m {
            return Err(InstanceError::MachineCount { p: machines, m });
        }
        if scale == 0 {
            return Err(InstanceError::Scale);
        }
        for (job, &value) in proc.iter().enumerate() {
            if value < 1 {
                return Err(InstanceError::ProcessingTime { job, value });
            }
        }
        let mut flat = Vec::with_capacity(n * m);
        for (job, row) in release.iter().enumerate() {
            if row.len() != m {
                return Err(InstanceError::RaggedRelease { row: job, got: row.len(), expected: m });
            }
            for (location, &value) in row.iter().enumerate() {
                if value < 0 {
                    return Err(InstanceError::NegativeRelease { job, location, value });
                }
                flat.push(value);
            }
        }
        Ok(Self {
            name: name.into(),
            machines,
            proc,
            release: flat,
            locations: m,
            scale,
            coordinates: None,
        })
    }

    pub fn with_coordinates(mut self, coordinates: Coordinates) -> Result<Self, InstanceError> {
        if coordinates.jobs.len() != self.n() {
            return Err(InstanceError::Coordinates {
                got: coordinates.jobs.len(),
                expected: self.n(),
            });
        }
        if coordinates.locations.len() != self.m() {
            return Err(InstanceError::Coordinates {
                got: coordinates.locations.len(),
                expected: self.m(),
            });
        }
        self.coordinates = Some(coordinates);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of jobs.
    pub fn n(&self) -> usize {
        self.proc.len()
    }

    /// Number of candidate locations.
    pub fn m(&self) -> usize {
        self.locations
    }

    /// Number of machines to place.
    pub fn p(&self) -> usize {
        self.machines
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn coordinates(&self) -> Option<&Coordinates> {
        self.coordinates.as_ref()
    }

    #[inline]
    pub fn proc(&self, job: usize) -> Time {
        self.proc[job]
    }

    pub fn processing_times(&self) -> &[Time] {
        &self.proc
    }

    #[inline]
    pub fn release(&self, job: usize, location: usize) -> Time {
        self.release[job * self.locations + location]
    }

    pub fn release_row(&self, job: usize) -> &[Time] {
        &self.release[job * self.locations..(job + 1) * self.locations]
    }

    /// Sort key of the ERD rule at `location`: release date, then larger
    /// processing time, then lower job index.
    #[inline]
    pub fn erd_key(&self, job: usize, location: usize) -> (Time, Reverse<Time>, usize) {
        (self.release(job, location), Reverse(self.proc[job]), job)
    }

    pub fn erd_cmp(&self, location: usize, a: usize, b: usize) -> Ordering {
        self.erd_key(a, location).cmp(&self.erd_key(b, location))
    }

    /// All jobs sorted by the ERD rule for `location`.
    pub fn erd_order(&self, location: usize) -> Vec<usize> {
        let mut jobs: Vec<usize> = (0..self.n()).collect();
        jobs.sort_by_key(|&j| self.erd_key(j, location));
        jobs
    }

    pub fn total_processing(&self) -> Time {
        self.proc.iter().sum()
    }

    pub fn min_release(&self) -> Time {
        self.release.iter().copied().min().unwrap_or(0)
    }

    pub fn max_release(&self) -> Time {
        self.release.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledJob {
    pub job: usize,
    pub start: Time,
    pub completion: Time,
}

/// The ERD-ordered job sequence of one machine placed at `location`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineSchedule {
    pub location: usize,
    pub jobs: Vec<ScheduledJob>,
}

impl MachineSchedule {
    pub fn completion(&self) -> Time {
        self.jobs.last().map_or(0, |s| s.completion)
    }

    pub fn job_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.jobs.iter().map(|s| s.job)
    }
}

/// Schedules `jobs` on a machine at `location` following the ERD rule.
///
/// The input order is irrelevant. Ties on the release date go to the job with
/// the larger processing time, then to the lower index. An empty job set gives
/// an empty schedule with completion time 0.
pub fn erd_schedule(instance: &Instance, location: usize, jobs: &[usize]) -> MachineSchedule {
    let mut order = jobs.to_vec();
    order.sort_by_key(|&j| instance.erd_key(j, location));
    timed_sequence(instance, location, &order)
}

/// Start/completion times of `order` processed as given, each job starting as
/// soon as both the machine and its release date allow.
pub fn timed_sequence(instance: &Instance, location: usize, order: &[usize]) -> MachineSchedule {
    let mut clock = 0;
    let jobs = order
        .iter()
        .map(|&job| {
            let start = clock.max(instance.release(job, location));
            clock = start + instance.proc(job);
            ScheduledJob { job, start, completion: clock }
        })
        .collect();
    MachineSchedule { location, jobs }
}

/// A complete schedule: one machine per chosen location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub machines: Vec<MachineSchedule>,
    pub makespan: Time,
}

impl Solution {
    /// Builds an ERD solution from `(location, jobs)` groups.
    pub fn from_assignment<I, J>(instance: &Instance, groups: I) -> Self
    where
        I: IntoIterator<Item = (usize, J)>,
        J: AsRef<[usize]>,
    {
        let machines: Vec<MachineSchedule> = groups
            .into_iter()
            .map(|(location, jobs)| erd_schedule(instance, location, jobs.as_ref()))
            .collect();
        let makespan = machines.iter().map(MachineSchedule::completion).max().unwrap_or(0);
        Self { machines, makespan }
    }

    pub fn locations(&self) -> Vec<usize> {
        self.machines.iter().map(|m| m.location).collect()
    }

    /// Location index of the machine processing each job, if any.
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for machine in &self.machines {
            for s in &machine.jobs {
                if s.job < n {
                    out[s.job] = Some(machine.location);
                }
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolutionError {
    #[error("solution opens {got} machines but only p={p} are allowed")]
    TooManyMachines { got: usize, p: usize },
    #[error("location {0} is out of range")]
    BadLocation(usize),
    #[error("location {0} is used by more than one machine")]
    DuplicateLocation(usize),
    #[error("job {0} is out of range")]
    BadJob(usize),
    #[error("job {0} is scheduled more than once")]
    DuplicateJob(usize),
    #[error("job {0} is not scheduled")]
    MissingJob(usize),
    #[error("jobs {first} and {second} on location {location} violate the ERD order")]
    NotErd { location: usize, first: usize, second: usize },
    #[error("job {job} on location {location} has inconsistent times")]
    Timing { location: usize, job: usize },
    #[error("stored makespan {stored} differs from recomputed {actual}")]
    Makespan { stored: Time, actual: Time },
}

/// Recomputes the makespan of `solution` from scratch, checking every
/// structural and timing invariant on the way.
pub fn evaluate(solution: &Solution, instance: &Instance) -> Result<Time, SolutionError> {
    let n = instance.n();
    if solution.machines.len() > instance.p() {
        return Err(SolutionError::TooManyMachines {
            got: solution.machines.len(),
            p: instance.p(),
        });
    }
    let mut used_location = vec![false; instance.m()];
    let mut seen = vec![false; n];
    let mut makespan = 0;
    for machine in &solution.machines {
        let k = machine.location;
        if k >= instance.m() {
            return Err(SolutionError::BadLocation(k));
        }
        if std::mem::replace(&mut used_location[k], true) {
            return Err(SolutionError::DuplicateLocation(k));
        }
        let mut clock = 0;
        let mut previous: Option<usize> = None;
        for s in &machine.jobs {
            if s.job >= n {
                return Err(SolutionError::BadJob(s.job));
            }
            if std::mem::replace(&mut seen[s.job], true) {
                return Err(SolutionError::DuplicateJob(s.job));
            }
            if let Some(prev) = previous {
                if instance.release(prev, k) > instance.release(s.job, k) {
                    return Err(SolutionError::NotErd { location: k, first: prev, second: s.job });
                }
            }
            let start = clock.max(instance.release(s.job, k));
            if s.start != start || s.completion != start + instance.proc(s.job) {
                return Err(SolutionError::Timing { location: k, job: s.job });
            }
            clock = s.completion;
            previous = Some(s.job);
        }
        makespan = makespan.max(clock);
    }
    if let Some(job) = seen.iter().position(|&s| !s) {
        return Err(SolutionError::MissingJob(job));
    }
    if makespan != solution.makespan {
        return Err(SolutionError::Makespan { stored: solution.makespan, actual: makespan });
    }
    Ok(makespan)
}

/// Lower and upper bounds on the optimal makespan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lb: Time,
    pub ub: Time,
}

impl Bounds {
    pub fn new(lb: Time, ub: Time) -> Self {
        Self { lb, ub }
    }

    pub fn optimal(&self) -> bool {
        self.lb == self.ub
    }

    pub fn gap_pct(&self) -> Option<f64> {
        percent_gap(self.ub as f64, self.lb as f64).ok()
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lb, self.ub)
    }
}

/// Load-balance bound: `ceil(sum p_j / p) + min r_jk`.
pub fn initial_lower_bound(instance: &Instance) -> Time {
    let p = instance.p() as Time;
    let total = instance.total_processing();
    (total + p - 1) / p + instance.min_release()
}

#[derive(Debug, Error, PartialEq)]
#[error("gap undefined for a zero denominator")]
pub struct ZeroDenominator;

/// `100 (ub - lb) / lb`.
pub fn percent_gap(ub: f64, lb: f64) -> Result<f64, ZeroDenominator> {
    if lb == 0.0 {
        return Err(ZeroDenominator);
    }
    Ok(100.0 * (ub - lb) / lb)
}

/// `100 (opt - lb_lr) / opt`.
pub fn lr_gap(opt: f64, lb_lr: f64) -> Result<f64, ZeroDenominator> {
    if opt == 0.0 {
        return Err(ZeroDenominator);
    }
    Ok(100.0 * (opt - lb_lr) / opt)
}
