//! Summary statistics of consecutive job subsequences on one machine.

use crate::model::{Instance, Time};

/// Total processing time `P` and earliest start `E` of a block of jobs run
/// back to back. The block finishes at `E + P` when the machine is free from
/// time 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsequenceStats {
    pub processing: Time,
    pub earliest_start: Time,
}

impl SubsequenceStats {
    /// Neutral element of [`SubsequenceStats::concat`].
    pub const EMPTY: Self = Self { processing: 0, earliest_start: Time::MIN / 4 };

    pub fn single(instance: &Instance, job: usize, location: usize) -> Self {
        Self { processing: instance.proc(job), earliest_start: instance.release(job, location) }
    }

    /// Stats of `self` followed by `next`.
    pub fn concat(self, next: Self) -> Self {
        Self {
            processing: self.processing + next.processing,
            earliest_start: (next.earliest_start - self.processing).max(self.earliest_start),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.processing == 0
    }

    /// Completion time of the block on a machine available from time 0.
    pub fn completion(&self) -> Time {
        if self.is_empty() {
            0
        } else {
            self.earliest_start.max(0) + self.processing
        }
    }

    pub fn of_sequence(instance: &Instance, location: usize, jobs: &[usize]) -> Self {
        jobs.iter()
            .fold(Self::EMPTY, |acc, &j| acc.concat(Self::single(instance, j, location)))
    }
}
