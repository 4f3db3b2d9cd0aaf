//! Constant-time evaluation of cross-machine swaps.
//!
//! For every machine the auxiliary structure keeps the statistics of all
//! consecutive subsequences of its ERD sequence, and for every job the ERD
//! slot it would take on every machine. Swapping job `j` (machine `k`) with
//! job `l` (machine `m`) removes `l` from `m` and inserts `j` at its slot, and
//! symmetrically on `k`; the new completion of each side is one of fourteen
//! concatenations of at most four stored blocks.

use crate::model::{Instance, Time};

use super::concat::SubsequenceStats;

/// Shape of one side of a swap. `removed` is the position of the job leaving
/// the machine, `slot` the ERD slot of the incoming job counted in the
/// original sequence (`L` jobs), `in` the incoming job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SwapCase {
    /// Removed job was first; `in ++ seq[1..]`.
    Before1,
    /// Removed job was last, slot 0; `in ++ seq[..L-1]`.
    Before2,
    /// Removed job was last, incoming takes its place; `seq[..L-1] ++ in`.
    Before3,
    /// Removed job was last, `0 < slot < removed`; `seq[..s] ++ in ++ seq[s..L-1]`.
    Before4,
    /// Removed job in the middle, slot 0; `in ++ seq[..a] ++ seq[a+1..]`.
    Before5,
    /// Removed job in the middle, `0 < slot < removed`;
    /// `seq[..s] ++ in ++ seq[s..a] ++ seq[a+1..]`.
    Before6,
    /// Removed job in the middle, incoming takes its place;
    /// `seq[..a] ++ in ++ seq[a+1..]`.
    Before7,
    /// Removed job was first, slot 1; `in ++ seq[1..]`.
    After1,
    /// Removed job was first, `1 < slot < L`; `seq[1..s] ++ in ++ seq[s..]`.
    After2,
    /// Removed job was first, slot at the end; `seq[1..] ++ in`.
    After3,
    /// Removed job was last, slot at the end; `seq[..L-1] ++ in`.
    After4,
    /// Removed job in the middle, slot right after it;
    /// `seq[..a] ++ in ++ seq[a+1..]`.
    After5,
    /// Removed job in the middle, `a + 1 < slot < L`;
    /// `seq[..a] ++ seq[a+1..s] ++ in ++ seq[s..]`.
    After6,
    /// Removed job in the middle, slot at the end; `seq[..a] ++ seq[a+1..] ++ in`.
    After7,
}

impl SwapCase {
    pub const ALL: [SwapCase; 14] = [
        SwapCase::Before1,
        SwapCase::Before2,
        SwapCase::Before3,
        SwapCase::Before4,
        SwapCase::Before5,
        SwapCase::Before6,
        SwapCase::Before7,
        SwapCase::After1,
        SwapCase::After2,
        SwapCase::After3,
        SwapCase::After4,
        SwapCase::After5,
        SwapCase::After6,
        SwapCase::After7,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Classifies removal at `removed` and insertion at `slot` in a sequence
    /// of `len` jobs.
    pub fn classify(removed: usize, slot: usize, len: usize) -> SwapCase {
        debug_assert!(removed < len && slot <= len);
        let last = len - 1;
        if slot <= removed {
            if removed == 0 {
                SwapCase::Before1
            } else if removed == last {
                match slot {
                    0 => SwapCase::Before2,
                    s if s == removed => SwapCase::Before3,
                    _ => SwapCase::Before4,
                }
            } else {
                match slot {
                    0 => SwapCase::Before5,
                    s if s == removed => SwapCase::Before7,
                    _ => SwapCase::Before6,
                }
            }
        } else if removed == 0 {
            match slot {
                1 => SwapCase::After1,
                s if s == len => SwapCase::After3,
                _ => SwapCase::After2,
            }
        } else if removed == last {
            SwapCase::After4
        } else if slot == removed + 1 {
            SwapCase::After5
        } else if slot == len {
            SwapCase::After7
        } else {
            SwapCase::After6
        }
    }
}

/// How often each [`SwapCase`] occurred.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaseCoverage {
    pub counts: [u64; 14],
}

impl CaseCoverage {
    pub fn record(&mut self, case: SwapCase) {
        self.counts[case.index()] += 1;
    }

    pub fn all_covered(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }
}

/// Predicted result of one swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapOutcome {
    /// New completion of the first and second machine.
    pub completion: [Time; 2],
    pub cases: [SwapCase; 2],
    /// Makespan of the whole solution after the swap.
    pub makespan: Time,
}

/// Block statistics and insertion slots for the current solution.
#[derive(Debug, Clone)]
pub struct SearchAuxiliary<'a> {
    instance: &'a Instance,
    locations: Vec<usize>,
    sequences: Vec<Vec<usize>>,
    // per machine, (L+1) x (L+1) table; entry a*(L+1)+b holds seq[a..b]
    blocks: Vec<Vec<SubsequenceStats>>,
    completions: Vec<Time>,
    // slot[job * machines + machine]
    slots: Vec<usize>,
    // (machine, index) of each job
    positions: Vec<(usize, usize)>,
    // largest completions, descending, as (completion, machine)
    top: Vec<(Time, usize)>,
}

impl<'a> SearchAuxiliary<'a> {
    /// `machines` are `(location, jobs)`; jobs are re-sorted by ERD.
    pub fn new(instance: &'a Instance, machines: &[(usize, Vec<usize>)]) -> Self {
        let count = machines.len();
        let mut aux = Self {
            instance,
            locations: machines.iter().map(|m| m.0).collect(),
            sequences: Vec::with_capacity(count),
            blocks: vec![Vec::new(); count],
            completions: vec![0; count],
            slots: vec![0; instance.n() * count],
            positions: vec![(usize::MAX, usize::MAX); instance.n()],
            top: Vec::new(),
        };
        for (k, jobs) in machines {
            let mut seq = jobs.clone();
            seq.sort_by_key(|&j| instance.erd_key(j, *k));
            aux.sequences.push(seq);
        }
        for m in 0..count {
            aux.refresh_machine(m);
        }
        aux.refresh_top();
        aux
    }

    fn refresh_machine(&mut self, m: usize) {
        let k = self.locations[m];
        let seq = &self.sequences[m];
        let len = seq.len();
        let width = len + 1;
        let mut table = vec![SubsequenceStats::EMPTY; width * width];
        for a in 0..len {
            let mut acc = SubsequenceStats::EMPTY;
            for b in a..len {
                acc = acc.concat(SubsequenceStats::single(self.instance, seq[b], k));
                table[a * width + b + 1] = acc;
            }
        }
        self.completions[m] = table[len].completion();
        self.blocks[m] = table;
        for (i, &j) in seq.iter().enumerate() {
            self.positions[j] = (m, i);
        }
        let count = self.locations.len();
        for j in 0..self.instance.n() {
            let key = self.instance.erd_key(j, k);
            self.slots[j * count + m] = seq.partition_point(|&o| self.instance.erd_key(o, k) < key);
        }
    }

    fn refresh_top(&mut self) {
        let mut all: Vec<(Time, usize)> = self.completions.iter().enumerate().map(|(m, &c)| (c, m)).collect();
        all.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        all.truncate(3);
        self.top = all;
    }

    pub fn num_machines(&self) -> usize {
        self.locations.len()
    }

    pub fn sequence(&self, m: usize) -> &[usize] {
        &self.sequences[m]
    }

    pub fn completion(&self, m: usize) -> Time {
        self.completions[m]
    }

    pub fn makespan(&self) -> Time {
        self.top.first().map_or(0, |t| t.0)
    }

    /// Current (machine, index) of `job`.
    pub fn position(&self, job: usize) -> (usize, usize) {
        self.positions[job]
    }

    /// ERD slot of `job` in the current sequence of machine `m`.
    pub fn slot(&self, job: usize, m: usize) -> usize {
        self.slots[job * self.locations.len() + m]
    }

    /// Stats of `sequence(m)[a..b]`.
    pub fn block(&self, m: usize, a: usize, b: usize) -> SubsequenceStats {
        let width = self.sequences[m].len() + 1;
        self.blocks[m][a * width + b]
    }

    fn max_other(&self, m1: usize, m2: usize) -> Time {
        self.top.iter().find(|t| t.1 != m1 && t.1 != m2).map_or(0, |t| t.0)
    }

    /// New stats of machine `m` when the job at `removed` leaves and
    /// `incoming` enters at its ERD slot.
    fn exchange(&self, m: usize, removed: usize, incoming: usize) -> (SubsequenceStats, SwapCase) {
        let len = self.sequences[m].len();
        let s = self.slot(incoming, m);
        let a = removed;
        let inc = SubsequenceStats::single(self.instance, incoming, self.locations[m]);
        let blk = |x: usize, y: usize| self.block(m, x, y);
        let case = SwapCase::classify(a, s, len);
        let stats = match case {
            SwapCase::Before1 => inc.concat(blk(1, len)),
            SwapCase::Before2 => inc.concat(blk(0, a)),
            SwapCase::Before3 => blk(0, a).concat(inc),
            SwapCase::Before4 => blk(0, s).concat(inc).concat(blk(s, a)),
            SwapCase::Before5 => inc.concat(blk(0, a)).concat(blk(a + 1, len)),
            SwapCase::Before6 => blk(0, s).concat(inc).concat(blk(s, a)).concat(blk(a + 1, len)),
            SwapCase::Before7 => blk(0, a).concat(inc).concat(blk(a + 1, len)),
            SwapCase::After1 => inc.concat(blk(1, len)),
            SwapCase::After2 => blk(1, s).concat(inc).concat(blk(s, len)),
            SwapCase::After3 => blk(1, len).concat(inc),
            SwapCase::After4 => blk(0, a).concat(inc),
            SwapCase::After5 => blk(0, a).concat(inc).concat(blk(a + 1, len)),
            SwapCase::After6 => blk(0, a).concat(blk(a + 1, s)).concat(inc).concat(blk(s, len)),
            SwapCase::After7 => blk(0, a).concat(blk(a + 1, len)).concat(inc),
        };
        (stats, case)
    }

    /// Outcome of swapping the job at `(m1, i1)` with the job at `(m2, i2)`;
    /// `m1 != m2`.
    pub fn swap_outcome(&self, m1: usize, i1: usize, m2: usize, i2: usize) -> SwapOutcome {
        debug_assert_ne!(m1, m2);
        let j1 = self.sequences[m1][i1];
        let j2 = self.sequences[m2][i2];
        let (s1, c1) = self.exchange(m1, i1, j2);
        let (s2, c2) = self.exchange(m2, i2, j1);
        let completion = [s1.completion(), s2.completion()];
        let makespan = completion[0].max(completion[1]).max(self.max_other(m1, m2));
        SwapOutcome { completion, cases: [c1, c2], makespan }
    }

    /// Performs the swap and brings every table up to date.
    pub fn apply_swap(&mut self, m1: usize, i1: usize, m2: usize, i2: usize) {
        let j1 = self.sequences[m1][i1];
        let j2 = self.sequences[m2][i2];
        for (m, i, incoming) in [(m1, i1, j2), (m2, i2, j1)] {
            let s = self.slot(incoming, m);
            let seq = &mut self.sequences[m];
            seq.remove(i);
            let at = if s > i { s - 1 } else { s };
            seq.insert(at, incoming);
        }
        self.refresh_machine(m1);
        self.refresh_machine(m2);
        self.refresh_top();
    }

    /// Current machines as `(location, ERD sequence)`.
    pub fn machines(&self) -> Vec<(usize, Vec<usize>)> {
        self.locations.iter().copied().zip(self.sequences.iter().cloned()).collect()
    }
}
