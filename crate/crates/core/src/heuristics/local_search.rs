//! Best-improvement swap local search.

use crate::model::Instance;

use super::auxiliary::SearchAuxiliary;
use super::Machines;

/// Repeatedly applies the swap of two jobs on different machines that lowers
/// the makespan the most, until no swap lowers it. Ties go to the
/// lexicographically smallest `(machine, position, machine, position)`.
pub fn local_search(instance: &Instance, machines: &[(usize, Vec<usize>)]) -> Machines {
    let mut aux = SearchAuxiliary::new(instance, machines);
    while let Some((m1, i1, m2, i2)) = best_swap(&aux) {
        aux.apply_swap(m1, i1, m2, i2);
    }
    aux.machines()
}

/// The best strictly improving swap, if any.
pub fn best_swap(aux: &SearchAuxiliary<'_>) -> Option<(usize, usize, usize, usize)> {
    let mut best_value = aux.makespan();
    let mut best = None;
    let count = aux.num_machines();
    for m1 in 0..count {
        for m2 in m1 + 1..count {
            for i1 in 0..aux.sequence(m1).len() {
                for i2 in 0..aux.sequence(m2).len() {
                    let out = aux.swap_outcome(m1, i1, m2, i2);
                    if out.makespan < best_value {
                        best_value = out.makespan;
                        best = Some((m1, i1, m2, i2));
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Solution;

    #[test]
    fn improves_and_then_is_fixed_point() {
        let inst = Instance::new("ls", 2, vec![4, 1, 2, 3], vec![vec![0, 0]; 4], 1).unwrap();
        let start = vec![(0, vec![0, 2]), (1, vec![1, 3])];
        let before = Solution::from_assignment(&inst, start.clone()).makespan;
        let once = local_search(&inst, &start);
        let after = Solution::from_assignment(&inst, once.clone()).makespan;
        assert!(after < before);
        assert_eq!(after, 5);
        assert_eq!(local_search(&inst, &once), once);
    }
}
