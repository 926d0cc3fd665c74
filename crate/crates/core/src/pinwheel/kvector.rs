//! Core pinwheel data types: inter-scheduling vectors and cyclic schedules.

use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// Vector of per-task maximum inter-scheduling times.
///
/// The entry index is the task id. `None` stands for an absent task
/// (infinite inter-scheduling time): it never needs to be scheduled and
/// contributes nothing to the density.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KVector {
    entries: Vec<Option<u64>>,
}

impl KVector {
    /// Builds a vector of all-finite entries, task ids `0..entries.len()`.
    pub fn from_finite(entries: &[u64]) -> Self {
        KVector { entries: entries.iter().map(|&k| Some(k)).collect() }
    }

    pub fn from_entries(entries: Vec<Option<u64>>) -> Self {
        KVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, task: usize) -> Option<u64> {
        self.entries.get(task).copied().flatten()
    }

    pub fn entries(&self) -> &[Option<u64>] {
        &self.entries
    }

    pub fn set(&mut self, task: usize, k: Option<u64>) {
        self.entries[task] = k;
    }

    /// Iterates `(task, k)` over finite entries.
    pub fn finite(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().enumerate().filter_map(|(i, k)| k.map(|k| (i, k)))
    }

    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|k| k.is_some()).count()
    }

    /// Finite values sorted ascending; the memo key for the inductive solver.
    pub fn sorted_finite(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.finite().map(|(_, k)| k).collect();
        v.sort_unstable();
        v
    }
}

/// Cyclic schedule: one optional task per slot, repeating every `period()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicSchedule {
    slots: Vec<Option<usize>>,
}

impl CyclicSchedule {
    pub fn new(slots: Vec<Option<usize>>) -> Self {
        CyclicSchedule { slots }
    }

    /// The empty schedule: period 1, always idle.
    pub fn idle() -> Self {
        CyclicSchedule { slots: vec![None] }
    }

    pub fn period(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.slots
    }

    /// Task scheduled at absolute slot `t` of the periodic extension.
    pub fn at(&self, t: usize) -> Option<usize> {
        self.slots[t % self.slots.len()]
    }

    /// Renumbers task ids through `map` (`map[old] = new`).
    pub fn relabel(&self, map: &[usize]) -> CyclicSchedule {
        CyclicSchedule { slots: self.slots.iter().map(|s| s.map(|t| map[t])).collect() }
    }
}

/// Outcome of schedule verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// First offending task with its observed worst cyclic gap
    /// (`None` when the task never appears at all).
    Invalid { task: usize, gap: Option<u64> },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Density of a vector: the sum of `1/k_i` over finite entries.
pub fn density(k: &KVector) -> Rational {
    k.finite().map(|(_, ki)| Rational::new(1, ki as i128)).sum()
}

/// Density of a plain finite multiset.
pub fn density_of(values: &[u64]) -> Rational {
    values.iter().map(|&ki| Rational::new(1, ki as i128)).sum()
}

/// Checks that every finite-k task appears with all cyclic gaps (including
/// the wrap-around across the period boundary) at most `k_i`. This implies
/// that every window of `k_i` consecutive slots of the infinite periodic
/// extension contains the task.
pub fn verify_schedule(pi: &CyclicSchedule, k: &KVector) -> Verdict {
    let period = pi.period() as u64;
    for (task, ki) in k.finite() {
        let mut first: Option<u64> = None;
        let mut last: Option<u64> = None;
        let mut worst: u64 = 0;
        for (t, slot) in pi.slots().iter().enumerate() {
            if *slot == Some(task) {
                let t = t as u64;
                match last {
                    Some(prev) => worst = worst.max(t - prev),
                    None => first = Some(t),
                }
                last = Some(t);
            }
        }
        match (first, last) {
            (Some(first), Some(last)) => {
                let wrap = period - last + first;
                worst = worst.max(wrap);
                if worst > ki {
                    return Verdict::Invalid { task, gap: Some(worst) };
                }
            }
            _ => return Verdict::Invalid { task, gap: None },
        }
    }
    Verdict::Valid
}

/// Round-robin over the given tasks: period `M`, each task once per period.
/// Satisfies the vector of `M` copies of `M`.
pub fn round_robin(tasks: &[usize]) -> CyclicSchedule {
    assert!(!tasks.is_empty(), "round robin needs at least one task");
    CyclicSchedule::new(tasks.iter().map(|&t| Some(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn density_paper_values() {
        // (3,5,5,9,9) has density 43/45 ~ 0.956
        assert_eq!(density(&KVector::from_finite(&[3, 5, 5, 9, 9])), rat(43, 45));
        // M copies of M has density 1
        for m in 1..=12u64 {
            let v: Vec<u64> = vec![m; m as usize];
            assert_eq!(density(&KVector::from_finite(&v)), rat(1, 1));
        }
        // infinite entries contribute nothing
        let k = KVector::from_entries(vec![None, Some(3), Some(3), Some(6), Some(6)]);
        assert_eq!(density(&k), rat(1, 1));
    }

    #[test]
    fn verify_paper_schedule() {
        // pi from the worked example, period 9, valid for (3,5,5,9,9)
        let pi = CyclicSchedule::new(
            [0, 1, 2, 0, 3, 1, 0, 2, 4].iter().map(|&t| Some(t)).collect(),
        );
        assert!(verify_schedule(&pi, &KVector::from_finite(&[3, 5, 5, 9, 9])).is_valid());
    }

    #[test]
    fn verify_trivial_cases() {
        let pi = CyclicSchedule::new(vec![Some(0), Some(1)]);
        assert!(verify_schedule(&pi, &KVector::from_finite(&[2, 2])).is_valid());

        let bad = CyclicSchedule::new(vec![Some(0), Some(0), Some(1)]);
        assert_eq!(
            verify_schedule(&bad, &KVector::from_finite(&[2, 2])),
            Verdict::Invalid { task: 1, gap: Some(3) }
        );
    }

    #[test]
    fn verify_missing_task_has_infinite_gap() {
        let pi = CyclicSchedule::new(vec![Some(0)]);
        assert_eq!(
            verify_schedule(&pi, &KVector::from_finite(&[1, 4])),
            Verdict::Invalid { task: 1, gap: None }
        );
    }

    #[test]
    fn round_robin_satisfies_uniform_vectors() {
        for m in 1..=12usize {
            let tasks: Vec<usize> = (0..m).collect();
            let pi = round_robin(&tasks);
            assert_eq!(pi.period(), m);
            let k = KVector::from_finite(&vec![m as u64; m]);
            assert!(verify_schedule(&pi, &k).is_valid());
        }
    }
}
