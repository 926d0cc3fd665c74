//! Inductive scheduling: regularize-and-reinsert on top of the two-base
//! scheduler.
//!
//! The algorithm sorts the vector, then repeatedly tests the two-base
//! condition; on failure it regularizes with respect to the smallest
//! remaining entry (constraining that task to be scheduled exactly every
//! `k_j` slots and removing it), shrinking the other entries by
//! `ceil(k_i / k_j)`. If a later iteration is schedulable, the removed
//! tasks are re-inserted in reverse order, which yields a schedule valid
//! for the original vector. The chain aborts when the density exceeds 1,
//! an entry would drop below 1, or only two finite entries remain
//! unscheduled.

use super::kvector::{density, verify_schedule, CyclicSchedule, KVector};
use super::sxy::{sxy_schedule_with, SxySearch, SxyWitness};
use crate::rational::Rational;
use dashmap::DashMap;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegularizeError {
    #[error("entry {index} is not finite")]
    NotFinite { index: usize },
    #[error("evolution drives entry {index} below 1")]
    EvolutionInfeasible { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReinsertError {
    #[error("k = 1 cannot be re-inserted into a nonempty schedule")]
    UnitIntoNonempty,
}

/// One step of the evolution: entry `j` becomes infinite and every later
/// entry `i > j` becomes `k_i - ceil(k_i / k_j)`. Entries before `j` are
/// expected to be infinite already (the vector is processed sorted).
pub fn is_regularize(k: &KVector, j: usize) -> Result<KVector, RegularizeError> {
    let pivot = k.get(j).ok_or(RegularizeError::NotFinite { index: j })?;
    let mut entries: Vec<Option<u64>> = k.entries().to_vec();
    entries[j] = None;
    for (i, entry) in entries.iter_mut().enumerate().skip(j + 1) {
        if let Some(ki) = *entry {
            let next = ki - ki.div_ceil(pivot);
            if next < 1 {
                return Err(RegularizeError::EvolutionInfeasible { index: i });
            }
            *entry = Some(next);
        }
    }
    Ok(KVector::from_entries(entries))
}

/// Re-inserts task `m` into `pi` at exact spacing `k_m`, starting at slot 0.
///
/// The base schedule is repeated out to `L = lcm(period, k_m - 1)` slots and
/// `m` is placed before every group of `k_m - 1` base slots, giving a result
/// period of `L * k_m / (k_m - 1)`.
pub fn is_reinsert(pi: &CyclicSchedule, m: usize, k_m: u64) -> Result<CyclicSchedule, ReinsertError> {
    debug_assert!(pi.slots().iter().all(|s| *s != Some(m)), "task already present");
    let has_tasks = pi.slots().iter().any(|s| s.is_some());
    if !has_tasks {
        let mut slots = vec![None; k_m as usize];
        slots[0] = Some(m);
        return Ok(CyclicSchedule::new(slots));
    }
    if k_m <= 1 {
        return Err(ReinsertError::UnitIntoNonempty);
    }
    let gap = (k_m - 1) as usize;
    let l = pi.period().lcm(&gap);
    let mut slots = Vec::with_capacity(l + l / gap);
    for i in 0..l {
        if i % gap == 0 {
            slots.push(Some(m));
        }
        slots.push(pi.at(i));
    }
    Ok(CyclicSchedule::new(slots))
}

/// One recorded step of the inductive chain, in sorted task space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsIteration {
    pub j: usize,
    /// The vector `k^j` (entries before `j` are infinite).
    pub k: Vec<Option<u64>>,
    /// Task removed by regularizing at this iteration, if any.
    pub removed: Option<usize>,
    pub schedulable_here: bool,
}

/// Full trace of a run: the sort permutation, the iteration chain and the
/// witness of the terminating iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsTrace {
    /// `permutation[sorted_position] = original task id`.
    pub permutation: Vec<usize>,
    pub iterations: Vec<IsIteration>,
    pub witness: Option<SxyWitness>,
}

/// A successful run in sorted task space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsSuccess {
    pub schedule: CyclicSchedule,
    pub iterations: Vec<IsIteration>,
    pub witness: SxyWitness,
}

/// Memoizing solver; results are cached by the sorted finite multiset, so
/// repeated queries from the admission search are answered once. The cache
/// is safe for concurrent use.
#[derive(Debug)]
pub struct IsSolver {
    cache: DashMap<Vec<u64>, Option<Arc<IsSuccess>>>,
    search: SxySearch,
}

impl Default for IsSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl IsSolver {
    /// Solver with the exhaustive per-iteration witness search.
    pub fn new() -> Self {
        IsSolver { cache: DashMap::new(), search: SxySearch::Exhaustive }
    }

    /// Solver with a caller-chosen per-iteration witness search.
    pub fn with_search(search: SxySearch) -> Self {
        IsSolver { cache: DashMap::new(), search }
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// Schedulability of a finite multiset (sorted ascending).
    pub fn schedulable_multiset(&self, sorted: &[u64]) -> bool {
        self.solve_multiset(sorted).is_some()
    }

    fn solve_multiset(&self, sorted: &[u64]) -> Option<Arc<IsSuccess>> {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        if let Some(hit) = self.cache.get(sorted) {
            return hit.clone();
        }
        let result = run_chain(sorted, self.search).map(Arc::new);
        self.cache.insert(sorted.to_vec(), result.clone());
        result
    }

    /// Runs the inductive algorithm on `k`. The returned schedule always
    /// verifies against `k`; task ids in the schedule are the original ones.
    pub fn is_schedule(&self, k: &KVector) -> Option<(CyclicSchedule, IsTrace)> {
        // stable sort of finite entries: equal values keep original order
        let mut perm: Vec<usize> = k.finite().map(|(i, _)| i).collect();
        perm.sort_by_key(|&i| (k.get(i).unwrap(), i));
        let sorted: Vec<u64> = perm.iter().map(|&i| k.get(i).unwrap()).collect();
        let success = self.solve_multiset(&sorted)?;
        let schedule = success.schedule.relabel(&perm);
        debug_assert!(verify_schedule(&schedule, k).is_valid());
        let trace = IsTrace {
            permutation: perm,
            iterations: success.iterations.clone(),
            witness: Some(success.witness.clone()),
        };
        Some((schedule, trace))
    }
}

/// Core chain in sorted task space (task ids are positions in `sorted`).
fn run_chain(sorted: &[u64], search: SxySearch) -> Option<IsSuccess> {
    let m = sorted.len();
    if m == 0 {
        return Some(IsSuccess {
            schedule: CyclicSchedule::idle(),
            iterations: Vec::new(),
            witness: SxyWitness { x: 1, y: 1, assignments: Vec::new() },
        });
    }
    let original = KVector::from_finite(sorted);
    if density(&original) > Rational::from_integer(1) {
        return None;
    }
    let max_j = m.saturating_sub(2);
    let mut current: Vec<Option<u64>> = sorted.iter().map(|&v| Some(v)).collect();
    let mut iterations: Vec<IsIteration> = Vec::new();
    let mut removed: Vec<(usize, u64)> = Vec::new();

    for j in 0..=max_j {
        let kv = KVector::from_entries(current.clone());
        if let Some((mut pi, witness)) = sxy_schedule_with(&kv, search) {
            iterations.push(IsIteration {
                j,
                k: current.clone(),
                removed: None,
                schedulable_here: true,
            });
            for &(task, k_at_removal) in removed.iter().rev() {
                pi = is_reinsert(&pi, task, k_at_removal).ok()?;
            }
            if !verify_schedule(&pi, &original).is_valid() {
                // soundness is unconditional: never hand out an unverified
                // schedule
                return None;
            }
            return Some(IsSuccess { schedule: pi, iterations, witness });
        }
        iterations.push(IsIteration {
            j,
            k: current.clone(),
            removed: Some(j),
            schedulable_here: false,
        });
        if j == max_j {
            break;
        }
        let pivot = current[j].expect("entry j finite at iteration j");
        let next = match is_regularize(&kv, j) {
            Ok(next) => next,
            Err(_) => return None,
        };
        if density(&next) > Rational::from_integer(1) {
            return None;
        }
        removed.push((j, pivot));
        current = next.entries().to_vec();
    }
    None
}

/// One-shot convenience wrapper around [`IsSolver::is_schedule`].
pub fn is_schedule(k: &KVector) -> Option<(CyclicSchedule, IsTrace)> {
    IsSolver::new().is_schedule(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regularize_paper_examples() {
        let k = KVector::from_finite(&[3, 5, 5, 9, 9]);
        let next = is_regularize(&k, 0).unwrap();
        assert_eq!(next.entries(), &[None, Some(3), Some(3), Some(6), Some(6)]);

        let k = KVector::from_finite(&[3, 5, 8, 8, 14, 14]);
        let next = is_regularize(&k, 0).unwrap();
        assert_eq!(next.entries(), &[None, Some(3), Some(5), Some(5), Some(9), Some(9)]);

        let k = KVector::from_finite(&[2, 2]);
        let next = is_regularize(&k, 0).unwrap();
        assert_eq!(next.entries(), &[None, Some(1)]);
    }

    #[test]
    fn regularize_detects_infeasible_evolution() {
        // 2 - ceil(2/2) = 1 is fine, 1 - ceil(1/1) = 0 is not
        let k = KVector::from_entries(vec![None, Some(1), Some(1)]);
        assert!(matches!(
            is_regularize(&k, 1),
            Err(RegularizeError::EvolutionInfeasible { index: 2 })
        ));
    }

    #[test]
    fn reinsert_paper_example() {
        let pi = CyclicSchedule::new(
            [1, 2, 3, 1, 2, 4].iter().map(|&t| Some(t)).collect(),
        );
        let out = is_reinsert(&pi, 0, 3).unwrap();
        assert_eq!(
            out.slots().to_vec(),
            [0, 1, 2, 0, 3, 1, 0, 2, 4].iter().map(|&t| Some(t)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn reinsert_simple_cases() {
        let empty = CyclicSchedule::idle();
        let out = is_reinsert(&empty, 0, 1).unwrap();
        assert_eq!(out.slots().to_vec(), vec![Some(0)]);

        let pi = CyclicSchedule::new(vec![Some(1), Some(2)]);
        let out = is_reinsert(&pi, 0, 2).unwrap();
        assert_eq!(out.slots().to_vec(), vec![Some(0), Some(1), Some(0), Some(2)]);
        assert!(is_reinsert(&pi, 0, 1).is_err());
    }

    #[test]
    fn schedules_paper_vector_with_period_nine() {
        let k = KVector::from_finite(&[3, 5, 5, 9, 9]);
        let (pi, trace) = is_schedule(&k).expect("schedulable");
        assert_eq!(pi.period(), 9);
        assert!(verify_schedule(&pi, &k).is_valid());
        assert_eq!(
            pi.slots().to_vec(),
            [0, 1, 2, 0, 3, 1, 0, 2, 4].iter().map(|&t| Some(t)).collect::<Vec<_>>()
        );
        assert_eq!(trace.iterations.len(), 2);
        assert!(!trace.iterations[0].schedulable_here);
        assert!(trace.iterations[1].schedulable_here);
    }

    #[test]
    fn schedules_deeper_chain() {
        let k = KVector::from_finite(&[3, 5, 8, 8, 14, 14]);
        let (pi, _) = is_schedule(&k).expect("schedulable");
        assert!(verify_schedule(&pi, &k).is_valid());

        let k = KVector::from_finite(&[3, 5, 8, 8, 8]);
        let (pi, _) = is_schedule(&k).expect("schedulable");
        assert!(verify_schedule(&pi, &k).is_valid());
    }

    #[test]
    fn rejects_two_three_x_family() {
        for x in 6..=50u64 {
            let k = KVector::from_finite(&[2, 3, x]);
            assert!(is_schedule(&k).is_none(), "(2,3,{x}) must not be schedulable");
        }
    }

    #[test]
    fn memoization_returns_identical_results() {
        let solver = IsSolver::new();
        let k = KVector::from_finite(&[9, 3, 5, 9, 5]); // permuted input
        let first = solver.is_schedule(&k).expect("schedulable");
        let second = solver.is_schedule(&k).expect("schedulable");
        assert_eq!(first.0, second.0);
        assert!(verify_schedule(&first.0, &k).is_valid());
        assert!(solver.cache_len() >= 1);
    }
}
