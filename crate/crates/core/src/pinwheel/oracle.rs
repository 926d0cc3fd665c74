//! Exhaustive schedulability oracle, independent of every constructive
//! scheduler in this crate.
//!
//! The search runs over the finite graph whose states are the per-task
//! "slots since last service" counters, capped at `k_i`. A valid cyclic
//! schedule exists iff this graph contains a cycle: the cycle itself is the
//! schedule. Intended for small instances (roughly `M <= 5`, `k_i <= 12`).

use super::kvector::{verify_schedule, CyclicSchedule, KVector};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteForceOutcome {
    Schedulable(CyclicSchedule),
    Unschedulable,
    /// State count exceeded the caller's cap.
    ResourceLimit,
}

impl BruteForceOutcome {
    pub fn is_schedulable(&self) -> bool {
        matches!(self, BruteForceOutcome::Schedulable(_))
    }
}

/// Decides schedulability of `k` by exhausting the state graph.
///
/// `state_cap` bounds the number of distinct states the search may touch.
/// Tasks with infinite entries are ignored. Idle slots are never required:
/// any schedule with idles stays valid when the idles are replaced by an
/// arbitrary task, so the search only branches over task choices.
pub fn brute_force_schedulable(k: &KVector, state_cap: usize) -> BruteForceOutcome {
    let tasks: Vec<(usize, u64)> = k.finite().collect();
    let m = tasks.len();
    if m == 0 {
        return BruteForceOutcome::Schedulable(CyclicSchedule::idle());
    }
    if tasks.iter().any(|&(_, ki)| ki == 0) {
        return BruteForceOutcome::Unschedulable;
    }
    // A task with k = 1 must occupy every slot, so it can only ever be alone.
    if tasks.iter().any(|&(_, ki)| ki == 1) {
        return if m == 1 {
            BruteForceOutcome::Schedulable(CyclicSchedule::new(vec![Some(tasks[0].0)]))
        } else {
            BruteForceOutcome::Unschedulable
        };
    }

    let caps: Vec<u64> = tasks.iter().map(|&(_, ki)| ki).collect();
    let state_count: usize = {
        let mut n: u128 = 1;
        for &c in &caps {
            n = n.saturating_mul(c as u128);
        }
        if n > state_cap as u128 {
            return BruteForceOutcome::ResourceLimit;
        }
        n as usize
    };

    // State encoding: counters c_i in [1, k_i], meaning "slots since task i
    // last ran". Choosing task t maps c_t -> 1 and c_i -> c_i + 1 otherwise;
    // the move is legal iff no counter would exceed its cap.
    let encode = |counters: &[u64]| -> usize {
        let mut idx = 0usize;
        for (i, &c) in counters.iter().enumerate() {
            idx = idx * caps[i] as usize + (c - 1) as usize;
        }
        idx
    };
    let decode = |mut idx: usize| -> Vec<u64> {
        let mut counters = vec![0u64; m];
        for i in (0..m).rev() {
            counters[i] = (idx % caps[i] as usize) as u64 + 1;
            idx /= caps[i] as usize;
        }
        counters
    };

    let successors = |idx: usize| -> Vec<usize> {
        let counters = decode(idx);
        let mut next = Vec::with_capacity(m);
        'choice: for t in 0..m {
            let mut new_counters = Vec::with_capacity(m);
            for (i, &c) in counters.iter().enumerate() {
                let nc = if i == t { 1 } else { c + 1 };
                if nc > caps[i] {
                    continue 'choice;
                }
                new_counters.push(nc);
            }
            next.push(encode(&new_counters));
        }
        next
    };

    // Peel states with no legal successor until a fixpoint; any surviving
    // state lies on or reaches a cycle of surviving states.
    let mut out_degree = vec![0u32; state_count];
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); state_count];
    for idx in 0..state_count {
        let succ = successors(idx);
        out_degree[idx] = succ.len() as u32;
        for s in succ {
            preds[s].push(idx as u32);
        }
    }
    let mut dead: Vec<usize> = (0..state_count).filter(|&i| out_degree[i] == 0).collect();
    let mut alive = state_count;
    while let Some(idx) = dead.pop() {
        alive -= 1;
        for &p in &preds[idx] {
            out_degree[p as usize] -= 1;
            if out_degree[p as usize] == 0 {
                dead.push(p as usize);
            }
        }
    }
    if alive == 0 {
        return BruteForceOutcome::Unschedulable;
    }

    // Extract a witness: walk surviving states (successors restricted to
    // survivors exist by construction) until a state repeats; the segment
    // between the repeats is a valid cyclic schedule.
    let start = (0..state_count).find(|&i| out_degree[i] > 0).expect("alive state");
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut path_states = Vec::new();
    let mut path_tasks: Vec<usize> = Vec::new();
    let mut cur = start;
    loop {
        if let Some(&pos) = seen.get(&cur) {
            let slot_tasks: Vec<Option<usize>> =
                path_tasks[pos..].iter().map(|&t| Some(tasks[t].0)).collect();
            let pi = CyclicSchedule::new(slot_tasks);
            debug_assert!(verify_schedule(&pi, k).is_valid());
            return BruteForceOutcome::Schedulable(pi);
        }
        seen.insert(cur, path_states.len());
        path_states.push(cur);
        let counters = decode(cur);
        // deterministic: smallest feasible task choice among survivors
        let mut chosen = None;
        'choice: for t in 0..m {
            let mut new_counters = Vec::with_capacity(m);
            for (i, &c) in counters.iter().enumerate() {
                let nc = if i == t { 1 } else { c + 1 };
                if nc > caps[i] {
                    continue 'choice;
                }
                new_counters.push(nc);
            }
            let nxt = encode(&new_counters);
            if out_degree[nxt] > 0 {
                chosen = Some((t, nxt));
                break;
            }
        }
        let (t, nxt) = chosen.expect("surviving state has surviving successor");
        path_tasks.push(t);
        cur = nxt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: usize = 2_000_000;

    #[test]
    fn two_tasks_alternate() {
        let k = KVector::from_finite(&[2, 2]);
        match brute_force_schedulable(&k, CAP) {
            BruteForceOutcome::Schedulable(pi) => {
                assert_eq!(pi.period(), 2);
                assert!(verify_schedule(&pi, &k).is_valid());
            }
            other => panic!("expected schedulable, got {other:?}"),
        }
    }

    #[test]
    fn two_three_six_is_unschedulable() {
        let k = KVector::from_finite(&[2, 3, 6]);
        assert_eq!(brute_force_schedulable(&k, CAP), BruteForceOutcome::Unschedulable);
    }

    #[test]
    fn two_four_four_is_schedulable() {
        let k = KVector::from_finite(&[2, 4, 4]);
        match brute_force_schedulable(&k, CAP) {
            BruteForceOutcome::Schedulable(pi) => {
                assert!(verify_schedule(&pi, &k).is_valid());
            }
            other => panic!("expected schedulable, got {other:?}"),
        }
    }

    #[test]
    fn resource_limit_reported() {
        let k = KVector::from_finite(&[12, 12, 12, 12, 12]);
        assert_eq!(brute_force_schedulable(&k, 1000), BruteForceOutcome::ResourceLimit);
    }

    #[test]
    fn unit_k_only_alone() {
        let k = KVector::from_finite(&[1]);
        assert!(brute_force_schedulable(&k, CAP).is_schedulable());
        let k2 = KVector::from_finite(&[1, 5]);
        assert_eq!(brute_force_schedulable(&k2, CAP), BruteForceOutcome::Unschedulable);
    }
}
