//! Two-base pinwheel scheduler.
//!
//! A vector `k` is specialized to `k' <= k` where every entry has the form
//! `x * 2^e` or `y * 2^e` for two positive integer bases. With `c_x =
//! ceil(x * rho_x)` and `c_y = ceil(y * rho_y)` taken over the densities of
//! the two groups, the vector is schedulable whenever
//!
//! ```text
//! c_x / x + c_y / y <= 1
//! ```
//!
//! The schedule realizing a witness works in two layers:
//!
//! * the y side receives `g = x - c_x` slots per window of `x`, placed by
//!   the even-spread rule `q_s = ceil((s+1) * x / g) - 1`; consecutive pool
//!   slots then satisfy `q_{s+m} - q_s <= ceil(m * x / g)`, so round-robin
//!   over `c_y` channels (splitting each channel dyadically) keeps every
//!   y task within `y * 2^e` slots because `c_y * x <= g * y`;
//! * the x side owns the remaining `c_x` offsets of each window, giving each
//!   of `c_x` channels an exact period of `x`; channels are again split
//!   dyadically for entries `x * 2^e`.
//!
//! Group weights `2^-e` are bin packed first-fit-decreasing, which is exact
//! for dyadic weights. Every produced schedule is re-verified before it is
//! returned, so a returned schedule is always valid for the original `k`.

use super::kvector::{verify_schedule, CyclicSchedule, KVector};
use crate::rational::{ceil_rational, Rational};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SxyGroup {
    X,
    Y,
}

/// Per-task part of a witness: `specialized = base * 2^exponent <= k_task`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SxyTaskAssignment {
    pub task: usize,
    pub group: SxyGroup,
    pub exponent: u32,
    pub specialized: u64,
}

/// Witness that a vector satisfies the two-base schedulability condition.
///
/// A single-base witness keeps `y = x` with an empty y group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SxyWitness {
    pub x: u64,
    pub y: u64,
    pub assignments: Vec<SxyTaskAssignment>,
}

impl SxyWitness {
    pub fn rho_x(&self) -> Rational {
        self.assignments
            .iter()
            .filter(|a| a.group == SxyGroup::X)
            .map(|a| Rational::new(1, a.specialized as i128))
            .sum()
    }

    pub fn rho_y(&self) -> Rational {
        self.assignments
            .iter()
            .filter(|a| a.group == SxyGroup::Y)
            .map(|a| Rational::new(1, a.specialized as i128))
            .sum()
    }

    pub fn c_x(&self) -> u64 {
        ceil_rational(Rational::from_integer(self.x as i128) * self.rho_x()) as u64
    }

    pub fn c_y(&self) -> u64 {
        ceil_rational(Rational::from_integer(self.y as i128) * self.rho_y()) as u64
    }

    /// Exact check of the schedulability condition.
    pub fn condition_holds(&self) -> bool {
        let lhs = Rational::new(self.c_x() as i128, self.x as i128)
            + Rational::new(self.c_y() as i128, self.y as i128);
        lhs <= Rational::from_integer(1)
    }

    /// The specialized vector `k'` laid out over `len` task slots.
    pub fn specialization(&self, len: usize) -> KVector {
        let mut entries = vec![None; len];
        for a in &self.assignments {
            entries[a.task] = Some(a.specialized);
        }
        KVector::from_entries(entries)
    }

    /// Swaps the roles of the two bases (used as a construction fallback).
    fn swapped(&self) -> SxyWitness {
        SxyWitness {
            x: self.y,
            y: self.x,
            assignments: self
                .assignments
                .iter()
                .map(|a| SxyTaskAssignment {
                    task: a.task,
                    group: match a.group {
                        SxyGroup::X => SxyGroup::Y,
                        SxyGroup::Y => SxyGroup::X,
                    },
                    exponent: a.exponent,
                    specialized: a.specialized,
                })
                .collect(),
        }
    }
}

/// Largest `base * 2^e <= k`, if any.
fn specialize(base: u64, k: u64) -> Option<(u32, u64)> {
    if base == 0 || base > k {
        return None;
    }
    let e = (k / base).ilog2();
    Some((e, base << e))
}

// Fixed-point density accumulation: weight of an entry `base * 2^e` within
// its group is 2^-e, stored as an integer 2^(SHIFT - e). Exponents are
// bounded by log2(k) < 64, so the representation is exact.
const SHIFT: u32 = 64;

fn weight(e: u32) -> u128 {
    1u128 << (SHIFT - e.min(SHIFT))
}

/// `ceil(base * rho)` where `w = base * rho * 2^SHIFT`.
fn ceil_count(w: u128) -> u64 {
    ((w + (1u128 << SHIFT) - 1) >> SHIFT) as u64
}

fn condition_ok(c_x: u64, x: u64, c_y: u64, y: u64) -> bool {
    (c_x as u128) * (y as u128) + (c_y as u128) * (x as u128) <= (x as u128) * (y as u128)
}

/// Breadth of the witness search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SxySearch {
    /// Bases are the distinct vector values and group assignment is greedy
    /// (each task takes the base giving the larger specialization). This is
    /// the quadratic search of the classic algorithm.
    Classic,
    /// Bases additionally include every `floor(k_i / 2^a)` and tasks fitting
    /// both bases are swept over threshold assignments in decreasing
    /// `s_y/s_x` order (which contains the greedy assignment).
    Exhaustive,
}

/// Searches for a witness that `k` satisfies the two-base condition.
pub fn sxy_feasible_with(k: &KVector, search: SxySearch) -> Option<SxyWitness> {
    let tasks: Vec<(usize, u64)> = k.finite().collect();
    if tasks.is_empty() {
        return Some(SxyWitness { x: 1, y: 1, assignments: Vec::new() });
    }
    if tasks.iter().any(|&(_, ki)| ki == 0) {
        return None;
    }

    let mut candidates: Vec<u64> = Vec::new();
    for &(_, ki) in &tasks {
        match search {
            SxySearch::Classic => candidates.push(ki),
            SxySearch::Exhaustive => {
                let mut v = ki;
                while v >= 1 {
                    candidates.push(v);
                    if v == 1 {
                        break;
                    }
                    v >>= 1;
                }
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();

    // single base, largest first (matches round-robin on uniform vectors)
    for &x in candidates.iter().rev() {
        let mut w = 0u128;
        let mut fits = true;
        for &(_, ki) in &tasks {
            match specialize(x, ki) {
                Some((e, _)) => w += weight(e),
                None => {
                    fits = false;
                    break;
                }
            }
        }
        if !fits {
            continue;
        }
        let c = ceil_count(w);
        if c <= x {
            let assignments = tasks
                .iter()
                .map(|&(task, ki)| {
                    let (e, s) = specialize(x, ki).expect("fits");
                    SxyTaskAssignment { task, group: SxyGroup::X, exponent: e, specialized: s }
                })
                .collect();
            let witness = SxyWitness { x, y: x, assignments };
            debug_assert!(witness.condition_holds());
            return Some(witness);
        }
    }

    // base pairs x < y
    for xi in 0..candidates.len() {
        'pair: for yi in xi + 1..candidates.len() {
            let (x, y) = (candidates[xi], candidates[yi]);
            let mut w_x_forced = 0u128;
            let mut w_y_forced = 0u128;
            // (task index into `tasks`, spec under x, spec under y)
            let mut both: Vec<(usize, (u32, u64), (u32, u64))> = Vec::new();
            for (idx, &(_, ki)) in tasks.iter().enumerate() {
                match (specialize(x, ki), specialize(y, ki)) {
                    (Some(sx), Some(sy)) => both.push((idx, sx, sy)),
                    (Some((e, _)), None) => w_x_forced += weight(e),
                    (None, Some((e, _))) => w_y_forced += weight(e),
                    (None, None) => continue 'pair,
                }
            }
            // y-favorable first: decreasing s_y / s_x, ties by task index
            both.sort_by(|a, b| {
                let lhs = (a.2 .1 as u128) * (b.1 .1 as u128);
                let rhs = (b.2 .1 as u128) * (a.1 .1 as u128);
                rhs.cmp(&lhs).then(a.0.cmp(&b.0))
            });
            let n = both.len();
            // prefix_y[t] = weight of first t tasks in the y group,
            // suffix_x[t] = weight of tasks t.. in the x group
            let mut prefix_y = vec![0u128; n + 1];
            for t in 0..n {
                prefix_y[t + 1] = prefix_y[t] + weight(both[t].2 .0);
            }
            let mut suffix_x = vec![0u128; n + 1];
            for t in (0..n).rev() {
                suffix_x[t] = suffix_x[t + 1] + weight(both[t].1 .0);
            }
            // greedy split point: tasks whose y specialization is strictly
            // larger form a prefix of the ratio order
            let t_greedy = both.iter().take_while(|b| b.2 .1 > b.1 .1).count();
            let thresholds: std::ops::RangeInclusive<usize> = match search {
                SxySearch::Classic => t_greedy..=t_greedy,
                SxySearch::Exhaustive => 0..=n,
            };
            for t in thresholds {
                let c_x = ceil_count(w_x_forced + suffix_x[t]);
                let c_y = ceil_count(w_y_forced + prefix_y[t]);
                if condition_ok(c_x, x, c_y, y) {
                    let mut to_y = vec![false; tasks.len()];
                    for item in &both[..t] {
                        to_y[item.0] = true;
                    }
                    let assignments = tasks
                        .iter()
                        .enumerate()
                        .map(|(idx, &(task, ki))| {
                            let use_y = to_y[idx] || specialize(x, ki).is_none();
                            let (group, (e, s)) = if use_y {
                                (SxyGroup::Y, specialize(y, ki).expect("fits y"))
                            } else {
                                (SxyGroup::X, specialize(x, ki).expect("fits x"))
                            };
                            SxyTaskAssignment { task, group, exponent: e, specialized: s }
                        })
                        .collect();
                    let witness = SxyWitness { x, y, assignments };
                    debug_assert!(witness.condition_holds());
                    return Some(witness);
                }
            }
        }
    }
    None
}

/// First-fit-decreasing packing of dyadic weights `2^-e` into unit bins.
/// Returns `(bin, in-bin offset)` per item; exact when total weight fits.
fn pack_dyadic(items: &[(usize, u32)], bins: usize) -> Option<Vec<(usize, usize, u64)>> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| (items[i].1, items[i].0));
    // per bin: occupied progressions (offset, exponent)
    let mut occupied: Vec<Vec<(u64, u32)>> = vec![Vec::new(); bins];
    let mut loads: Vec<u128> = vec![0; bins];
    let mut placed = vec![(0usize, 0usize, 0u64); items.len()];
    for &i in &order {
        let e = items[i].1;
        let w = weight(e);
        let mut done = false;
        for b in 0..bins {
            if loads[b] + w > 1u128 << SHIFT {
                continue;
            }
            // smallest offset in [0, 2^e) free of conflicts with coarser
            // progressions already in the bin (all have exponent <= e)
            let mut offset = None;
            'off: for o in 0..(1u64 << e) {
                for &(po, pe) in &occupied[b] {
                    if o & ((1u64 << pe) - 1) == po {
                        continue 'off;
                    }
                }
                offset = Some(o);
                break;
            }
            if let Some(o) = offset {
                occupied[b].push((o, e));
                loads[b] += w;
                placed[i] = (i, b, o);
                done = true;
                break;
            }
        }
        if !done {
            return None;
        }
    }
    Some(placed)
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return a.max(b);
    }
    a / a.gcd(&b) * b
}

/// Builds a schedule realizing `witness` over `num_tasks` task ids.
fn construct(witness: &SxyWitness, num_tasks: usize) -> Option<CyclicSchedule> {
    let mut w = witness.clone();
    let x_empty = w.assignments.iter().all(|a| a.group != SxyGroup::X);
    if x_empty && w.assignments.iter().any(|a| a.group == SxyGroup::Y) {
        w = w.swapped();
    }
    let x = w.x;
    let y = w.y;
    let xs: Vec<&SxyTaskAssignment> =
        w.assignments.iter().filter(|a| a.group == SxyGroup::X).collect();
    let ys: Vec<&SxyTaskAssignment> =
        w.assignments.iter().filter(|a| a.group == SxyGroup::Y).collect();
    if xs.is_empty() && ys.is_empty() {
        return Some(CyclicSchedule::idle());
    }
    let c_x = w.c_x();
    let c_y = w.c_y();
    if c_x > x || !condition_ok(c_x, x, c_y, y) {
        return None;
    }
    let g = x - c_x;
    if c_y > 0 && (g == 0 || (c_y as u128) * (x as u128) > (g as u128) * (y as u128)) {
        return None;
    }

    // pool offsets inside one window of x (even spread), x offsets = rest
    let pool_offsets: Vec<u64> =
        (0..g).map(|s| ((s + 1) * x).div_ceil(g.max(1)) - 1).collect();
    let mut is_pool = vec![false; x as usize];
    for &p in &pool_offsets {
        is_pool[p as usize] = true;
    }
    let x_offsets: Vec<u64> = (0..x).filter(|&o| !is_pool[o as usize]).collect();
    debug_assert_eq!(x_offsets.len(), c_x as usize);

    let packed_x = pack_dyadic(
        &xs.iter().map(|a| (a.task, a.exponent)).collect::<Vec<_>>(),
        c_x as usize,
    )?;
    let packed_y = pack_dyadic(
        &ys.iter().map(|a| (a.task, a.exponent)).collect::<Vec<_>>(),
        c_y as usize,
    )?;

    let a_max = xs.iter().map(|a| a.exponent).max().unwrap_or(0);
    let b_max = ys.iter().map(|a| a.exponent).max().unwrap_or(0);
    let x_span = x.checked_mul(1u64 << a_max)?;
    let period = if c_y == 0 {
        x_span
    } else {
        // pool steps per cycle: multiple of g (whole windows) and of the
        // y channel cycle
        let steps = lcm_u64(g, c_y * (1u64 << b_max));
        let t_y = x * (steps / g);
        lcm_u64(x_span, t_y)
    };
    if period > 1 << 26 {
        return None;
    }

    let mut slots: Vec<Option<usize>> = vec![None; period as usize];
    for (i, bin, offset) in packed_x {
        let a = &xs[i];
        let stride = x * (1u64 << a.exponent);
        let mut t = x * offset + x_offsets[bin];
        while t < period {
            debug_assert!(slots[t as usize].is_none());
            slots[t as usize] = Some(a.task);
            t += stride;
        }
    }
    if c_y > 0 {
        let steps = period / x * g;
        for (i, channel, offset) in packed_y {
            let a = &ys[i];
            let stride = c_y * (1u64 << a.exponent);
            let mut s = channel as u64 + c_y * offset;
            while s < steps {
                let t = x * (s / g) + pool_offsets[(s % g) as usize];
                debug_assert!(slots[t as usize].is_none());
                slots[t as usize] = Some(a.task);
                s += stride;
            }
        }
    }
    let _ = num_tasks;
    Some(CyclicSchedule::new(slots))
}

/// Searches for a witness using the classic quadratic search.
pub fn sxy_feasible(k: &KVector) -> Option<SxyWitness> {
    sxy_feasible_with(k, SxySearch::Classic)
}

/// Builds a verified schedule for `k` via the two-base condition.
///
/// Returns `None` when no witness is found or the constructed schedule does
/// not verify; any returned schedule is valid for `k`.
pub fn sxy_schedule_with(k: &KVector, search: SxySearch) -> Option<(CyclicSchedule, SxyWitness)> {
    let witness = sxy_feasible_with(k, search)?;
    if let Some(pi) = construct(&witness, k.len()) {
        if verify_schedule(&pi, k).is_valid() {
            return Some((pi, witness));
        }
    }
    let swapped = witness.swapped();
    if let Some(pi) = construct(&swapped, k.len()) {
        if verify_schedule(&pi, k).is_valid() {
            return Some((pi, swapped));
        }
    }
    None
}

/// Classic-search schedule construction.
pub fn sxy_schedule(k: &KVector) -> Option<(CyclicSchedule, SxyWitness)> {
    sxy_schedule_with(k, SxySearch::Classic)
}
