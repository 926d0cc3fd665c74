//! Slot-level replay of a solution bundle with per-flow slices and fluid
//! FIFO queues.
//!
//! Each admitted flow owns one slice per link on its route; a slice has a
//! dedicated queue and width `w = lambda * k` for its link's
//! inter-scheduling time. Per slot, new arrivals enqueue at the customer
//! link, then every scheduled link forwards `min(queue, w)` from each of its
//! slices, reading the pre-slot state so volume moves one hop per slot.
//! Delivery happens when volume crosses the root; a unit arriving in slot
//! `t` and crossing in slot `t'` has delay `t' - t + 1` slots (both slots
//! inclusive), which makes the universal round-robin worst case exactly the
//! sum of the branching factors.

use crate::dsum::SolutionBundle;
use crate::model::{NodeId, SlaParams, TreeTopology};
use crate::rational::Rational;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

/// Arrival processes bounded by the SLA rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalPattern {
    /// `lambda` packets per flow in every slot.
    Saturating,
    /// Seeded per-slot volume `lambda * (r/4)`, `r` uniform on `0..=4`.
    Random { seed: u64 },
    /// One burst of `lambda` per flow at slot 0.
    SingleBurst,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("horizon of {horizon} slots is shorter than one global period ({period})")]
    HorizonTooShort { horizon: u64, period: u64 },
    #[error("global period overflows: {0}")]
    PeriodOverflow(String),
}

/// Global composition of per-node schedules.
pub struct GlobalSchedule {
    /// Least common multiple of all per-node schedule periods.
    pub period: u64,
}

/// Composes the bundle's per-node schedules; at most one child of each node
/// is served per slot by construction.
pub fn compose(bundle: &SolutionBundle) -> Result<GlobalSchedule, SimError> {
    let mut period: u64 = 1;
    for pi in bundle.node_schedules.iter().flatten() {
        let p = pi.period() as u64;
        period = period
            .checked_div(period.gcd(&p))
            .and_then(|q| q.checked_mul(p))
            .ok_or_else(|| SimError::PeriodOverflow("per-node period lcm".into()))?;
        if period > 1 << 40 {
            return Err(SimError::PeriodOverflow(format!("lcm exceeds 2^40 ({period})")));
        }
    }
    Ok(GlobalSchedule { period })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub global_period: u64,
    pub horizon: u64,
    /// Slots of end-to-end delay, worst over all delivered volume.
    pub max_delay: u64,
    pub per_flow_max_delay: BTreeMap<String, u64>,
    /// Arrival cohorts (flow, slot) not fully delivered within the deadline.
    pub violations: u64,
    pub arrived: Rational,
    pub delivered: Rational,
    pub queued_at_horizon: Rational,
    /// Max over slices of end-of-slot queue divided by slice width, taken
    /// after one warm-up period.
    pub max_queue_over_width: Rational,
}

struct Slice {
    width: Rational,
    /// FIFO of (arrival slot, remaining volume).
    queue: VecDeque<(u64, Rational)>,
    total: Rational,
}

impl Slice {
    fn new(width: Rational) -> Self {
        Slice { width, queue: VecDeque::new(), total: Rational::from_integer(0) }
    }

    fn push(&mut self, slot: u64, volume: Rational) {
        if volume > Rational::from_integer(0) {
            self.total += volume;
            match self.queue.back_mut() {
                Some(back) if back.0 == slot => back.1 += volume,
                _ => self.queue.push_back((slot, volume)),
            }
        }
    }

    /// Pops up to `width` of volume, FIFO, preserving arrival tags.
    fn drain(&mut self) -> Vec<(u64, Rational)> {
        let mut budget = self.width;
        let mut out = Vec::new();
        while budget > Rational::from_integer(0) {
            match self.queue.front_mut() {
                None => break,
                Some(front) => {
                    if front.1 <= budget {
                        budget -= front.1;
                        self.total -= front.1;
                        out.push(self.queue.pop_front().expect("front exists"));
                    } else {
                        front.1 -= budget;
                        self.total -= budget;
                        out.push((front.0, budget));
                        budget = Rational::from_integer(0);
                    }
                }
            }
        }
        out
    }
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Replays `bundle` on `tree` for `periods` global periods.
///
/// Arrivals stop `tau` slots before the horizon so every counted cohort has
/// room to meet its deadline inside the simulation window; conservation
/// (`arrived = delivered + queued`) holds exactly at the horizon.
pub fn simulate(
    bundle: &SolutionBundle,
    tree: &TreeTopology,
    sla: &SlaParams,
    pattern: ArrivalPattern,
    periods: u64,
) -> Result<SimReport, SimError> {
    let global = compose(bundle)?;
    let horizon = global
        .period
        .checked_mul(periods)
        .ok_or_else(|| SimError::PeriodOverflow("horizon".into()))?;
    if horizon < global.period || periods == 0 {
        return Err(SimError::HorizonTooShort { horizon, period: global.period });
    }
    let arrival_end = horizon.saturating_sub(sla.tau);

    // flows and their routes
    struct Flow {
        ap: NodeId,
        index: u64,
        /// slice indices along the route, customer link first
        slices: Vec<usize>,
    }
    let mut slices: Vec<Slice> = Vec::new();
    let mut flows: Vec<Flow> = Vec::new();
    for (&ap, &count) in &bundle.admissions {
        for index in 0..count {
            let mut flow = Flow { ap, index, slices: Vec::new() };
            // customer link: width = lambda * (admitted round-robin length)
            let k_cust = count;
            flow.slices.push(slices.len());
            slices.push(Slice::new(sla.lambda * Rational::from_integer(k_cust as i128)));
            let mut cur = ap;
            while tree.node(cur).parent.is_some() {
                let k = bundle.link_k[cur].expect("admitted route is scheduled");
                flow.slices.push(slices.len());
                slices.push(Slice::new(sla.lambda * Rational::from_integer(k as i128)));
                cur = tree.node(cur).parent.expect("checked");
            }
            flows.push(flow);
        }
    }
    // (node, child position) -> flows whose slice sits on that link, plus the
    // slice offset within each flow's route
    let mut on_link: BTreeMap<(NodeId, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (fi, flow) in flows.iter().enumerate() {
        // customer link: AP serves customer index
        on_link.entry((flow.ap, flow.index as usize)).or_default().push((fi, 0));
        let mut cur = flow.ap;
        let mut hop = 1;
        while let Some(parent) = tree.node(cur).parent {
            let pos = tree.node(parent).children.iter().position(|&c| c == cur).expect("child");
            on_link.entry((parent, pos)).or_default().push((fi, hop));
            cur = parent;
            hop += 1;
        }
    }

    let mut rng = match pattern {
        ArrivalPattern::Random { seed } => Some(SplitMix(seed)),
        _ => None,
    };
    let zero = Rational::from_integer(0);
    let mut arrived = zero;
    let mut delivered = zero;
    let mut max_delay: u64 = 0;
    let mut per_flow_delay: Vec<u64> = vec![0; flows.len()];
    let mut violations: u64 = 0;
    let mut max_queue_ratio = zero;
    let warmup_end = global.period;

    for t in 0..horizon {
        // arrivals enqueue at the customer-link slice
        if t < arrival_end {
            for flow in flows.iter() {
                let volume = match pattern {
                    ArrivalPattern::Saturating => sla.lambda,
                    ArrivalPattern::SingleBurst => {
                        if t == 0 {
                            sla.lambda
                        } else {
                            zero
                        }
                    }
                    ArrivalPattern::Random { .. } => {
                        let r = rng.as_mut().expect("seeded").next() % 5;
                        sla.lambda * Rational::new(r as i128, 4)
                    }
                };
                if volume > zero {
                    arrived += volume;
                    slices[flow.slices[0]].push(t, volume);
                }
            }
        }
        // transfers: gather from pre-slot state, then apply
        let mut moves: Vec<(usize, Option<usize>, Vec<(u64, Rational)>)> = Vec::new();
        for (node_id, pi) in bundle.node_schedules.iter().enumerate() {
            let Some(pi) = pi else { continue };
            let Some(pos) = pi.at(t as usize) else { continue };
            let Some(users) = on_link.get(&(node_id, pos)) else { continue };
            for &(fi, hop) in users {
                let slice_idx = flows[fi].slices[hop];
                let taken = slices[slice_idx].drain();
                if taken.is_empty() {
                    continue;
                }
                let next = flows[fi].slices.get(hop + 1).copied();
                moves.push((fi, next, taken));
            }
        }
        for (fi, next, taken) in moves {
            match next {
                Some(next_slice) => {
                    for (slot, volume) in taken {
                        slices[next_slice].push(slot, volume);
                    }
                }
                None => {
                    for (slot, volume) in taken {
                        delivered += volume;
                        let delay = t - slot + 1;
                        if delay > per_flow_delay[fi] {
                            per_flow_delay[fi] = delay;
                        }
                        if delay > max_delay {
                            max_delay = delay;
                        }
                        if delay > sla.tau {
                            violations += 1;
                        }
                    }
                }
            }
        }
        if t >= warmup_end {
            for slice in &slices {
                if slice.width > zero {
                    let ratio = slice.total / slice.width;
                    if ratio > max_queue_ratio {
                        max_queue_ratio = ratio;
                    }
                }
            }
        }
    }
    // anything still queued past its deadline is a violation too
    for slice in &slices {
        for &(slot, _) in &slice.queue {
            if slot + sla.tau < horizon {
                violations += 1;
            }
        }
    }
    let queued_at_horizon: Rational = slices.iter().map(|s| s.total).sum();

    let per_flow_max_delay = flows
        .iter()
        .zip(&per_flow_delay)
        .map(|(f, &d)| (format!("{}/flow{}", tree.node(f.ap).name, f.index), d))
        .collect();
    Ok(SimReport {
        global_period: global.period,
        horizon,
        max_delay,
        per_flow_max_delay,
        violations,
        arrived,
        delivered,
        queued_at_horizon,
        max_queue_over_width: max_queue_ratio,
    })
}
