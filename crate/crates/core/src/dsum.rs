//! Distributed utility maximization over tree backhaul networks.
//!
//! The solver runs in two passes. Bottom-up, every node tabulates the
//! maximum number of flows its subtree can support for each feasible
//! effective deadline `tau_v`: access points in closed form, internal nodes
//! by an exact branch-and-bound over per-child inter-scheduling times whose
//! schedulability is decided by the inductive scheduler. Top-down, the root
//! deadline fixes each node's optimal entry; children inherit
//! `tau_v - k_child` and per-node schedules are constructed.

use crate::model::{NodeId, SlaParams, TreeTopology};
use crate::pinwheel::{CyclicSchedule, IsSolver, IsTrace, KVector};
use crate::rational::{floor_rational, Rational, RatioRepr};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Table entry: best supportable flow count at one effective deadline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaEntry {
    pub sigma_hat: u64,
    /// Inter-scheduling time per admitted (scheduled) child.
    pub k_opt: Vec<(NodeId, u64)>,
    /// Flows routed through each admitted child; sums to `sigma_hat`.
    pub admissions: Vec<(NodeId, u64)>,
}

impl SigmaEntry {
    fn empty() -> Self {
        SigmaEntry { sigma_hat: 0, k_opt: Vec::new(), admissions: Vec::new() }
    }
}

/// Per-node map from effective deadline to the best entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaTable {
    pub node: NodeId,
    /// `entries[t - 1]` answers `tau_v = t`.
    pub entries: Vec<SigmaEntry>,
}

impl SigmaTable {
    /// `sigma_hat` at deadline `tau_v`; zero outside the tabulated range
    /// below, clamped to the last entry above (monotone).
    pub fn sigma(&self, tau_v: i64) -> u64 {
        if tau_v < 1 || self.entries.is_empty() {
            return 0;
        }
        let idx = ((tau_v - 1) as usize).min(self.entries.len() - 1);
        self.entries[idx].sigma_hat
    }

    pub fn entry(&self, tau_v: u64) -> &SigmaEntry {
        &self.entries[(tau_v - 1) as usize]
    }
}

/// Closed-form table for an access point: `min(flows, tau_v, floor(c/lambda))`
/// for every `tau_v` in `1..=tau_max`. Admitted flows are served round-robin
/// with inter-scheduling time equal to the admitted count.
pub fn ap_table(
    node: NodeId,
    n_flows: u64,
    c_ap: Rational,
    lambda: Rational,
    tau_max: u64,
) -> SigmaTable {
    let cap = floor_rational(c_ap / lambda).max(0) as u64;
    let entries = (1..=tau_max)
        .map(|tau_v| SigmaEntry {
            sigma_hat: n_flows.min(tau_v).min(cap),
            k_opt: Vec::new(),
            admissions: Vec::new(),
        })
        .collect();
    SigmaTable { node, entries }
}

/// Child input to the per-node subproblem.
#[derive(Debug, Clone, Copy)]
pub struct P2Child<'a> {
    pub id: NodeId,
    /// Capacity of the link from this child to the node.
    pub capacity: Rational,
    pub table: &'a SigmaTable,
}

/// Value a child contributes when assigned inter-scheduling time `k`:
/// deadline budget shrinks by `k` and the link fits `floor(c/(lambda k))`
/// slices of width `lambda k`.
fn child_value(child: &P2Child, tau_v: u64, lambda: Rational, k: u64) -> u64 {
    let by_table = child.table.sigma(tau_v as i64 - k as i64);
    let by_link =
        floor_rational(child.capacity / (lambda * Rational::from_integer(k as i128))).max(0)
            as u64;
    by_table.min(by_link)
}

struct ChildPlan {
    /// `(k, value)` with distinct values, largest `k` per value, best first.
    candidates: Vec<(u64, u64)>,
    /// Index of the identical-children class this child belongs to.
    class: usize,
}

/// Exact solution of the per-node subproblem at a fixed effective deadline:
/// maximize the admitted flow sum over per-child inter-scheduling times
/// whose finite multiset is schedulable by the inductive algorithm.
///
/// The search enumerates, per child, only the largest `k` of each distinct
/// value step (the value function is nonincreasing in `k`, and a larger `k`
/// at equal value only loosens density); children with identical capacity
/// and table are interchangeable so their assignments are kept
/// nondecreasing. Branch and bound prunes on a fractional relaxation under
/// the残 density budget; ties are broken towards the lexicographically
/// smallest sorted vector, then the smallest per-child assignment.
pub fn solve_p2(
    children: &[P2Child],
    tau_v: u64,
    lambda: Rational,
    solver: &IsSolver,
) -> SigmaEntry {
    if children.is_empty() || tau_v == 0 {
        return SigmaEntry::empty();
    }
    // candidate steps per child
    let mut plans: Vec<ChildPlan> = Vec::with_capacity(children.len());
    let mut classes: Vec<(Rational, Vec<u64>)> = Vec::new();
    for child in children {
        let k_ub = {
            let by_link = floor_rational(child.capacity / lambda).max(0) as u64;
            by_link.min(tau_v.saturating_sub(1)).min(tau_v)
        };
        let mut candidates = Vec::new();
        let mut prev = 0u64;
        // descending k: first candidate of each value step is its largest k
        for k in (1..=k_ub).rev() {
            let u = child_value(child, tau_v, lambda, k);
            if u > prev {
                candidates.push((k, u));
                prev = u;
            }
        }
        candidates.reverse(); // best value first (smallest k first)
        let table_sig: Vec<u64> = child.table.entries.iter().map(|e| e.sigma_hat).collect();
        let key = (child.capacity, table_sig);
        let class = match classes.iter().position(|c| c.0 == key.0 && c.1 == key.1) {
            Some(i) => i,
            None => {
                classes.push(key);
                classes.len() - 1
            }
        };
        plans.push(ChildPlan { candidates, class });
    }

    struct Best {
        sigma: u64,
        sorted_k: Vec<u64>,
        assignment: Vec<Option<u64>>,
    }
    struct Ctx<'a> {
        plans: &'a [ChildPlan],
        solver: &'a IsSolver,
        best: Best,
    }

    fn better(sigma: u64, sorted_k: &[u64], assignment: &[Option<u64>], best: &Best) -> bool {
        if sigma != best.sigma {
            return sigma > best.sigma;
        }
        let lex = sorted_k
            .iter()
            .zip(&best.sorted_k)
            .find_map(|(a, b)| if a != b { Some(a.cmp(b)) } else { None })
            .unwrap_or(sorted_k.len().cmp(&best.sorted_k.len()));
        if lex != std::cmp::Ordering::Equal {
            return lex == std::cmp::Ordering::Less;
        }
        // compare per-child assignments, pruned last
        for (a, b) in assignment.iter().zip(&best.assignment) {
            let key = |v: &Option<u64>| v.unwrap_or(u64::MAX);
            if key(a) != key(b) {
                return key(a) < key(b);
            }
        }
        false
    }

    fn dfs(
        ctx: &mut Ctx,
        idx: usize,
        sigma: u64,
        used_density: Rational,
        chosen: &mut Vec<Option<u64>>,
    ) {
        // optimistic completion: each remaining child takes its best value
        // whose density fits the residual budget on its own
        let budget = Rational::from_integer(1) - used_density;
        let mut bound = sigma;
        for plan in ctx.plans.iter().skip(idx) {
            bound += plan
                .candidates
                .iter()
                .filter(|(k, _)| Rational::new(1, *k as i128) <= budget)
                .map(|&(_, u)| u)
                .max()
                .unwrap_or(0);
        }
        if bound < ctx.best.sigma {
            return;
        }
        if idx == ctx.plans.len() {
            let finite: Vec<u64> = chosen.iter().filter_map(|k| *k).collect();
            let mut sorted = finite.clone();
            sorted.sort_unstable();
            if !better(sigma, &sorted, chosen, &ctx.best) {
                return;
            }
            if !finite.is_empty() && !ctx.solver.schedulable_multiset(&sorted) {
                return;
            }
            ctx.best =
                Best { sigma, sorted_k: sorted, assignment: chosen.clone() };
            return;
        }
        let plan = &ctx.plans[idx];
        // nondecreasing within an identical class; a pruned sibling forces
        // pruning the rest of the class
        let (min_k, prev_pruned) = if idx > 0 && ctx.plans[idx - 1].class == plan.class {
            match chosen[idx - 1] {
                Some(pk) => (pk, false),
                None => (u64::MAX, true),
            }
        } else {
            (1, false)
        };
        if !prev_pruned {
            for ci in 0..plan.candidates.len() {
                let (k, u) = plan.candidates[ci];
                if k < min_k {
                    continue;
                }
                let d = used_density + Rational::new(1, k as i128);
                if d > Rational::from_integer(1) {
                    continue;
                }
                if u == 0 {
                    continue;
                }
                chosen.push(Some(k));
                dfs(ctx, idx + 1, sigma + u, d, chosen);
                chosen.pop();
            }
        }
        // prune this child
        chosen.push(None);
        dfs(ctx, idx + 1, sigma, used_density, chosen);
        chosen.pop();
    }

    let mut ctx = Ctx {
        plans: &plans,
        solver,
        best: Best { sigma: 0, sorted_k: Vec::new(), assignment: vec![None; children.len()] },
    };
    let mut chosen = Vec::with_capacity(children.len());
    dfs(&mut ctx, 0, 0, Rational::from_integer(0), &mut chosen);

    let mut k_opt = Vec::new();
    let mut admissions = Vec::new();
    for (i, k) in ctx.best.assignment.iter().enumerate() {
        if let Some(k) = *k {
            k_opt.push((children[i].id, k));
            admissions.push((children[i].id, child_value(&children[i], tau_v, lambda, k)));
        }
    }
    debug_assert_eq!(admissions.iter().map(|&(_, s)| s).sum::<u64>(), ctx.best.sigma);
    SigmaEntry { sigma_hat: ctx.best.sigma, k_opt, admissions }
}

/// Complete solution: admissions, per-link inter-scheduling times and
/// per-node schedules, with enough context to replay or certify it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionBundle {
    pub sigma: u64,
    pub tau: u64,
    pub lambda: Rational,
    /// Outgoing-link inter-scheduling time per node; `None` for the root and
    /// for pruned links.
    pub link_k: Vec<Option<u64>>,
    /// Schedule per internal node over child-list positions; APs hold a
    /// round-robin over admitted customer indices.
    pub node_schedules: Vec<Option<CyclicSchedule>>,
    /// Inductive-scheduler traces per node (where a schedule exists).
    pub traces: Vec<Option<IsTrace>>,
    /// Admitted flow count per access point.
    pub admissions: BTreeMap<NodeId, u64>,
    /// Effective deadline per node on admitted subtrees.
    pub tau_v: Vec<Option<u64>>,
}

impl SolutionBundle {
    fn empty(tree: &TreeTopology, sla: &SlaParams) -> Self {
        SolutionBundle {
            sigma: 0,
            tau: sla.tau,
            lambda: sla.lambda,
            link_k: vec![None; tree.len()],
            node_schedules: vec![None; tree.len()],
            traces: vec![None; tree.len()],
            admissions: tree.aps().map(|a| (a, 0)).collect(),
            tau_v: vec![None; tree.len()],
        }
    }
}

/// Forward-pass product: every node's table plus timing information.
pub struct ForwardTables {
    pub tables: Vec<Option<SigmaTable>>,
    /// Wall-clock milliseconds per node.
    pub node_ms: Vec<f64>,
}

/// Timing summary mirroring a per-level parallel deployment: nodes within a
/// level run concurrently, so the distributed time sums the per-level maxima.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub total_ms: f64,
    pub distributed_ms: f64,
    pub per_level_max_ms: Vec<f64>,
}

fn forward_pass(
    tree: &TreeTopology,
    sla: &SlaParams,
    solver: &IsSolver,
) -> (Vec<Option<SigmaTable>>, SolveStats) {
    let depth = tree.depth();
    let tau = sla.tau;
    let mut tables: Vec<Option<SigmaTable>> = vec![None; tree.len()];
    let mut node_ms = vec![0f64; tree.len()];
    let mut per_level_max_ms = Vec::new();
    let total_start = Instant::now();

    for level in (0..depth).rev() {
        let ids = tree.level_nodes(level);
        let results: Vec<(NodeId, SigmaTable, f64)> = ids
            .par_iter()
            .map(|&id| {
                let start = Instant::now();
                let node = tree.node(id);
                let table = if node.children.is_empty() {
                    let tau_max = tau + 1 - depth as u64; // tau - D + 1
                    ap_table(
                        id,
                        node.flows,
                        node.flow_capacity.unwrap_or_else(|| Rational::from_integer(0)),
                        sla.lambda,
                        tau_max,
                    )
                } else {
                    let children: Vec<P2Child> = node
                        .children
                        .iter()
                        .map(|&c| P2Child {
                            id: c,
                            capacity: tree.node(c).capacity.expect("non-root"),
                            table: tables[c].as_ref().expect("child table computed"),
                        })
                        .collect();
                    let range: Vec<u64> = if level == 0 {
                        vec![tau]
                    } else {
                        (1..=tau - level as u64).collect()
                    };
                    let entries: Vec<SigmaEntry> = range
                        .iter()
                        .map(|&tv| solve_p2(&children, tv, sla.lambda, solver))
                        .collect();
                    // the root table only holds its single entry at tau
                    if level == 0 {
                        SigmaTable { node: id, entries }
                    } else {
                        SigmaTable { node: id, entries }
                    }
                };
                (id, table, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect();
        let mut level_max = 0f64;
        for (id, table, ms) in results {
            tables[id] = Some(table);
            node_ms[id] = ms;
            level_max = level_max.max(ms);
        }
        per_level_max_ms.push(level_max);
    }
    per_level_max_ms.reverse();
    let stats = SolveStats {
        total_ms: total_start.elapsed().as_secs_f64() * 1e3,
        distributed_ms: per_level_max_ms.iter().sum(),
        per_level_max_ms,
    };
    let _ = node_ms;
    (tables, stats)
}

/// Runs the full two-pass solver and returns the bundle with timing stats.
pub fn dsum_with_stats(
    tree: &TreeTopology,
    sla: &SlaParams,
    solver: &IsSolver,
) -> (SolutionBundle, SolveStats) {
    let depth = tree.depth();
    if sla.tau < depth as u64 {
        return (SolutionBundle::empty(tree, sla), SolveStats::default());
    }
    let (tables, stats) = forward_pass(tree, sla, solver);
    let mut bundle = SolutionBundle::empty(tree, sla);

    // top-down: (node, tau_v, admitted target)
    let root = tree.root();
    let root_table = tables[root].as_ref().expect("root table");
    let root_entry = root_table.entry_at_last();
    bundle.sigma = root_entry.sigma_hat;
    let mut stack: Vec<(NodeId, u64, u64)> = vec![(root, sla.tau, root_entry.sigma_hat)];

    while let Some((id, tau_v, target)) = stack.pop() {
        bundle.tau_v[id] = Some(tau_v);
        let node = tree.node(id);
        if node.children.is_empty() {
            // access point: round-robin over admitted customers
            bundle.admissions.insert(id, target);
            if target > 0 {
                let k = KVector::from_finite(&vec![target; target as usize]);
                let (pi, trace) = solver.is_schedule(&k).expect("uniform vector");
                bundle.node_schedules[id] = Some(pi);
                bundle.traces[id] = Some(trace);
            }
            continue;
        }
        let table = tables[id].as_ref().expect("table");
        let entry = if node.parent.is_none() {
            table.entry_at_last()
        } else {
            table.entry(tau_v)
        };
        // per-child targets: stored admissions, reduced from the back when
        // the parent capped this node below its own optimum
        let mut child_targets: Vec<(NodeId, u64, u64)> = Vec::new(); // (child, k, target)
        let admitted_total: u64 = entry.admissions.iter().map(|&(_, s)| s).sum();
        let mut excess = admitted_total.saturating_sub(target);
        let mut reduced: Vec<(NodeId, u64)> = entry.admissions.clone();
        for item in reduced.iter_mut().rev() {
            let cut = item.1.min(excess);
            item.1 -= cut;
            excess -= cut;
        }
        debug_assert_eq!(excess, 0, "target exceeds table optimum");
        for (&(child, k), &(child2, sigma)) in entry.k_opt.iter().zip(&reduced) {
            debug_assert_eq!(child, child2);
            child_targets.push((child, k, sigma));
        }
        // schedule over child positions (pruned children idle)
        let mut entries: Vec<Option<u64>> = vec![None; node.children.len()];
        for &(child, k, _) in &child_targets {
            let pos = node.children.iter().position(|&c| c == child).expect("child");
            entries[pos] = Some(k);
        }
        let kv = KVector::from_entries(entries);
        if kv.finite_count() > 0 {
            let (pi, trace) = solver
                .is_schedule(&kv)
                .expect("optimal assignment is schedulable by construction");
            bundle.node_schedules[id] = Some(pi);
            bundle.traces[id] = Some(trace);
        }
        for (child, k, sigma) in child_targets {
            bundle.link_k[child] = Some(k);
            stack.push((child, tau_v - k, sigma));
        }
    }
    (bundle, stats)
}

impl SigmaTable {
    /// Last-entry accessor used for the root (tabulated only at `tau`).
    fn entry_at_last(&self) -> &SigmaEntry {
        self.entries.last().expect("nonempty table")
    }
}

/// Two-pass solver with a fresh memo cache.
pub fn dsum(tree: &TreeTopology, sla: &SlaParams) -> SolutionBundle {
    dsum_with_stats(tree, sla, &IsSolver::new()).0
}

/// Universal round-robin baseline with greedy pruning.
///
/// Every node serves its surviving children round-robin. While a deadline or
/// slice-capacity constraint is violated, one branch is removed from every
/// widest node at the level of maximum branching (deepest on ties); within a
/// node the child carrying the fewest flows is dropped first. The result is
/// feasible for the same constraint set the solver optimizes, so the solver
/// dominates it.
pub fn urr_baseline(tree: &TreeTopology, sla: &SlaParams) -> SolutionBundle {
    let depth = tree.depth() as usize;
    let mut bundle = SolutionBundle::empty(tree, sla);
    if sla.tau < depth as u64 {
        return bundle;
    }
    let mut active: Vec<Vec<NodeId>> = (0..tree.len())
        .map(|id| {
            tree.node(id)
                .children
                .iter()
                .copied()
                .filter(|&c| tree.subtree_flows(c) > 0)
                .collect()
        })
        .collect();
    let mut admitted: Vec<u64> =
        (0..tree.len()).map(|id| tree.node(id).flows).collect();

    // admitted flows currently below each node
    fn flows_below(id: NodeId, active: &[Vec<NodeId>], admitted: &[u64]) -> u64 {
        if active[id].is_empty() {
            admitted[id]
        } else {
            active[id].iter().map(|&c| flows_below(c, active, admitted)).sum()
        }
    }

    fn k_of(id: NodeId, active: &[Vec<NodeId>], admitted: &[u64]) -> u64 {
        if active[id].is_empty() {
            admitted[id]
        } else {
            active[id].len() as u64
        }
    }

    loop {
        // deadline: every admitted route's k sum within tau
        let mut feasible = true;
        for ap in tree.aps() {
            if admitted[ap] == 0 || flows_below(ap, &active, &admitted) == 0 {
                continue;
            }
            // the AP may have been pruned off the tree entirely
            let mut attached = true;
            let mut sum = k_of(ap, &active, &admitted); // customer link
            let mut cur = ap;
            while let Some(parent) = tree.node(cur).parent {
                if !active[parent].contains(&cur) {
                    attached = false;
                    break;
                }
                sum += k_of(parent, &active, &admitted);
                cur = parent;
            }
            if !attached {
                admitted[ap] = 0;
                continue;
            }
            if sum > sla.tau {
                feasible = false;
                break;
            }
        }
        // slice capacity on tree links and on customer links
        if feasible {
            'cap: for id in 0..tree.len() {
                for &child in &active[id] {
                    let flows = flows_below(child, &active, &admitted);
                    let width =
                        sla.lambda * Rational::from_integer(k_of(id, &active, &admitted) as i128);
                    if Rational::from_integer(flows as i128) * width
                        > tree.node(child).capacity.expect("non-root")
                    {
                        feasible = false;
                        break 'cap;
                    }
                }
                if active[id].is_empty() && admitted[id] > 0 {
                    let width = sla.lambda * Rational::from_integer(admitted[id] as i128);
                    if width > tree.node(id).flow_capacity.expect("ap") {
                        feasible = false;
                        break 'cap;
                    }
                }
            }
        }
        if feasible {
            break;
        }
        // prune one branch at every widest node of the max-branching level
        let mut level_max = vec![0u64; depth + 1];
        for id in 0..tree.len() {
            let lvl = tree.node(id).level as usize;
            let b = if tree.node(id).children.is_empty() {
                admitted[id]
            } else {
                active[id].len() as u64
            };
            level_max[lvl + 1] = level_max[lvl + 1].max(b);
        }
        let (prune_level, width) = level_max
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .max_by_key(|&(_, &b)| b)
            .map(|(l, &b)| (l, b))
            .expect("levels");
        if width == 0 {
            break; // nothing left to prune
        }
        for id in 0..tree.len() {
            if tree.node(id).level as usize != prune_level - 1 {
                continue;
            }
            if tree.node(id).children.is_empty() {
                if admitted[id] == width {
                    admitted[id] -= 1;
                }
            } else if active[id].len() as u64 == width {
                // drop the child carrying the fewest flows (smallest id on ties)
                let victim = active[id]
                    .iter()
                    .copied()
                    .min_by_key(|&c| (flows_below(c, &active, &admitted), c))
                    .expect("nonempty");
                active[id].retain(|&c| c != victim);
            }
        }
        // detach emptied subtrees
        for id in 0..tree.len() {
            let keep: Vec<NodeId> = active[id]
                .iter()
                .copied()
                .filter(|&c| flows_below(c, &active, &admitted) > 0)
                .collect();
            active[id] = keep;
        }
    }

    // assemble: round-robin schedules, k values, admissions, deadlines
    let solver = IsSolver::new();
    let root = tree.root();
    let mut stack = vec![(root, sla.tau)];
    let mut sigma = 0;
    while let Some((id, tau_v)) = stack.pop() {
        bundle.tau_v[id] = Some(tau_v);
        let node = tree.node(id);
        if node.children.is_empty() {
            let count = admitted[id];
            bundle.admissions.insert(id, count);
            sigma += count;
            if count > 0 {
                let k = KVector::from_finite(&vec![count; count as usize]);
                let (pi, trace) = solver.is_schedule(&k).expect("uniform");
                bundle.node_schedules[id] = Some(pi);
                bundle.traces[id] = Some(trace);
            }
            continue;
        }
        if active[id].is_empty() {
            continue;
        }
        let m = active[id].len() as u64;
        let mut entries: Vec<Option<u64>> = vec![None; node.children.len()];
        for &child in &active[id] {
            let pos = node.children.iter().position(|&c| c == child).expect("child");
            entries[pos] = Some(m);
        }
        let kv = KVector::from_entries(entries);
        let (pi, trace) = solver.is_schedule(&kv).expect("uniform");
        bundle.node_schedules[id] = Some(pi);
        bundle.traces[id] = Some(trace);
        for &child in &active[id] {
            bundle.link_k[child] = Some(m);
            stack.push((child, tau_v - m));
        }
    }
    bundle.sigma = sigma;
    bundle
}

// ---------------------------------------------------------------------------
// Bundle serialization (external interface)

#[derive(Debug, Serialize, Deserialize)]
struct BundleDoc {
    sigma: u64,
    tau: u64,
    lambda: RatioRepr,
    links: Vec<LinkDoc>,
    schedules: Vec<ScheduleDoc>,
    admissions: Vec<AdmissionDoc>,
    tau_v: Vec<TauDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkDoc {
    id: String,
    k: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleDoc {
    node: String,
    period: usize,
    /// Child names for internal nodes, customer indices rendered as
    /// `flow<N>` for access points; empty string = idle.
    slots: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AdmissionDoc {
    ap: String,
    count: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TauDoc {
    node: String,
    tau_v: u64,
}

/// Renders a bundle as the JSON interchange document.
pub fn bundle_to_json(bundle: &SolutionBundle, tree: &TreeTopology) -> String {
    let mut links = Vec::new();
    for (id, k) in bundle.link_k.iter().enumerate() {
        if let Some(k) = k {
            links.push(LinkDoc { id: tree.node(id).name.clone(), k: *k });
        }
    }
    let mut schedules = Vec::new();
    for (id, pi) in bundle.node_schedules.iter().enumerate() {
        if let Some(pi) = pi {
            let node = tree.node(id);
            let slots = pi
                .slots()
                .iter()
                .map(|s| match s {
                    Some(pos) if node.children.is_empty() => format!("flow{pos}"),
                    Some(pos) => tree.node(node.children[*pos]).name.clone(),
                    None => String::new(),
                })
                .collect();
            schedules.push(ScheduleDoc {
                node: node.name.clone(),
                period: pi.period(),
                slots,
            });
        }
    }
    let admissions = bundle
        .admissions
        .iter()
        .map(|(&ap, &count)| AdmissionDoc { ap: tree.node(ap).name.clone(), count })
        .collect();
    let tau_v = bundle
        .tau_v
        .iter()
        .enumerate()
        .filter_map(|(id, t)| t.map(|t| TauDoc { node: tree.node(id).name.clone(), tau_v: t }))
        .collect();
    let doc = BundleDoc {
        sigma: bundle.sigma,
        tau: bundle.tau,
        lambda: bundle.lambda.into(),
        links,
        schedules,
        admissions,
        tau_v,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// Parses a bundle document back against its tree (traces are not part of
/// the interchange format).
pub fn bundle_from_json(text: &str, tree: &TreeTopology) -> Result<SolutionBundle, String> {
    let doc: BundleDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut bundle = SolutionBundle::empty(
        tree,
        &SlaParams { lambda: doc.lambda.into(), tau: doc.tau, duration: None },
    );
    bundle.sigma = doc.sigma;
    for link in &doc.links {
        let id = tree.find(&link.id).ok_or_else(|| format!("unknown node {}", link.id))?;
        bundle.link_k[id] = Some(link.k);
    }
    for sched in &doc.schedules {
        let id = tree.find(&sched.node).ok_or_else(|| format!("unknown node {}", sched.node))?;
        let node = tree.node(id);
        let slots: Result<Vec<Option<usize>>, String> = sched
            .slots
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else if node.children.is_empty() {
                    s.strip_prefix("flow")
                        .and_then(|n| n.parse().ok())
                        .map(Some)
                        .ok_or_else(|| format!("bad flow slot '{s}'"))
                } else {
                    node.children
                        .iter()
                        .position(|&c| tree.node(c).name == *s)
                        .map(Some)
                        .ok_or_else(|| format!("unknown child '{s}' of {}", sched.node))
                }
            })
            .collect();
        bundle.node_schedules[id] = Some(CyclicSchedule::new(slots?));
    }
    for adm in &doc.admissions {
        let id = tree.find(&adm.ap).ok_or_else(|| format!("unknown ap {}", adm.ap))?;
        bundle.admissions.insert(id, adm.count);
    }
    for t in &doc.tau_v {
        let id = tree.find(&t.node).ok_or_else(|| format!("unknown node {}", t.node))?;
        bundle.tau_v[id] = Some(t.tau_v);
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::two_level_tree;
    use crate::pinwheel::verify_schedule;
    use crate::rational::rat;

    fn fig_tree() -> TreeTopology {
        two_level_tree(5, 5, rat(18, 1), rat(9, 2))
    }

    #[test]
    fn ap_table_closed_form() {
        let t = ap_table(0, 8, rat(25, 1), rat(1, 1), 10);
        assert_eq!(t.sigma(5), 5);
        let t = ap_table(0, 4, rat(5, 2), rat(1, 1), 10);
        assert_eq!(t.sigma(10), 2);
        let t = ap_table(0, 0, rat(25, 1), rat(1, 1), 10);
        assert_eq!(t.sigma(10), 0);
    }

    #[test]
    fn solve_p2_worked_example_root() {
        // 5 identical AP children with capacity 18, customer links 9/2,
        // lambda 1, tau_v = 10: best is 17 flows with sorted k (4,4,6,6,6)
        let solver = IsSolver::new();
        let tables: Vec<SigmaTable> =
            (0..5).map(|i| ap_table(i, 5, rat(9, 2), rat(1, 1), 9)).collect();
        let children: Vec<P2Child> = tables
            .iter()
            .enumerate()
            .map(|(i, t)| P2Child { id: i, capacity: rat(18, 1), table: t })
            .collect();
        let entry = solve_p2(&children, 10, rat(1, 1), &solver);
        assert_eq!(entry.sigma_hat, 17);
        let mut ks: Vec<u64> = entry.k_opt.iter().map(|&(_, k)| k).collect();
        ks.sort_unstable();
        assert_eq!(ks, vec![4, 4, 6, 6, 6]);
    }

    #[test]
    fn solve_p2_single_child() {
        let solver = IsSolver::new();
        let table = ap_table(1, 10, rat(100, 1), rat(1, 1), 9);
        let children =
            [P2Child { id: 1, capacity: rat(100, 1), table: &table }];
        let entry = solve_p2(&children, 10, rat(1, 1), &solver);
        // k = 1: min(child sigma(9), floor(100/1)) = 9
        assert_eq!(entry.sigma_hat, 9);
        assert_eq!(entry.k_opt, vec![(1, 1)]);
    }

    #[test]
    fn solve_p2_two_identical_children() {
        let solver = IsSolver::new();
        let t1 = ap_table(1, 50, rat(1000, 1), rat(1, 1), 19);
        let t2 = ap_table(2, 50, rat(1000, 1), rat(1, 1), 19);
        let children = [
            P2Child { id: 1, capacity: rat(1000, 1), table: &t1 },
            P2Child { id: 2, capacity: rat(1000, 1), table: &t2 },
        ];
        let entry = solve_p2(&children, 20, rat(1, 1), &solver);
        // k = (2,2), each child then supports sigma_hat(18) = 18
        assert_eq!(entry.sigma_hat, 36);
        assert_eq!(entry.k_opt, vec![(1, 2), (2, 2)]);
    }

    #[test]
    fn dsum_worked_example() {
        let tree = fig_tree();
        let sla = SlaParams::new(rat(1, 1), 10);
        let bundle = dsum(&tree, &sla);
        assert_eq!(bundle.sigma, 17);
        // every per-node schedule verifies against its k vector
        for (id, pi) in bundle.node_schedules.iter().enumerate() {
            if let Some(pi) = pi {
                let node = tree.node(id);
                if node.children.is_empty() {
                    let n = bundle.admissions[&id];
                    let k = KVector::from_finite(&vec![n; n as usize]);
                    assert!(verify_schedule(pi, &k).is_valid());
                } else {
                    let entries: Vec<Option<u64>> =
                        node.children.iter().map(|&c| bundle.link_k[c]).collect();
                    assert!(verify_schedule(pi, &KVector::from_entries(entries)).is_valid());
                }
            }
        }
        // route budgets: k over the route sums within tau
        for (&ap, &count) in &bundle.admissions {
            if count == 0 {
                continue;
            }
            let mut sum = count; // customer round robin
            let mut cur = ap;
            while let Some(parent) = tree.node(cur).parent {
                sum += bundle.link_k[cur].expect("admitted route is scheduled");
                cur = parent;
            }
            assert!(sum <= sla.tau);
        }
    }

    #[test]
    fn dsum_in_region_supports_all_flows() {
        let tree = fig_tree();
        let sla = SlaParams::new(rat(18, 25), 10);
        let bundle = dsum(&tree, &sla);
        assert_eq!(bundle.sigma, 25);
    }

    #[test]
    fn dsum_tau_below_depth_supports_nothing() {
        let tree = fig_tree();
        let sla = SlaParams::new(rat(1, 1), 1);
        assert_eq!(dsum(&tree, &sla).sigma, 0);
    }

    #[test]
    fn urr_baseline_worked_example() {
        let tree = fig_tree();
        let sla = SlaParams::new(rat(1, 1), 10);
        let bundle = urr_baseline(&tree, &sla);
        assert_eq!(bundle.sigma, 16);
        // in-region: everything admitted
        let sla = SlaParams::new(rat(18, 25), 10);
        assert_eq!(urr_baseline(&tree, &sla).sigma, 25);
        // below depth: nothing
        let sla = SlaParams::new(rat(1, 1), 1);
        assert_eq!(urr_baseline(&tree, &sla).sigma, 0);
    }

    #[test]
    fn dsum_dominates_urr() {
        for (n1, n2, c1, c2, tau) in [
            (5, 5, rat(18, 1), rat(9, 2), 10u64),
            (3, 4, rat(10, 1), rat(3, 1), 9),
            (2, 6, rat(8, 1), rat(2, 1), 12),
            (4, 2, rat(5, 1), rat(5, 1), 7),
        ] {
            let tree = two_level_tree(n1, n2, c1, c2);
            let sla = SlaParams::new(rat(1, 1), tau);
            let d = dsum(&tree, &sla);
            let u = urr_baseline(&tree, &sla);
            assert!(d.sigma >= u.sigma, "dominance failed on {n1}x{n2} tau={tau}");
        }
    }

    #[test]
    fn table_monotone_in_tau() {
        let solver = IsSolver::new();
        let tables: Vec<SigmaTable> =
            (0..3).map(|i| ap_table(i, 6, rat(7, 2), rat(1, 1), 14)).collect();
        let children: Vec<P2Child> = tables
            .iter()
            .enumerate()
            .map(|(i, t)| P2Child { id: i, capacity: rat(9, 1), table: t })
            .collect();
        let mut prev = 0;
        for tau_v in 1..=15 {
            let entry = solve_p2(&children, tau_v, rat(1, 1), &solver);
            assert!(entry.sigma_hat >= prev, "table must be nondecreasing");
            prev = entry.sigma_hat;
        }
    }

    #[test]
    fn bundle_json_round_trip() {
        let tree = fig_tree();
        let sla = SlaParams::new(rat(1, 1), 10);
        let bundle = dsum(&tree, &sla);
        let json = bundle_to_json(&bundle, &tree);
        let back = bundle_from_json(&json, &tree).expect("parses");
        assert_eq!(back.sigma, bundle.sigma);
        assert_eq!(back.link_k, bundle.link_k);
        assert_eq!(back.node_schedules, bundle.node_schedules);
        assert_eq!(back.admissions, bundle.admissions);
    }
}
