//! Closed-form optimal policies for perfectly symmetric trees.
//!
//! On a tree where every level-`d` node has `N_{d+1}` children and all
//! level-`d` links share one capacity, universal round-robin (round-robin at
//! every set of children) achieves both the throughput-optimal rate
//! `lambda*` and the delay-minimizing deadline `tau*`. When the deadline is
//! tighter than `tau*`, greedy pruning removes one branch per step at a
//! level of maximum branching, trading one slot of `tau*` for the fewest
//! flows.

use crate::model::TreeTopology;
use crate::pinwheel::{round_robin, CyclicSchedule, KVector};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// A perfectly symmetric tree: `branching[d-1] = N_d` and
/// `capacities[d-1] = c_d` for levels `d = 1..=D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricTreeSpec {
    pub branching: Vec<u64>,
    pub capacities: Vec<Rational>,
}

impl SymmetricTreeSpec {
    pub fn new(branching: Vec<u64>, capacities: Vec<Rational>) -> Self {
        assert_eq!(branching.len(), capacities.len(), "one capacity per level");
        assert!(!branching.is_empty(), "at least one level");
        assert!(branching.iter().all(|&n| n >= 1), "positive branching");
        assert!(
            capacities.iter().all(|&c| c > Rational::from_integer(0)),
            "positive capacities"
        );
        SymmetricTreeSpec { branching, capacities }
    }

    pub fn depth(&self) -> usize {
        self.branching.len()
    }

    /// Total number of flows: the product of all branching factors.
    pub fn total_flows(&self) -> u64 {
        self.branching.iter().product()
    }
}

/// Throughput-optimal rate: `min_d c_{d+1} / prod_{d' > d} N_{d'}`.
pub fn lambda_star(spec: &SymmetricTreeSpec) -> Rational {
    let d = spec.depth();
    (0..d)
        .map(|level| {
            let product: u64 = spec.branching[level..].iter().product();
            spec.capacities[level] / Rational::from_integer(product as i128)
        })
        .min()
        .expect("nonempty spec")
}

/// Delay-minimizing deadline: the sum of branching factors.
pub fn tau_star(spec: &SymmetricTreeSpec) -> u64 {
    spec.branching.iter().sum()
}

/// Membership in the all-SLAs-supportable region:
/// `lambda <= lambda*` and `tau >= tau*`.
pub fn in_region(spec: &SymmetricTreeSpec, lambda: Rational, tau: u64) -> bool {
    lambda <= lambda_star(spec) && tau >= tau_star(spec)
}

/// Universal round-robin on an arbitrary tree: each node serves its children
/// cyclically, so every child link has inter-scheduling time equal to the
/// child count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrrNodeSchedule {
    pub node: usize,
    pub schedule: CyclicSchedule,
    /// Inter-scheduling times per child, aligned with the node's child list.
    pub k: KVector,
}

/// Builds per-node round-robin schedules for every internal node of `tree`.
/// Schedule task ids are positions in the node's child list.
pub fn urr_schedule(tree: &TreeTopology) -> Vec<UrrNodeSchedule> {
    let mut out = Vec::new();
    for id in 0..tree.len() {
        let children = &tree.node(id).children;
        if children.is_empty() {
            continue;
        }
        let tasks: Vec<usize> = (0..children.len()).collect();
        let schedule = round_robin(&tasks);
        let k = KVector::from_finite(&vec![children.len() as u64; children.len()]);
        out.push(UrrNodeSchedule { node: id, schedule, k });
    }
    out
}

/// One pruning step: level `d` (1-based) went from `before` to `before - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneStep {
    pub level: usize,
    pub before: u64,
    pub after: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PruneError {
    #[error("deadline {tau} is below the tree depth {depth}; nothing is admissible")]
    DeadlineBelowDepth { tau: u64, depth: usize },
    #[error("cannot reach tau = {tau}: pruning would empty a level")]
    Unreachable { tau: u64 },
}

/// Greedy pruning: performs `tau*(spec) - tau` prunes, each decrementing a
/// level of maximum branching (deepest level on ties), so the result has
/// `tau* = tau`. The surviving flow fraction is the product of
/// `(N_d - 1) / N_d` over the prune sequence.
pub fn greedy_prune(
    spec: &SymmetricTreeSpec,
    tau: u64,
) -> Result<(SymmetricTreeSpec, Vec<PruneStep>), PruneError> {
    let depth = spec.depth();
    if tau < depth as u64 {
        return Err(PruneError::DeadlineBelowDepth { tau, depth });
    }
    let mut branching = spec.branching.clone();
    let mut log = Vec::new();
    while branching.iter().sum::<u64>() > tau {
        // deepest level among those with maximum branching
        let max = *branching.iter().max().expect("nonempty");
        if max <= 1 {
            return Err(PruneError::Unreachable { tau });
        }
        let idx = branching.iter().rposition(|&n| n == max).expect("max exists");
        branching[idx] -= 1;
        log.push(PruneStep { level: idx + 1, before: max, after: max - 1 });
    }
    Ok((SymmetricTreeSpec { branching, capacities: spec.capacities.clone() }, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinwheel::verify_schedule;
    use crate::rational::rat;

    fn worked_example() -> SymmetricTreeSpec {
        SymmetricTreeSpec::new(vec![5, 5], vec![rat(18, 1), rat(9, 2)])
    }

    #[test]
    fn lambda_star_worked_example() {
        assert_eq!(lambda_star(&worked_example()), rat(18, 25));
    }

    #[test]
    fn lambda_star_simple() {
        let spec = SymmetricTreeSpec::new(vec![4], vec![rat(1, 1)]);
        assert_eq!(lambda_star(&spec), rat(1, 4));
        // after pruning both levels once: min(18/16, (9/2)/4) = 9/8
        let spec = SymmetricTreeSpec::new(vec![4, 4], vec![rat(18, 1), rat(9, 2)]);
        assert_eq!(lambda_star(&spec), rat(9, 8));
    }

    #[test]
    fn tau_star_values() {
        assert_eq!(tau_star(&worked_example()), 10);
        assert_eq!(tau_star(&SymmetricTreeSpec::new(vec![2, 8], vec![rat(1, 1), rat(1, 1)])), 10);
        assert_eq!(tau_star(&SymmetricTreeSpec::new(vec![7], vec![rat(1, 1)])), 7);
    }

    #[test]
    fn region_membership() {
        let spec = worked_example();
        assert!(in_region(&spec, rat(18, 25), 10));
        // lambda = 1 is rate-infeasible on the worked example
        assert!(!in_region(&spec, rat(1, 1), 10));
        assert!(in_region(&spec, rat(0, 1), 10));
        assert!(!in_region(&spec, rat(18, 25), 9));
    }

    #[test]
    fn urr_round_robin_verifies_everywhere() {
        let tree = crate::model::two_level_tree(5, 5, rat(18, 1), rat(9, 2));
        let urr = urr_schedule(&tree);
        assert_eq!(urr.len(), 1); // APs serve customers, handled separately
        for node in &urr {
            assert!(verify_schedule(&node.schedule, &node.k).is_valid());
            assert!(node.k.finite().all(|(_, k)| k == 5));
        }
    }

    #[test]
    fn urr_on_asymmetric_tree_uses_node_specific_counts() {
        let doc = r#"{"root":{"id":"r","children":[
            {"id":"a","capacity_num":9,"children":[
                {"id":"a1","capacity_num":3,"flows":2,"flow_capacity_num":2},
                {"id":"a2","capacity_num":3,"flows":1,"flow_capacity_num":2},
                {"id":"a3","capacity_num":3,"flows":1,"flow_capacity_num":2}]},
            {"id":"b","capacity_num":9,"children":[
                {"id":"b1","capacity_num":3,"flows":1,"flow_capacity_num":2}]}]}}"#;
        let tree = crate::model::load_tree(doc).unwrap();
        let urr = urr_schedule(&tree);
        for node in &urr {
            assert!(verify_schedule(&node.schedule, &node.k).is_valid());
            let fanout = tree.node(node.node).children.len() as u64;
            assert!(node.k.finite().all(|(_, k)| k == fanout));
        }
        // the two internal nodes have different round-robin lengths
        let periods: Vec<usize> = urr.iter().map(|n| n.schedule.period()).collect();
        assert!(periods.contains(&3) && periods.contains(&1));
    }

    #[test]
    fn urr_on_chain_tree() {
        // a 1-1 chain: every link has k = 1 and period-1 schedules
        let doc = r#"{"root":{"id":"r","children":[{"id":"m","capacity_num":5,
            "children":[{"id":"a","capacity_num":5,"flows":1,"flow_capacity_num":5}]}]}}"#;
        let tree = crate::model::load_tree(doc).unwrap();
        let urr = urr_schedule(&tree);
        for node in &urr {
            assert_eq!(node.schedule.period(), 1);
            assert!(node.k.finite().all(|(_, k)| k == 1));
        }
    }

    #[test]
    fn greedy_prune_worked_example() {
        let spec = worked_example();
        // tau = 8: two prunes, one per level, 16 flows remain
        let (pruned, log) = greedy_prune(&spec, 8).unwrap();
        assert_eq!(pruned.branching, vec![4, 4]);
        assert_eq!(pruned.total_flows(), 16);
        assert_eq!(log.len(), 2);
        assert_eq!(tau_star(&pruned), 8);

        // tau = tau*: no prunes
        let (same, log) = greedy_prune(&spec, 10).unwrap();
        assert_eq!(same.branching, vec![5, 5]);
        assert!(log.is_empty());

        // tau = 9: a single prune at the deepest tied level
        let (one, log) = greedy_prune(&spec, 9).unwrap();
        assert_eq!(one.branching, vec![5, 4]);
        assert_eq!(one.total_flows(), 20);
        assert_eq!(log, vec![PruneStep { level: 2, before: 5, after: 4 }]);
    }

    #[test]
    fn greedy_prune_errors() {
        let spec = worked_example();
        assert_eq!(
            greedy_prune(&spec, 1),
            Err(PruneError::DeadlineBelowDepth { tau: 1, depth: 2 })
        );
        // branching (2,2): tau* = 4, cannot go below 2
        let tiny = SymmetricTreeSpec::new(vec![2, 2], vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(greedy_prune(&tiny, 3).unwrap().0.branching, vec![2, 1]);
        assert_eq!(greedy_prune(&tiny, 2).unwrap().0.branching, vec![1, 1]);
    }

    #[test]
    fn each_prune_reduces_tau_star_by_one() {
        let spec = SymmetricTreeSpec::new(
            vec![3, 6, 4],
            vec![rat(100, 1), rat(50, 1), rat(10, 1)],
        );
        let start = tau_star(&spec);
        for target in (spec.depth() as u64..=start).rev() {
            let (pruned, log) = greedy_prune(&spec, target).unwrap();
            assert_eq!(tau_star(&pruned), target);
            assert_eq!(log.len() as u64, start - target);
            // lambda* never decreases under pruning
            assert!(lambda_star(&pruned) >= lambda_star(&spec));
        }
    }

    /// Greedy pruning maximizes surviving flows over all prune sequences of
    /// the same length (checked by brute force on small specs).
    #[test]
    fn greedy_prune_matches_brute_force() {
        fn best_flows(branching: &mut Vec<u64>, prunes: u64) -> u64 {
            if prunes == 0 {
                return branching.iter().product();
            }
            let mut best = 0;
            for i in 0..branching.len() {
                if branching[i] > 1 {
                    branching[i] -= 1;
                    best = best.max(best_flows(branching, prunes - 1));
                    branching[i] += 1;
                }
            }
            best
        }
        for shape in [vec![2, 3], vec![4, 2, 3], vec![6, 5, 4], vec![3, 3, 3], vec![5, 2]] {
            let caps = vec![rat(1000, 1); shape.len()];
            let spec = SymmetricTreeSpec::new(shape.clone(), caps);
            let start = tau_star(&spec);
            for target in spec.depth() as u64..start {
                if let Ok((pruned, _)) = greedy_prune(&spec, target) {
                    let mut shape_copy = shape.clone();
                    let brute = best_flows(&mut shape_copy, start - target);
                    assert_eq!(
                        pruned.total_flows(),
                        brute,
                        "shape {shape:?} target {target}"
                    );
                }
            }
        }
    }
}
