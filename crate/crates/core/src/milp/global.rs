//! Whole-tree model: per-node schedulability blocks plus the coupling rows
//! of the utility maximization (flow conservation, access-point bounds,
//! slice capacity and admission-gated route deadlines).
//!
//! Customer devices appear as one link each below their access point. Every
//! link carries an admission indicator that masks its density contribution
//! inside the parent's schedulability block, so unadmitted links do not
//! constrain the schedule.

use super::node::{add_node_block, NodeBlock};
use super::{MilpModel, Sense, VarKind};
use crate::model::{SlaParams, TreeTopology};
use crate::rational::Rational;

/// Handles into the global model.
pub struct GlobalModel {
    pub model: MilpModel,
    /// One block per node with children (internal nodes and access points).
    pub blocks: Vec<Option<NodeBlock>>,
    /// Admission-indicator variable per block child, aligned with blocks.
    pub admission_vars: Vec<Vec<usize>>,
    pub sigma_root: usize,
    pub k_max: u64,
}

/// Admission-indicator name for child `i` of the node prefixed `p`.
pub fn adm_name(prefix: &str, i: usize) -> String {
    format!("{prefix}_z_{i}")
}

/// Builds the whole-tree model with `max sigma_root` as objective.
pub fn build_global_model(tree: &TreeTopology, sla: &SlaParams, k_max: u64) -> GlobalModel {
    let mut model = MilpModel::new(format!("tree_{}_tau{}", tree.len(), sla.tau));
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let mut blocks: Vec<Option<NodeBlock>> = vec![None; tree.len()];
    let mut admission_vars: Vec<Vec<usize>> = vec![Vec::new(); tree.len()];

    // blocks bottom-up so child sigma variables exist when referenced
    for id in 0..tree.len() {
        let node = tree.node(id);
        let prefix = format!("n{id}");
        if node.children.is_empty() {
            if node.flows == 0 {
                continue;
            }
            let caps = vec![node.flow_capacity.expect("validated"); node.flows as usize];
            // customer admissions double as the sigma variables (0/1)
            let z: Vec<usize> =
                (0..node.flows as usize).map(|i| model.binary(adm_name(&prefix, i))).collect();
            let block = add_node_block(&mut model, &prefix, &caps, sla.lambda, k_max, Some(&z));
            for i in 0..node.flows as usize {
                let sig = model.var(&block.sig(i)).expect("sig");
                // sigma_f = z_f
                model.add_con(
                    format!("{prefix}_flow_admission_{i}"),
                    "admission",
                    vec![(sig, one), (z[i], -one)],
                    Sense::Eq,
                    zero,
                );
            }
            // access-point bound: no more flows than customers
            let row = (0..node.flows as usize)
                .map(|i| (model.var(&block.sig(i)).expect("sig"), one))
                .collect();
            model.add_con(
                format!("{prefix}_ap_bound"),
                "ap_bound",
                row,
                Sense::Le,
                Rational::from_integer(node.flows as i128),
            );
            admission_vars[id] = z;
            blocks[id] = Some(block);
        }
    }
    for level in (0..tree.depth()).rev() {
        for id in tree.level_nodes(level) {
            let node = tree.node(id);
            if node.children.is_empty() {
                continue;
            }
            let prefix = format!("n{id}");
            let caps: Vec<Rational> =
                node.children.iter().map(|&c| tree.node(c).capacity.expect("non-root")).collect();
            let z: Vec<usize> = (0..node.children.len())
                .map(|i| model.binary(adm_name(&prefix, i)))
                .collect();
            let block = add_node_block(&mut model, &prefix, &caps, sla.lambda, k_max, Some(&z));
            for (i, &child) in node.children.iter().enumerate() {
                let sig = model.var(&block.sig(i)).expect("sig");
                // z = 1 iff the link carries at least one flow
                let ub = model.vars[sig].upper;
                model.add_con(
                    format!("{prefix}_adm_up_{i}"),
                    "admission",
                    vec![(sig, one), (z[i], -ub)],
                    Sense::Le,
                    zero,
                );
                model.add_con(
                    format!("{prefix}_adm_dn_{i}"),
                    "admission",
                    vec![(z[i], one), (sig, -one)],
                    Sense::Le,
                    zero,
                );
                // flow conservation towards the child's own block
                if let Some(child_block) = &blocks[child] {
                    let mut row = vec![(sig, one)];
                    for ci in 0..child_block.m {
                        row.push((model.var(&child_block.sig(ci)).expect("sig"), -one));
                    }
                    model.add_con(
                        format!("{prefix}_conserve_{i}"),
                        "conservation",
                        row,
                        Sense::Eq,
                        zero,
                    );
                } else {
                    // childless subtree without flows carries nothing
                    model.add_con(
                        format!("{prefix}_conserve_{i}"),
                        "conservation",
                        vec![(sig, one)],
                        Sense::Eq,
                        zero,
                    );
                }
            }
            admission_vars[id] = z;
            blocks[id] = Some(block);
        }
    }

    // root throughput and objective
    let root = tree.root();
    let sigma_root = model.add_var(
        "sigma_root",
        VarKind::Integer,
        zero,
        Rational::from_integer(tree.total_flows() as i128),
    );
    let mut row = vec![(sigma_root, one)];
    if let Some(root_block) = &blocks[root] {
        for i in 0..root_block.m {
            row.push((model.var(&root_block.sig(i)).expect("sig"), -one));
        }
    }
    model.add_con("root_conserve", "conservation", row, Sense::Eq, zero);
    model.objective = vec![(sigma_root, one)];

    // admission-gated deadline per route: sum of k over the route's links
    let big = Rational::from_integer((tree.depth() as i128 + 1) * k_max as i128);
    for route in crate::model::routes(tree) {
        let ap = route.ap;
        let f = route.flow_index as usize;
        let ap_block = blocks[ap].as_ref().expect("ap with flows has a block");
        let z_f = admission_vars[ap][f];
        let mut row = vec![(model.var(&ap_block.k(f)).expect("k"), one)];
        for &node_id in &route.nodes_up {
            let parent = tree.node(node_id).parent.expect("non-root");
            let parent_block = blocks[parent].as_ref().expect("internal block");
            let pos = tree
                .node(parent)
                .children
                .iter()
                .position(|&c| c == node_id)
                .expect("child");
            row.push((model.var(&parent_block.k(pos)).expect("k"), one));
        }
        row.push((z_f, big));
        model.add_con(
            format!("deadline_n{ap}_f{f}"),
            "deadline",
            row,
            Sense::Le,
            Rational::from_integer(sla.tau as i128) + big,
        );
    }

    GlobalModel { model, blocks, admission_vars, sigma_root, k_max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::two_level_tree;
    use crate::rational::rat;

    #[test]
    fn worked_example_model_shape() {
        let tree = two_level_tree(5, 5, rat(18, 1), rat(9, 2));
        let sla = SlaParams::new(rat(1, 1), 10);
        let gm = build_global_model(&tree, &sla, sla.tau);
        // one block for the root, one per access point
        assert_eq!(gm.blocks.iter().filter(|b| b.is_some()).count(), 6);
        assert!(gm.model.constraints.iter().any(|c| c.family == "deadline"));
        assert_eq!(
            gm.model.constraints.iter().filter(|c| c.family == "deadline").count(),
            25
        );
        assert!(gm.model.binary_count() > 0);
    }
}
