//! Domain model: validated tree topologies, SLA parameters, route
//! enumeration and the per-level capacity bound.
//!
//! All rates and capacities are exact rationals in packets per slot. The
//! JSON loader accepts physical units (bits per second plus a slot duration)
//! and normalizes them against the flow rate, so a link of capacity `c` bps
//! becomes `c / lambda` packets per slot and the flow rate becomes 1.

use crate::rational::{floor_rational, parse_decimal, Rational, RatioRepr};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// SLA parameters: per-flow rate, hard end-to-end deadline, duration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlaParams {
    /// Maximum instantaneous arrival rate, packets per slot.
    pub lambda: Rational,
    /// Packet deadline in slots.
    pub tau: u64,
    /// SLA duration in slots; `None` means unbounded.
    pub duration: Option<u64>,
}

impl SlaParams {
    pub fn new(lambda: Rational, tau: u64) -> Self {
        assert!(lambda > Rational::from_integer(0), "lambda must be positive");
        assert!(tau >= 1, "tau must be at least 1");
        SlaParams { lambda, tau, duration: None }
    }
}

/// Node index into [`TreeTopology::nodes`].
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeData {
    pub name: String,
    pub parent: Option<NodeId>,
    /// Capacity of the outgoing link towards the parent; `None` for the root.
    pub capacity: Option<Rational>,
    pub level: u32,
    pub children: Vec<NodeId>,
    /// Number of customer flows attached (access points only).
    pub flows: u64,
    /// Capacity of each customer link into this node (access points only).
    pub flow_capacity: Option<Rational>,
}

/// Rooted tree with per-link capacities and per-AP flow counts.
///
/// Explicit nodes run from the root (level 0) down to the access points at
/// level `depth - 1`; customer devices form level `depth` implicitly, one
/// link per flow. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    nodes: Vec<NodeData>,
    depth: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum TreeError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural error: {0}")]
    Structure(String),
}

/// A single flow's route: customer link plus every tree link up to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub ap: NodeId,
    /// Index of the flow within its AP.
    pub flow_index: u64,
    /// Nodes from the AP up to (excluding) the root; the route's links are
    /// the customer link into `ap` followed by each node's outgoing link.
    pub nodes_up: Vec<NodeId>,
}

impl TreeTopology {
    /// Builds and validates a tree from parent pointers.
    pub fn new(nodes: Vec<NodeData>) -> Result<Self, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::Structure("tree has no nodes".into()));
        }
        let roots: Vec<NodeId> =
            (0..nodes.len()).filter(|&i| nodes[i].parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::Structure(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        if nodes[root].level != 0 {
            return Err(TreeError::Structure("root must be at level 0".into()));
        }
        if nodes[root].capacity.is_some() {
            return Err(TreeError::Structure("root has no outgoing link".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                if p >= nodes.len() {
                    return Err(TreeError::Structure(format!("node {i} has invalid parent")));
                }
                if n.level != nodes[p].level + 1 {
                    return Err(TreeError::Structure(format!(
                        "node '{}' level {} does not match parent level {}",
                        n.name, n.level, nodes[p].level
                    )));
                }
                match n.capacity {
                    Some(c) if c > Rational::from_integer(0) => {}
                    _ => {
                        return Err(TreeError::Structure(format!(
                            "node '{}' needs a positive outgoing capacity",
                            n.name
                        )))
                    }
                }
            }
        }
        let leaves: Vec<NodeId> =
            (0..nodes.len()).filter(|&i| nodes[i].children.is_empty()).collect();
        let leaf_level = nodes[leaves[0]].level;
        if leaves.iter().any(|&l| nodes[l].level != leaf_level) {
            return Err(TreeError::Structure("leaves are not all at the same level".into()));
        }
        for &l in &leaves {
            if nodes[l].flows > 0 && nodes[l].flow_capacity.is_none() {
                return Err(TreeError::Structure(format!(
                    "access point '{}' has flows but no customer-link capacity",
                    nodes[l].name
                )));
            }
            if let Some(fc) = nodes[l].flow_capacity {
                if fc <= Rational::from_integer(0) {
                    return Err(TreeError::Structure(format!(
                        "access point '{}' has nonpositive customer-link capacity",
                        nodes[l].name
                    )));
                }
            }
        }
        for (i, n) in nodes.iter().enumerate() {
            if !n.children.is_empty() && n.flows > 0 {
                return Err(TreeError::Structure(format!(
                    "internal node '{}' ({i}) cannot carry flows directly",
                    n.name
                )));
            }
        }
        Ok(TreeTopology { depth: leaf_level + 1, nodes })
    }

    pub fn root(&self) -> NodeId {
        (0..self.nodes.len()).find(|&i| self.nodes[i].parent.is_none()).expect("validated")
    }

    /// Number of levels `D`: access points sit at `D - 1`, customers at `D`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn nodes(&self) -> &[NodeData] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NodeData {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn aps(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    pub fn level_nodes(&self, level: u32) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].level == level).collect()
    }

    pub fn total_flows(&self) -> u64 {
        self.aps().map(|a| self.nodes[a].flows).sum()
    }

    /// Flows carried by node's outgoing link (all flows in its subtree).
    pub fn subtree_flows(&self, id: NodeId) -> u64 {
        let n = &self.nodes[id];
        if n.children.is_empty() {
            n.flows
        } else {
            n.children.iter().map(|&c| self.subtree_flows(c)).sum()
        }
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        (0..self.nodes.len()).find(|&i| self.nodes[i].name == name)
    }
}

/// Enumerates one route per flow: `D` links each, the customer link into the
/// AP plus every tree link up to the root. APs with zero flows contribute
/// nothing.
pub fn routes(tree: &TreeTopology) -> Vec<Route> {
    let mut out = Vec::new();
    for ap in tree.aps() {
        let mut nodes_up = Vec::new();
        let mut cur = ap;
        while let Some(parent) = tree.node(cur).parent {
            nodes_up.push(cur);
            cur = parent;
        }
        for flow_index in 0..tree.node(ap).flows {
            out.push(Route { ap, flow_index, nodes_up: nodes_up.clone() });
        }
    }
    out
}

/// Upper bound on the number of supportable flows.
///
/// Every admitted flow crosses exactly one node at each level; a node can
/// forward at most `floor(c_max / lambda)` flows where `c_max` is the largest
/// capacity among its entering links, because the total scheduling density of
/// its children is at most 1. The bound is the minimum over levels of the
/// per-node sums, capped by the number of flows actually present.
pub fn capacity_bound(tree: &TreeTopology, lambda: Rational) -> u64 {
    assert!(lambda > Rational::from_integer(0));
    let total = tree.total_flows();
    let mut best = total;
    for level in 0..tree.depth() {
        let mut level_sum: u64 = 0;
        for id in tree.level_nodes(level) {
            let n = tree.node(id);
            let c_max = if n.children.is_empty() {
                if n.flows > 0 { n.flow_capacity } else { None }
            } else {
                n.children.iter().filter_map(|&c| tree.node(c).capacity).max()
            };
            if let Some(c) = c_max {
                level_sum += floor_rational(c / lambda).max(0) as u64;
            }
        }
        best = best.min(level_sum);
    }
    best
}

// ---------------------------------------------------------------------------
// JSON ingestion

#[derive(Debug, Deserialize)]
struct TreeDoc {
    #[serde(default)]
    slot_us: Option<serde_json::Number>,
    #[serde(default)]
    lambda_bps: Option<serde_json::Number>,
    root: NodeDoc,
}

#[derive(Debug, Deserialize, Serialize)]
struct NodeDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity_bps: Option<serde_json::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity_num: Option<i128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity_den: Option<i128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<NodeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flows: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flow_capacity_bps: Option<serde_json::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flow_capacity_num: Option<i128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flow_capacity_den: Option<i128>,
}

fn number_to_rational(n: &serde_json::Number) -> Result<Rational, TreeError> {
    parse_decimal(&n.to_string())
        .ok_or_else(|| TreeError::Parse(format!("cannot parse number '{n}' exactly")))
}

/// Converts a capacity to packets per slot: `c_bps / lambda_bps` when
/// physical units are given, or `num/den` directly in normalized form.
fn capacity_from_doc(
    bps: &Option<serde_json::Number>,
    num: Option<i128>,
    den: Option<i128>,
    lambda_bps: Option<Rational>,
    what: &str,
) -> Result<Option<Rational>, TreeError> {
    match (bps, num) {
        (Some(b), None) => {
            let lambda = lambda_bps.ok_or_else(|| {
                TreeError::Parse(format!("{what}: capacity_bps requires lambda_bps"))
            })?;
            Ok(Some(number_to_rational(b)? / lambda))
        }
        (None, Some(n)) => Ok(Some(Rational::new(n, den.unwrap_or(1)))),
        (None, None) => Ok(None),
        (Some(_), Some(_)) => {
            Err(TreeError::Parse(format!("{what}: give either bps or num/den, not both")))
        }
    }
}

/// Loads and validates a tree document.
///
/// Schema: `{"slot_us": n, "lambda_bps": n, "root": {"id": s, "children":
/// [{"id": s, "capacity_bps": n, "children": [...] | "flows": int,
/// "flow_capacity_bps": n}]}}`. The normalized form replaces any
/// `*_bps` field with exact `*_num` / `*_den` packets-per-slot values.
/// After loading, the flow rate is 1 packet per slot.
pub fn load_tree(document: &str) -> Result<TreeTopology, TreeError> {
    let doc: TreeDoc =
        serde_json::from_str(document).map_err(|e| TreeError::Parse(e.to_string()))?;
    let lambda_bps = match &doc.lambda_bps {
        Some(n) => {
            let l = number_to_rational(n)?;
            if l <= Rational::from_integer(0) {
                return Err(TreeError::Parse("lambda_bps must be positive".into()));
            }
            Some(l)
        }
        None => None,
    };
    let _ = &doc.slot_us; // slot duration cancels in the normalization
    let mut nodes: Vec<NodeData> = Vec::new();

    fn walk(
        doc: &NodeDoc,
        parent: Option<NodeId>,
        level: u32,
        lambda_bps: Option<Rational>,
        nodes: &mut Vec<NodeData>,
    ) -> Result<NodeId, TreeError> {
        let capacity = capacity_from_doc(
            &doc.capacity_bps,
            doc.capacity_num,
            doc.capacity_den,
            lambda_bps,
            &doc.id,
        )?;
        if parent.is_some() && capacity.is_none() {
            return Err(TreeError::Parse(format!("node '{}' is missing a capacity", doc.id)));
        }
        if parent.is_none() && capacity.is_some() {
            return Err(TreeError::Parse("root must not carry a capacity".into()));
        }
        let flow_capacity = capacity_from_doc(
            &doc.flow_capacity_bps,
            doc.flow_capacity_num,
            doc.flow_capacity_den,
            lambda_bps,
            &doc.id,
        )?;
        let id = nodes.len();
        nodes.push(NodeData {
            name: doc.id.clone(),
            parent,
            capacity,
            level,
            children: Vec::new(),
            flows: doc.flows.unwrap_or(0),
            flow_capacity,
        });
        if let Some(children) = &doc.children {
            if doc.flows.is_some() {
                return Err(TreeError::Parse(format!(
                    "node '{}' has both children and flows",
                    doc.id
                )));
            }
            for child in children {
                let cid = walk(child, Some(id), level + 1, lambda_bps, nodes)?;
                nodes[id].children.push(cid);
            }
        }
        Ok(id)
    }

    walk(&doc.root, None, 0, lambda_bps, &mut nodes)?;
    TreeTopology::new(nodes)
}

/// Emits the normalized-form document (exact `num/den` capacities).
/// `load_tree(emit_tree(t))` reproduces `t`.
pub fn emit_tree(tree: &TreeTopology) -> String {
    fn build(tree: &TreeTopology, id: NodeId) -> serde_json::Value {
        let n = tree.node(id);
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), serde_json::Value::String(n.name.clone()));
        if let Some(c) = n.capacity {
            let repr = RatioRepr::from(c);
            obj.insert("capacity_num".into(), serde_json::json!(repr.num));
            obj.insert("capacity_den".into(), serde_json::json!(repr.den));
        }
        if n.children.is_empty() {
            obj.insert("flows".into(), serde_json::json!(n.flows));
            if let Some(fc) = n.flow_capacity {
                let repr = RatioRepr::from(fc);
                obj.insert("flow_capacity_num".into(), serde_json::json!(repr.num));
                obj.insert("flow_capacity_den".into(), serde_json::json!(repr.den));
            }
        } else {
            let children: Vec<serde_json::Value> =
                n.children.iter().map(|&c| build(tree, c)).collect();
            obj.insert("children".into(), serde_json::Value::Array(children));
        }
        serde_json::Value::Object(obj)
    }
    let doc = serde_json::json!({ "root": build(tree, tree.root()) });
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// The reconstructed worked-example tree: a root with `n1` access points of
/// link capacity `c1`, each serving `n2` customers over links of capacity
/// `c2`, all in packets per slot.
pub fn two_level_tree(n1: u64, n2: u64, c1: Rational, c2: Rational) -> TreeTopology {
    let mut nodes = vec![NodeData {
        name: "root".into(),
        parent: None,
        capacity: None,
        level: 0,
        children: Vec::new(),
        flows: 0,
        flow_capacity: None,
    }];
    for i in 0..n1 {
        let id = nodes.len();
        nodes.push(NodeData {
            name: format!("v{}", i + 1),
            parent: Some(0),
            capacity: Some(c1),
            level: 1,
            children: Vec::new(),
            flows: n2,
            flow_capacity: Some(c2),
        });
        nodes[0].children.push(id);
    }
    TreeTopology::new(nodes).expect("well-formed")
}

/// Per-AP admitted flow counts keyed by node id, used by solution bundles.
pub type Admissions = BTreeMap<NodeId, u64>;
