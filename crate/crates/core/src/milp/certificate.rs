//! Certificates: complete variable assignments derived from a solution
//! bundle, checked row by row against the model.
//!
//! The builder replays each node's inductive-scheduling run: the sorted
//! vector and its evolution are recomputed from the bundle's
//! inter-scheduling times for as many iterations as the recorded trace ran,
//! the recorded witness fills the certifying iteration's two-base block, and
//! unreached iterations receive inert filler (bases 1, everything masked).
//! All values are exact rationals, so a pass/fail verdict never depends on
//! floating-point tolerance.

use super::global::{adm_name, build_global_model};
use super::node::NodeBlock;
use super::{binary_expand, MilpModel, Sense, VarKind};
use crate::dsum::SolutionBundle;
use crate::model::{NodeId, SlaParams, TreeTopology};
use crate::pinwheel::{SxyGroup, SxyWitness};
use crate::rational::{ceil_rational, Rational};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Assignment = HashMap<usize, Rational>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyResult {
    pub family: String,
    pub checked: usize,
    pub violated: usize,
    pub first_violation: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertReport {
    pub families: Vec<FamilyResult>,
    pub unassigned: usize,
    pub pass: bool,
}

impl CertReport {
    pub fn family(&self, name: &str) -> Option<&FamilyResult> {
        self.families.iter().find(|f| f.family == name)
    }

    pub fn family_passed(&self, name: &str) -> bool {
        self.family(name).map(|f| f.violated == 0).unwrap_or(false)
    }
}

/// Evaluates every constraint and every variable bound against the
/// assignment, grouped per constraint family (bounds report as "bounds").
pub fn check_assignment(model: &MilpModel, assignment: &Assignment) -> CertReport {
    let mut families: Vec<FamilyResult> = Vec::new();
    let mut unassigned = 0usize;
    let mut note = |family: &str, ok: bool, name: &str, detail: String| {
        let entry = match families.iter_mut().find(|f| f.family == family) {
            Some(e) => e,
            None => {
                families.push(FamilyResult {
                    family: family.to_string(),
                    checked: 0,
                    violated: 0,
                    first_violation: None,
                });
                families.last_mut().expect("just pushed")
            }
        };
        entry.checked += 1;
        if !ok {
            entry.violated += 1;
            if entry.first_violation.is_none() {
                entry.first_violation = Some(format!("{name}: {detail}"));
            }
        }
    };

    for (idx, var) in model.vars.iter().enumerate() {
        match assignment.get(&idx) {
            None => {
                unassigned += 1;
                note("bounds", false, &var.name, "unassigned".into());
            }
            Some(&v) => {
                let in_bounds = v >= var.lower && v <= var.upper;
                let integral = match var.kind {
                    VarKind::Real => true,
                    _ => v.is_integer(),
                };
                note(
                    "bounds",
                    in_bounds && integral,
                    &var.name,
                    format!("value {v} outside [{}, {}]", var.lower, var.upper),
                );
            }
        }
    }
    for con in &model.constraints {
        let mut lhs = Rational::from_integer(0);
        let mut complete = true;
        for &(v, c) in &con.terms {
            match assignment.get(&v) {
                Some(&val) => lhs += c * val,
                None => complete = false,
            }
        }
        let ok = complete
            && match con.sense {
                Sense::Le => lhs <= con.rhs,
                Sense::Eq => lhs == con.rhs,
                Sense::Ge => lhs >= con.rhs,
            };
        note(
            con.family,
            ok,
            &con.name,
            format!("lhs {lhs} vs rhs {} ({:?})", con.rhs, con.sense),
        );
    }
    let pass = unassigned == 0 && families.iter().all(|f| f.violated == 0);
    CertReport { families, unassigned, pass }
}

struct BlockFill<'a> {
    model: &'a MilpModel,
    block: &'a NodeBlock,
    assignment: &'a mut Assignment,
}

impl BlockFill<'_> {
    fn set(&mut self, name: &str, value: Rational) {
        let idx = self.model.var(name).unwrap_or_else(|| panic!("missing var {name}"));
        self.assignment.insert(idx, value);
    }

    fn set_int(&mut self, name: &str, value: u64) {
        self.set(name, Rational::from_integer(value as i128));
    }

    fn set_bits(&mut self, value: u64, name_of: impl Fn(u32) -> String) {
        let bits = binary_expand(value, self.block.k_max).expect("within k_max");
        for (l, bit) in bits.iter().enumerate() {
            self.set(&name_of(l as u32), Rational::from_integer(*bit as i128));
        }
    }
}

/// Witness data reshaped for one iteration's block fill.
struct IterationWitness {
    x: u64,
    y: u64,
    /// Per sorted position `i`: `(in_x_group, exponent, specialized)`.
    tasks: HashMap<usize, (bool, u32, u64)>,
}

impl IterationWitness {
    fn inert() -> Self {
        IterationWitness { x: 1, y: 1, tasks: HashMap::new() }
    }

    fn from_witness(w: &SxyWitness) -> Self {
        IterationWitness {
            x: w.x,
            y: w.y,
            tasks: w
                .assignments
                .iter()
                .map(|a| (a.task, (a.group == SxyGroup::X, a.exponent, a.specialized)))
                .collect(),
        }
    }
}

/// Fills one node block: sorted chain, evolution ratios, per-iteration
/// two-base variables. `ks` are the per-position inter-scheduling times
/// (filler `k_max` on unadmitted positions), `z` the admission flags,
/// `sigma` the per-position flow counts, `depth` the number of iterations
/// the trace ran and `witness` the certifying witness if any.
#[allow(clippy::too_many_arguments)]
pub fn fill_block(
    model: &MilpModel,
    block: &NodeBlock,
    assignment: &mut Assignment,
    ks: &[u64],
    z: &[bool],
    sigma: &[u64],
    depth: usize,
    witness: Option<&SxyWitness>,
) {
    let m = block.m;
    let k_max = block.k_max;
    let lambda = block.lambda;
    let mut fill = BlockFill { model, block, assignment };

    // unsorted k, bits, flows, slice products
    for i in 0..m {
        fill.set_int(&block.k(i), ks[i]);
        fill.set_bits(ks[i], |l| block.kap(i, l));
        fill.set_int(&block.sig(i), sigma[i]);
        let bits = binary_expand(ks[i], k_max).expect("k within bound");
        for (l, bit) in bits.iter().enumerate() {
            let gamma = if *bit {
                lambda * Rational::from_integer(sigma[i] as i128)
            } else {
                Rational::from_integer(0)
            };
            fill.set(&block.gam(i, l as u32), gamma);
        }
    }

    // stable sort: by value, admitted before filler, then position
    let mut perm: Vec<usize> = (0..m).collect();
    perm.sort_by_key(|&i| (ks[i], !z[i], i));
    let sorted: Vec<u64> = perm.iter().map(|&i| ks[i]).collect();
    for i in 0..m {
        for j in 0..m {
            let phi = if perm[i] == j { 1 } else { 0 };
            fill.set_int(&block.phi(i, j), phi);
            fill.set_int(&block.zeta(i, j), phi * ks[j]);
        }
        fill.set_int(&block.ks(0, i), sorted[i]);
    }

    let t_iter = block.iterations;
    let depth = depth.clamp(1, t_iter);
    let certifying = depth - 1;
    let mut current = sorted.clone();

    for j in 0..t_iter {
        let reached = j <= certifying;
        fill.set_int(&block.active(j), reached as u64);
        fill.set_int(&block.theta(j), (j == certifying) as u64);

        let iw = if j == certifying {
            witness.map(IterationWitness::from_witness).unwrap_or_else(IterationWitness::inert)
        } else {
            IterationWitness::inert()
        };
        fill.set_int(&block.base_x(j), iw.x);
        fill.set_int(&block.base_y(j), iw.y);
        fill.set_bits(iw.x, |l| block.chi(j, l));
        fill.set_bits(iw.y, |l| block.psi(j, l));
        let x_bits = binary_expand(iw.x, k_max).expect("x");
        let y_bits = binary_expand(iw.y, k_max).expect("y");

        let mut rho_x = Rational::from_integer(0);
        let mut rho_y = Rational::from_integer(0);
        for i in j..m {
            // group, exponent and specialized value: witness for certified
            // admitted entries, inert y-side otherwise
            let (in_x, exponent, spec) = match iw.tasks.get(&i) {
                Some(&(in_x, e, s)) => (in_x, e, s),
                None => (false, 0, iw.y),
            };
            let nu = in_x as u64;
            fill.set_int(&block.nu(j, i), nu);
            for n in 0..block.bits {
                fill.set_int(&block.eta(j, i, n), (n == exponent) as u64);
            }
            for l in 0..block.bits {
                let chi = x_bits[l as usize] as u64;
                let psi = y_bits[l as usize] as u64;
                fill.set_int(&block.pvar(j, i, l), nu * chi);
                fill.set_int(&block.qvar(j, i, l), nu * psi);
                // h_l = nu*chi + (1-nu)*psi; f_{l,n} = eta_n * h_l
                let h = nu * chi + (1 - nu) * psi;
                for n in 0..block.bits {
                    let f = if n == exponent { h } else { 0 };
                    fill.set_int(&block.fvar(j, i, l, n), f);
                }
            }
            fill.set_int(&block.spec(j, i), spec);
            fill.set_bits(spec, |l| block.spec_bit(j, i, l));
            let admitted = z[perm[i]];
            // mu = z / s, contributing density only on admitted entries
            let mu = if admitted {
                Rational::new(1, spec as i128)
            } else {
                Rational::from_integer(0)
            };
            fill.set(&block.mu(j, i), mu);
            let spec_bits = binary_expand(spec, k_max).expect("spec");
            for l in 0..block.bits {
                let u = if spec_bits[l as usize] { mu } else { Rational::from_integer(0) };
                fill.set(&block.uvar(j, i, l), u);
            }
            let v = if in_x { mu } else { Rational::from_integer(0) };
            fill.set(&block.vvar(j, i), v);
            rho_x += v;
            rho_y += mu - v;
        }
        fill.set(&block.rho(j, true), rho_x);
        fill.set(&block.rho(j, false), rho_y);
        for (x_side, base, rho, bits) in
            [(true, iw.x, rho_x, &x_bits), (false, iw.y, rho_y, &y_bits)]
        {
            let beta = ceil_rational(Rational::from_integer(base as i128) * rho);
            let alpha = Rational::new(beta, base as i128);
            fill.set(&block.beta(j, x_side), Rational::from_integer(beta));
            fill.set(&block.alpha(j, x_side), alpha);
            for l in 0..block.bits {
                let bit = bits[l as usize];
                fill.set(
                    &block.delta(j, x_side, l),
                    if bit { rho } else { Rational::from_integer(0) },
                );
                fill.set(
                    &block.omega(j, x_side, l),
                    if bit { alpha } else { Rational::from_integer(0) },
                );
            }
            let iota = if j == certifying { alpha } else { Rational::from_integer(0) };
            fill.set(&block.iota(j, x_side), iota);
        }

        // evolution into iteration j + 1
        if j + 1 < t_iter {
            let pivot = if reached { current[j] } else { 1 };
            fill.set_bits(pivot, |l| block.pivot_bit(j, l));
            let pivot_bits = binary_expand(pivot, k_max).expect("pivot");
            let evolving = j < certifying;
            for i in j + 1..m {
                let r = if evolving { current[i].div_ceil(pivot) } else { 0 };
                let next = if evolving {
                    debug_assert!(current[i] > r, "evolution stays above 0");
                    current[i] - r
                } else {
                    1
                };
                fill.set_int(&block.ratio(j, i), r);
                for l in 0..block.bits {
                    let xi = if pivot_bits[l as usize] { r } else { 0 };
                    fill.set_int(&block.xi(j, i, l), xi);
                }
                fill.set_int(&block.ks(j + 1, i), next);
                current[i] = next;
            }
        }
    }
}

/// Admitted flows routed through `id` under the bundle.
fn flows_below(tree: &TreeTopology, bundle: &SolutionBundle, id: NodeId) -> u64 {
    let node = tree.node(id);
    if node.children.is_empty() {
        bundle.admissions.get(&id).copied().unwrap_or(0)
    } else {
        node.children.iter().map(|&c| flows_below(tree, bundle, c)).sum()
    }
}

/// Builds the whole-tree model and the complete assignment certifying the
/// bundle against it.
pub fn certificate_assignment(
    tree: &TreeTopology,
    sla: &SlaParams,
    bundle: &SolutionBundle,
) -> (super::global::GlobalModel, Assignment) {
    let k_max = sla.tau.max(1);
    let gm = build_global_model(tree, sla, k_max);
    let mut assignment: Assignment = HashMap::new();

    for id in 0..tree.len() {
        let Some(block) = &gm.blocks[id] else { continue };
        let node = tree.node(id);
        let (ks, z, sigma): (Vec<u64>, Vec<bool>, Vec<u64>) = if node.children.is_empty() {
            let admitted = bundle.admissions.get(&id).copied().unwrap_or(0);
            let n = node.flows as usize;
            let ks = (0..n)
                .map(|f| if (f as u64) < admitted { admitted.max(1) } else { k_max })
                .collect();
            let z = (0..n).map(|f| (f as u64) < admitted).collect();
            let sigma = (0..n).map(|f| ((f as u64) < admitted) as u64).collect();
            (ks, z, sigma)
        } else {
            let ks = node
                .children
                .iter()
                .map(|&c| bundle.link_k[c].unwrap_or(k_max))
                .collect();
            let z = node.children.iter().map(|&c| bundle.link_k[c].is_some()).collect();
            let sigma =
                node.children.iter().map(|&c| flows_below(tree, bundle, c)).collect();
            (ks, z, sigma)
        };
        let trace = bundle.traces[id].as_ref();
        let depth = trace.map(|t| t.iterations.len()).unwrap_or(1);
        let witness = trace.and_then(|t| t.witness.as_ref());
        fill_block(&gm.model, block, &mut assignment, &ks, &z, &sigma, depth, witness);
        // admission indicators of this block
        for (i, &zi) in z.iter().enumerate() {
            let idx = gm.model.var(&adm_name(&format!("n{id}"), i)).expect("z var");
            assignment.insert(idx, Rational::from_integer(zi as i128));
        }
    }
    assignment.insert(gm.sigma_root, Rational::from_integer(bundle.sigma as i128));
    (gm, assignment)
}

/// Builds the certificate and checks every family.
pub fn certify_bundle(tree: &TreeTopology, sla: &SlaParams, bundle: &SolutionBundle) -> CertReport {
    let (gm, assignment) = certificate_assignment(tree, sla, bundle);
    check_assignment(&gm.model, &assignment)
}

/// Test helper: bumps `k` by one on the most saturated scheduled link,
/// breaking slice capacity when the link was tight.
pub fn mutate_bundle_bump_k(bundle: &SolutionBundle, tree: &TreeTopology) -> SolutionBundle {
    let mut best: Option<(NodeId, Rational)> = None;
    for id in 0..tree.len() {
        if let Some(k) = bundle.link_k[id] {
            let flows = flows_below(tree, bundle, id);
            if flows == 0 {
                continue;
            }
            let load = bundle.lambda
                * Rational::from_integer(flows as i128)
                * Rational::from_integer(k as i128)
                / tree.node(id).capacity.expect("non-root");
            if best.map(|(_, b)| load > b).unwrap_or(true) {
                best = Some((id, load));
            }
        }
    }
    let mut out = bundle.clone();
    if let Some((id, _)) = best {
        out.link_k[id] = Some(bundle.link_k[id].expect("scheduled") + 1);
    }
    out
}
