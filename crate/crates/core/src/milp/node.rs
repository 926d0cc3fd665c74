//! Per-node linearization of the inductive-scheduling feasibility check.
//!
//! For one node with `M` child links the block contains, per child, an
//! integer inter-scheduling time with its binary expansion and a flow count
//! with the slice-capacity envelope; a doubly stochastic binary permutation
//! sorting the vector; per-iteration evolution variables expressing
//! `k_i - ceil(k_i / k_pivot)` through an integer ratio; and per-iteration
//! two-base blocks (bases with binary expansions, group membership, dyadic
//! exponent selection, reciprocal densities and the ceiling condition).
//!
//! Iteration semantics: binary `a_j` marks iterations the evolution chain
//! reaches (`a_0 = 1`, monotone), `theta_j <= a_j` marks the certifying
//! iteration and at least one must certify. Rows that only make sense for a
//! reached or certifying iteration carry a big-M term in the corresponding
//! indicator; product-definition rows are exact unconditionally because one
//! factor is always binary.

use super::{expansion_bits, mccormick_binary, MilpModel, Sense, VarKind};
use crate::rational::{floor_rational, Rational};

/// Variable-name book-keeping for one node's block.
#[derive(Debug, Clone)]
pub struct NodeBlock {
    pub prefix: String,
    pub m: usize,
    pub bits: u32,
    pub k_max: u64,
    /// Number of test iterations (`max(M - 1, 1)`).
    pub iterations: usize,
    pub capacities: Vec<Rational>,
    pub lambda: Rational,
}

impl NodeBlock {
    pub fn k(&self, i: usize) -> String {
        format!("{}_k_{i}", self.prefix)
    }
    pub fn kap(&self, i: usize, l: u32) -> String {
        format!("{}_kap_{i}_{l}", self.prefix)
    }
    pub fn sig(&self, i: usize) -> String {
        format!("{}_sig_{i}", self.prefix)
    }
    pub fn gam(&self, i: usize, l: u32) -> String {
        format!("{}_gam_{i}_{l}", self.prefix)
    }
    pub fn phi(&self, i: usize, j: usize) -> String {
        format!("{}_perm_{i}_{j}", self.prefix)
    }
    pub fn zeta(&self, i: usize, j: usize) -> String {
        format!("{}_zeta_{i}_{j}", self.prefix)
    }
    pub fn ks(&self, j: usize, i: usize) -> String {
        format!("{}_ks_{j}_{i}", self.prefix)
    }
    pub fn active(&self, j: usize) -> String {
        format!("{}_a_{j}", self.prefix)
    }
    pub fn theta(&self, j: usize) -> String {
        format!("{}_th_{j}", self.prefix)
    }
    pub fn ratio(&self, j: usize, i: usize) -> String {
        format!("{}_r_{j}_{i}", self.prefix)
    }
    pub fn pivot_bit(&self, j: usize, l: u32) -> String {
        format!("{}_kp_{j}_{l}", self.prefix)
    }
    pub fn xi(&self, j: usize, i: usize, l: u32) -> String {
        format!("{}_xi_{j}_{i}_{l}", self.prefix)
    }
    pub fn base_x(&self, j: usize) -> String {
        format!("{}_x_{j}", self.prefix)
    }
    pub fn base_y(&self, j: usize) -> String {
        format!("{}_y_{j}", self.prefix)
    }
    pub fn chi(&self, j: usize, l: u32) -> String {
        format!("{}_chi_{j}_{l}", self.prefix)
    }
    pub fn psi(&self, j: usize, l: u32) -> String {
        format!("{}_psi_{j}_{l}", self.prefix)
    }
    pub fn rho(&self, j: usize, x: bool) -> String {
        format!("{}_rho{}_{j}", self.prefix, if x { "x" } else { "y" })
    }
    pub fn beta(&self, j: usize, x: bool) -> String {
        format!("{}_b{}_{j}", self.prefix, if x { "x" } else { "y" })
    }
    pub fn alpha(&self, j: usize, x: bool) -> String {
        format!("{}_al{}_{j}", self.prefix, if x { "x" } else { "y" })
    }
    pub fn delta(&self, j: usize, x: bool, l: u32) -> String {
        format!("{}_d{}_{j}_{l}", self.prefix, if x { "x" } else { "y" })
    }
    pub fn omega(&self, j: usize, x: bool, l: u32) -> String {
        format!("{}_o{}_{j}_{l}", self.prefix, if x { "x" } else { "y" })
    }
    pub fn iota(&self, j: usize, x: bool) -> String {
        format!("{}_i{}_{j}", self.prefix, if x { "x" } else { "y" })
    }
    pub fn nu(&self, j: usize, i: usize) -> String {
        format!("{}_nu_{j}_{i}", self.prefix)
    }
    pub fn eta(&self, j: usize, i: usize, n: u32) -> String {
        format!("{}_eta_{j}_{i}_{n}", self.prefix)
    }
    pub fn pvar(&self, j: usize, i: usize, l: u32) -> String {
        format!("{}_p_{j}_{i}_{l}", self.prefix)
    }
    pub fn qvar(&self, j: usize, i: usize, l: u32) -> String {
        format!("{}_q_{j}_{i}_{l}", self.prefix)
    }
    pub fn fvar(&self, j: usize, i: usize, l: u32, n: u32) -> String {
        format!("{}_f_{j}_{i}_{l}_{n}", self.prefix)
    }
    pub fn spec(&self, j: usize, i: usize) -> String {
        format!("{}_s_{j}_{i}", self.prefix)
    }
    pub fn spec_bit(&self, j: usize, i: usize, l: u32) -> String {
        format!("{}_sb_{j}_{i}_{l}", self.prefix)
    }
    pub fn mu(&self, j: usize, i: usize) -> String {
        format!("{}_mu_{j}_{i}", self.prefix)
    }
    pub fn uvar(&self, j: usize, i: usize, l: u32) -> String {
        format!("{}_u_{j}_{i}_{l}", self.prefix)
    }
    pub fn vvar(&self, j: usize, i: usize) -> String {
        format!("{}_v_{j}_{i}", self.prefix)
    }
}

/// Appends one node's block to `model` and returns its handle.
///
/// `capacities[i]` is the capacity of child link `i`; sibling flow counts
/// and objective wiring are the caller's business (the block constrains
/// `sig_i` only through slice capacity).
///
/// With `admission = Some(z)`, child `i` contributes density only when the
/// binary `z[i]` is 1: the reciprocal row becomes `sum 2^l u = z_i` (so
/// `mu_i = z_i / s_i`) and the specialization slack is gated on `z_i` as
/// well. This extends the removed-entry masking to unadmitted links, which
/// the per-node derivation does not otherwise model.
pub fn add_node_block(
    model: &mut MilpModel,
    prefix: &str,
    capacities: &[Rational],
    lambda: Rational,
    k_max: u64,
    admission: Option<&[usize]>,
) -> NodeBlock {
    assert!(!capacities.is_empty(), "a block needs at least one child");
    assert!(k_max >= 1);
    let m = capacities.len();
    let bits = expansion_bits(k_max);
    let iterations = m.saturating_sub(1).max(1);
    let block = NodeBlock {
        prefix: prefix.to_string(),
        m,
        bits,
        k_max,
        iterations,
        capacities: capacities.to_vec(),
        lambda,
    };
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let kmax_r = Rational::from_integer(k_max as i128);
    let pow = |e: u32| Rational::from_integer(1i128 << e);

    // per-child k, expansion, flows, slice capacity
    for (i, &c_i) in capacities.iter().enumerate() {
        let k = model.add_var(block.k(i), VarKind::Integer, one, kmax_r);
        let mut expansion = vec![(k, -one)];
        for l in 0..bits {
            let bit = model.binary(block.kap(i, l));
            expansion.push((bit, pow(l)));
        }
        model.add_con(
            format!("{prefix}_k_expand_{i}"),
            "expansion",
            expansion,
            Sense::Eq,
            zero,
        );
        let sig_ub = floor_rational(c_i / lambda).max(0);
        let sig = model.add_var(
            block.sig(i),
            VarKind::Integer,
            zero,
            Rational::from_integer(sig_ub),
        );
        let mut cap_row = Vec::new();
        for l in 0..bits {
            let gam = model.add_var(block.gam(i, l), VarKind::Real, zero, c_i);
            let bit = model.var(&block.kap(i, l)).expect("bit exists");
            mccormick_binary(
                model,
                "slice_capacity",
                &format!("{prefix}_gam_{i}_{l}"),
                gam,
                bit,
                &[(sig, lambda)],
                c_i,
            );
            cap_row.push((gam, pow(l)));
        }
        model.add_con(
            format!("{prefix}_slice_cap_{i}"),
            "slice_capacity",
            cap_row,
            Sense::Le,
            c_i,
        );
    }

    // sorting permutation onto ks_0
    for i in 0..m {
        let ks0 = model.add_var(block.ks(0, i), VarKind::Integer, one, kmax_r);
        let mut sum_row = vec![(ks0, -one)];
        for j in 0..m {
            let phi = model.binary(block.phi(i, j));
            let zeta = model.add_var(block.zeta(i, j), VarKind::Real, zero, kmax_r);
            let k_j = model.var(&block.k(j)).expect("k var");
            mccormick_binary(
                model,
                "sorting",
                &format!("{prefix}_zeta_{i}_{j}"),
                zeta,
                phi,
                &[(k_j, one)],
                kmax_r,
            );
            sum_row.push((zeta, one));
        }
        model.add_con(format!("{prefix}_sort_map_{i}"), "sorting", sum_row, Sense::Eq, zero);
    }
    for i in 0..m {
        let row = (0..m).map(|j| (model.var(&block.phi(i, j)).expect("phi"), one)).collect();
        model.add_con(format!("{prefix}_perm_row_{i}"), "sorting", row, Sense::Eq, one);
        let col = (0..m).map(|j| (model.var(&block.phi(j, i)).expect("phi"), one)).collect();
        model.add_con(format!("{prefix}_perm_col_{i}"), "sorting", col, Sense::Eq, one);
    }
    for i in 0..m.saturating_sub(1) {
        let a = model.var(&block.ks(0, i)).expect("ks0");
        let b = model.var(&block.ks(0, i + 1)).expect("ks0");
        model.add_con(
            format!("{prefix}_sorted_{i}"),
            "sorting",
            vec![(a, one), (b, -one)],
            Sense::Le,
            zero,
        );
    }

    // iteration indicators
    for j in 0..iterations {
        let a = model.binary(block.active(j));
        let th = model.binary(block.theta(j));
        model.add_con(
            format!("{prefix}_certify_reached_{j}"),
            "iterations",
            vec![(th, one), (a, -one)],
            Sense::Le,
            zero,
        );
        if j == 0 {
            model.add_con(
                format!("{prefix}_a0"),
                "iterations",
                vec![(a, one)],
                Sense::Eq,
                one,
            );
        } else {
            let prev = model.var(&block.active(j - 1)).expect("a");
            model.add_con(
                format!("{prefix}_a_chain_{j}"),
                "iterations",
                vec![(a, one), (prev, -one)],
                Sense::Le,
                zero,
            );
        }
    }
    let theta_row = (0..iterations)
        .map(|j| (model.var(&block.theta(j)).expect("theta"), one))
        .collect();
    model.add_con(format!("{prefix}_one_certifies"), "certify", theta_row, Sense::Ge, one);

    // evolution steps j -> j+1 (only when a_{j+1} = 1)
    for j in 0..iterations.saturating_sub(1) {
        let gate = model.var(&block.active(j + 1)).expect("a");
        // pivot bits for ks_j_j
        let pivot = model.var(&block.ks(j, j)).expect("ks pivot");
        let mut expansion = vec![(pivot, -one)];
        for l in 0..bits {
            let bit = model.binary(block.pivot_bit(j, l));
            expansion.push((bit, pow(l)));
        }
        model.add_con(
            format!("{prefix}_pivot_expand_{j}"),
            "evolution",
            expansion,
            Sense::Eq,
            zero,
        );
        for i in j + 1..m {
            let next = model.add_var(block.ks(j + 1, i), VarKind::Integer, one, kmax_r);
            let r = model.add_var(block.ratio(j, i), VarKind::Integer, zero, kmax_r);
            let cur = model.var(&block.ks(j, i)).expect("ks");
            // ceiling: sum 2^l xi >= ks_j_i, xi = r * pivot_bit
            let mut ceil_row = Vec::new();
            for l in 0..bits {
                let xi = model.add_var(block.xi(j, i, l), VarKind::Real, zero, kmax_r);
                let bit = model.var(&block.pivot_bit(j, l)).expect("pivot bit");
                mccormick_binary(
                    model,
                    "evolution",
                    &format!("{prefix}_xi_{j}_{i}_{l}"),
                    xi,
                    bit,
                    &[(r, one)],
                    kmax_r,
                );
                ceil_row.push((xi, pow(l)));
            }
            ceil_row.push((cur, -one));
            // gated: holds when the next iteration is reached
            ceil_row.push((gate, -kmax_r));
            model.add_con(
                format!("{prefix}_ceil_{j}_{i}"),
                "evolution",
                ceil_row,
                Sense::Ge,
                -kmax_r,
            );
            // evolution equality ks_{j+1} = ks_j - r, gated both ways
            let big = kmax_r + kmax_r;
            model.add_con(
                format!("{prefix}_evolve_up_{j}_{i}"),
                "evolution",
                vec![(next, one), (cur, -one), (r, one), (gate, big)],
                Sense::Le,
                big,
            );
            model.add_con(
                format!("{prefix}_evolve_dn_{j}_{i}"),
                "evolution",
                vec![(next, one), (cur, -one), (r, one), (gate, -big)],
                Sense::Ge,
                -big,
            );
        }
    }

    // two-base schedulability block per iteration
    let m_r = Rational::from_integer(m as i128);
    let alpha_ub = kmax_r * m_r;
    for j in 0..iterations {
        let theta = model.var(&block.theta(j)).expect("theta");
        for x_side in [true, false] {
            let base =
                model.add_var(if x_side { block.base_x(j) } else { block.base_y(j) },
                    VarKind::Integer, one, kmax_r);
            let mut expansion = vec![(base, -one)];
            for l in 0..bits {
                let bit = model.binary(if x_side { block.chi(j, l) } else { block.psi(j, l) });
                expansion.push((bit, pow(l)));
            }
            model.add_con(
                format!("{prefix}_base_expand_{}_{j}", if x_side { "x" } else { "y" }),
                "sxy_ceiling",
                expansion,
                Sense::Eq,
                zero,
            );
            let rho = model.add_var(block.rho(j, x_side), VarKind::Real, zero, m_r);
            let beta = model.add_var(
                if x_side { block.beta(j, true) } else { block.beta(j, false) },
                VarKind::Integer,
                zero,
                alpha_ub,
            );
            let alpha = model.add_var(block.alpha(j, x_side), VarKind::Real, zero, alpha_ub);
            let iota = model.add_var(block.iota(j, x_side), VarKind::Real, zero, alpha_ub);
            // beta >= base * rho through delta = bit * rho
            let mut beta_row = vec![(beta, one)];
            for l in 0..bits {
                let delta = model.add_var(block.delta(j, x_side, l), VarKind::Real, zero, m_r);
                let bit = model
                    .var(&if x_side { block.chi(j, l) } else { block.psi(j, l) })
                    .expect("base bit");
                mccormick_binary(
                    model,
                    "sxy_ceiling",
                    &format!("{prefix}_d{}_{j}_{l}", if x_side { "x" } else { "y" }),
                    delta,
                    bit,
                    &[(rho, one)],
                    m_r,
                );
                beta_row.push((delta, -pow(l)));
            }
            model.add_con(
                format!("{prefix}_ceil_def_{}_{j}", if x_side { "x" } else { "y" }),
                "sxy_ceiling",
                beta_row,
                Sense::Ge,
                zero,
            );
            // beta = base * alpha through omega = bit * alpha
            let mut alpha_row = vec![(beta, one)];
            for l in 0..bits {
                let omega =
                    model.add_var(block.omega(j, x_side, l), VarKind::Real, zero, alpha_ub);
                let bit = model
                    .var(&if x_side { block.chi(j, l) } else { block.psi(j, l) })
                    .expect("base bit");
                mccormick_binary(
                    model,
                    "sxy_ceiling",
                    &format!("{prefix}_o{}_{j}_{l}", if x_side { "x" } else { "y" }),
                    omega,
                    bit,
                    &[(alpha, one)],
                    alpha_ub,
                );
                alpha_row.push((omega, -pow(l)));
            }
            model.add_con(
                format!("{prefix}_alpha_def_{}_{j}", if x_side { "x" } else { "y" }),
                "sxy_ceiling",
                alpha_row,
                Sense::Eq,
                zero,
            );
            // iota = alpha * theta
            mccormick_binary(
                model,
                "sxy_ceiling",
                &format!("{prefix}_i{}_{j}", if x_side { "x" } else { "y" }),
                iota,
                theta,
                &[(alpha, one)],
                alpha_ub,
            );
        }
        let ix = model.var(&block.iota(j, true)).expect("iota");
        let iy = model.var(&block.iota(j, false)).expect("iota");
        model.add_con(
            format!("{prefix}_condition_{j}"),
            "sxy_ceiling",
            vec![(ix, one), (iy, one)],
            Sense::Le,
            one,
        );

        // per active element: group membership, dyadic exponent, specialized
        // value with its expansion, reciprocal
        let mut rho_x_row =
            vec![(model.var(&block.rho(j, true)).expect("rho"), -one)];
        let mut rho_y_row =
            vec![(model.var(&block.rho(j, false)).expect("rho"), -one)];
        for i in j..m {
            let nu = model.binary(block.nu(j, i));
            let mut onehot = Vec::new();
            for n in 0..bits {
                let eta = model.binary(block.eta(j, i, n));
                onehot.push((eta, one));
            }
            model.add_con(
                format!("{prefix}_eta_onehot_{j}_{i}"),
                "sxy_normalization",
                onehot,
                Sense::Eq,
                one,
            );
            // p = nu * chi_l, q = nu * psi_l
            for l in 0..bits {
                let p = model.add_var(block.pvar(j, i, l), VarKind::Real, zero, one);
                let chi = model.var(&block.chi(j, l)).expect("chi");
                mccormick_binary(
                    model,
                    "sxy_normalization",
                    &format!("{prefix}_p_{j}_{i}_{l}"),
                    p,
                    nu,
                    &[(chi, one)],
                    one,
                );
                let q = model.add_var(block.qvar(j, i, l), VarKind::Real, zero, one);
                let psi = model.var(&block.psi(j, l)).expect("psi");
                mccormick_binary(
                    model,
                    "sxy_normalization",
                    &format!("{prefix}_q_{j}_{i}_{l}"),
                    q,
                    nu,
                    &[(psi, one)],
                    one,
                );
            }
            // s = sum 2^{l+n} f_iln with f = eta_n * h_l, h = p - q + psi
            let s = model.add_var(block.spec(j, i), VarKind::Integer, one, kmax_r);
            let mut s_row = vec![(s, -one)];
            for l in 0..bits {
                let p = model.var(&block.pvar(j, i, l)).expect("p");
                let q = model.var(&block.qvar(j, i, l)).expect("q");
                let psi = model.var(&block.psi(j, l)).expect("psi");
                let h: Vec<(usize, Rational)> = vec![(p, one), (q, -one), (psi, one)];
                for n in 0..bits {
                    let f = model.add_var(block.fvar(j, i, l, n), VarKind::Real, zero, one);
                    let eta = model.var(&block.eta(j, i, n)).expect("eta");
                    mccormick_binary(
                        model,
                        "sxy_normalization",
                        &format!("{prefix}_f_{j}_{i}_{l}_{n}"),
                        f,
                        eta,
                        &h,
                        one,
                    );
                    s_row.push((f, pow(l + n)));
                }
            }
            model.add_con(
                format!("{prefix}_spec_def_{j}_{i}"),
                "sxy_normalization",
                s_row,
                Sense::Eq,
                zero,
            );
            // specialization keeps s below the evolved entry when certifying:
            // ks - s >= -kmax * ((1 - theta) + (1 - z))
            let ks = model.var(&block.ks(j, i)).expect("ks");
            let mut slack = vec![(ks, one), (s, -one), (theta, -kmax_r)];
            let mut slack_rhs = -kmax_r;
            if let Some(z) = admission {
                slack.push((z[i], -kmax_r));
                slack_rhs = slack_rhs + slack_rhs;
            }
            model.add_con(
                format!("{prefix}_spec_slack_{j}_{i}"),
                "sxy_normalization",
                slack,
                Sense::Ge,
                slack_rhs,
            );
            // bits of s
            let mut sb_row = vec![(s, -one)];
            for l in 0..bits {
                let sb = model.binary(block.spec_bit(j, i, l));
                sb_row.push((sb, pow(l)));
            }
            model.add_con(
                format!("{prefix}_spec_expand_{j}_{i}"),
                "sxy_normalization",
                sb_row,
                Sense::Eq,
                zero,
            );
            // reciprocal: sum 2^l u = 1 with u = mu * spec_bit
            let mu = model.add_var(block.mu(j, i), VarKind::Real, zero, one);
            let mut recip_row = Vec::new();
            for l in 0..bits {
                let u = model.add_var(block.uvar(j, i, l), VarKind::Real, zero, one);
                let sb = model.var(&block.spec_bit(j, i, l)).expect("sb");
                mccormick_binary(
                    model,
                    "sxy_reciprocal",
                    &format!("{prefix}_u_{j}_{i}_{l}"),
                    u,
                    sb,
                    &[(mu, one)],
                    one,
                );
                recip_row.push((u, pow(l)));
            }
            match admission {
                Some(z) => {
                    recip_row.push((z[i], -one));
                    model.add_con(
                        format!("{prefix}_recip_{j}_{i}"),
                        "sxy_reciprocal",
                        recip_row,
                        Sense::Eq,
                        zero,
                    );
                }
                None => {
                    model.add_con(
                        format!("{prefix}_recip_{j}_{i}"),
                        "sxy_reciprocal",
                        recip_row,
                        Sense::Eq,
                        one,
                    );
                }
            }
            // v = mu * nu; rho_x = sum v, rho_y = sum (mu - v)
            let v = model.add_var(block.vvar(j, i), VarKind::Real, zero, one);
            mccormick_binary(
                model,
                "sxy_reciprocal",
                &format!("{prefix}_v_{j}_{i}"),
                v,
                nu,
                &[(mu, one)],
                one,
            );
            rho_x_row.push((v, one));
            rho_y_row.push((mu, one));
            rho_y_row.push((v, -one));
        }
        model.add_con(
            format!("{prefix}_rho_x_{j}"),
            "sxy_reciprocal",
            rho_x_row,
            Sense::Eq,
            zero,
        );
        model.add_con(
            format!("{prefix}_rho_y_{j}"),
            "sxy_reciprocal",
            rho_y_row,
            Sense::Eq,
            zero,
        );
    }
    block
}

/// Standalone single-node model with objective `max sum sig_i`.
pub fn build_node_model(
    capacities: &[Rational],
    lambda: Rational,
    k_max: u64,
) -> (MilpModel, NodeBlock) {
    let mut model = MilpModel::new(format!("node_m{}_k{}", capacities.len(), k_max));
    let block = add_node_block(&mut model, "n", capacities, lambda, k_max, None);
    model.objective = (0..block.m)
        .map(|i| (model.var(&block.sig(i)).expect("sig"), Rational::from_integer(1)))
        .collect();
    (model, block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn degenerate_single_child_model() {
        let (model, block) = build_node_model(&[rat(5, 1)], rat(1, 1), 4);
        assert_eq!(block.m, 1);
        assert_eq!(block.iterations, 1);
        // permutation is the 1x1 identity; no evolution variables
        assert!(model.var("n_perm_0_0").is_some());
        assert!(model.var("n_r_0_1").is_none());
        assert!(model.var("n_ks_1_0").is_none());
    }

    #[test]
    fn binary_count_regression() {
        // M = 5 children, k_max = 10 (4 bits): the closed-form count is
        //   kappa 5*4 + perm 25
        //   + per iteration j in 0..4: chi+psi 8, theta 1, active 1,
        //     plus (m - j) * (nu 1 + eta 4 + spec bits 4)
        //   + pivot bits 3*4
        // = 20 + 25 + 4*10 + (5+4+3+2)*9 + 12 = 223
        let (model, _) = build_node_model(&[rat(10, 1); 5], rat(1, 1), 10);
        assert_eq!(model.binary_count(), 223);
    }

    #[test]
    fn block_size_grows_quadratically() {
        // counts are exactly quadratic in the degree: second differences
        // over degrees 2..8 are constant and positive
        let binaries: Vec<i64> = (2..=8)
            .map(|m| {
                let (model, _) = build_node_model(&vec![rat(10, 1); m], rat(1, 1), 10);
                model.binary_count() as i64
            })
            .collect();
        let constraints: Vec<i64> = (2..=8)
            .map(|m| {
                let (model, _) = build_node_model(&vec![rat(10, 1); m], rat(1, 1), 10);
                model.constraints.len() as i64
            })
            .collect();
        for series in [&binaries, &constraints] {
            let second: Vec<i64> =
                series.windows(3).map(|w| w[2] - 2 * w[1] + w[0]).collect();
            assert!(second[0] > 0, "quadratic term must be positive: {series:?}");
            assert!(
                second.windows(2).all(|w| w[0] == w[1]),
                "second differences must be constant: {series:?} -> {second:?}"
            );
        }
    }
}
