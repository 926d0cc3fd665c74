//! Mixed-integer linear model construction, LP-format emission and
//! certificate checking.
//!
//! The per-node model linearizes the full inductive-scheduling feasibility
//! check: binary expansions remove bilinear products (every envelope has a
//! binary factor, so the McCormick relaxation is exact), a permutation block
//! sorts the inter-scheduling vector, ratio variables express the ceiling in
//! the evolution step, and per-iteration blocks encode the two-base
//! schedulability condition, gated by an indicator that selects the
//! certifying iteration. The module builds and emits models and checks
//! known-feasible assignments against them; it does not solve.

mod certificate;
mod global;
mod lp;
mod node;

pub use certificate::{certificate_assignment, certify_bundle, check_assignment, mutate_bundle_bump_k, Assignment, CertReport, FamilyResult};
#[doc(hidden)]
pub use certificate::fill_block as fill_block_for_tests;
pub use global::{adm_name, build_global_model, GlobalModel};
pub use node::{add_node_block, build_node_model, NodeBlock};

pub use lp::{emit_lp, EmitError};

use crate::rational::Rational;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Real,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Rational,
    pub upper: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// One linear row: `sum(coeff * var) sense rhs`, tagged with the constraint
/// family it belongs to for reporting.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub family: &'static str,
    pub terms: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Maximization objective.
    pub objective: Vec<(usize, Rational)>,
    index: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel { name: name.into(), ..Default::default() }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: Rational,
        upper: Rational,
    ) -> usize {
        let name = name.into();
        assert!(
            !self.index.contains_key(&name),
            "duplicate variable name '{name}'"
        );
        let idx = self.vars.len();
        self.index.insert(name.clone(), idx);
        self.vars.push(Variable { name, kind, lower, upper });
        idx
    }

    pub fn binary(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, VarKind::Binary, Rational::from_integer(0), Rational::from_integer(1))
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn add_con(
        &mut self,
        name: impl Into<String>,
        family: &'static str,
        terms: Vec<(usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) {
        self.constraints.push(Constraint { name: name.into(), family, terms, sense, rhs });
    }

    pub fn binary_count(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn integer_count(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Integer).count()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExpandError {
    #[error("value {value} exceeds the expansion bound {k_max}")]
    OutOfRange { value: u64, k_max: u64 },
}

/// Number of bits in the expansion of values up to `k_max`.
pub fn expansion_bits(k_max: u64) -> u32 {
    assert!(k_max >= 1);
    k_max.ilog2() + 1
}

/// Little-endian binary expansion of `value`, `floor(log2 k_max) + 1` bits.
pub fn binary_expand(value: u64, k_max: u64) -> Result<Vec<bool>, ExpandError> {
    if value > k_max {
        return Err(ExpandError::OutOfRange { value, k_max });
    }
    let bits = expansion_bits(k_max);
    Ok((0..bits).map(|l| value >> l & 1 == 1).collect())
}

/// Adds the four-inequality envelope pinning `product = factor * scale` for
/// a binary `factor`; exact because the factor is 0/1. `bound` is an upper
/// bound on `scale`.
pub(crate) fn mccormick_binary(
    model: &mut MilpModel,
    family: &'static str,
    name: &str,
    product: usize,
    factor_binary: usize,
    scale: &[(usize, Rational)],
    bound: Rational,
) {
    let one = Rational::from_integer(1);
    // product <= scale
    let mut terms = vec![(product, one)];
    for &(v, c) in scale {
        terms.push((v, -c));
    }
    model.add_con(format!("{name}_le_scale"), family, terms, Sense::Le, Rational::from_integer(0));
    // product <= bound * factor
    model.add_con(
        format!("{name}_le_gate"),
        family,
        vec![(product, one), (factor_binary, -bound)],
        Sense::Le,
        Rational::from_integer(0),
    );
    // product >= scale - bound * (1 - factor)
    let mut terms = vec![(product, one), (factor_binary, -bound)];
    for &(v, c) in scale {
        terms.push((v, -c));
    }
    model.add_con(format!("{name}_ge_active"), family, terms, Sense::Ge, -bound);
    // product >= 0 is carried by the variable bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn binary_expand_examples() {
        assert_eq!(binary_expand(5, 9).unwrap(), vec![true, false, true, false]);
        assert_eq!(binary_expand(0, 9).unwrap(), vec![false, false, false, false]);
        assert_eq!(binary_expand(9, 9).unwrap(), vec![true, false, false, true]);
        assert_eq!(binary_expand(10, 9), Err(ExpandError::OutOfRange { value: 10, k_max: 9 }));
    }

    /// The envelope with a binary factor is exact: for every (bit, value)
    /// pair within bounds, the four rows admit exactly product = bit * value.
    #[test]
    fn envelope_exact_for_binary_factor() {
        for bound in 1..=12i128 {
            for bit in 0..=1i128 {
                for value in 0..=bound {
                    let mut m = MilpModel::new("envelope");
                    let p = m.add_var("p", VarKind::Real, rat(0, 1), rat(bound, 1));
                    let b = m.binary("b");
                    let s = m.add_var("s", VarKind::Integer, rat(0, 1), rat(bound, 1));
                    mccormick_binary(&mut m, "t", "prod", p, b, &[(s, rat(1, 1))], rat(bound, 1));
                    let eval = |product: i128| {
                        let assign = |v: usize| -> Rational {
                            if v == p {
                                rat(product, 1)
                            } else if v == b {
                                rat(bit, 1)
                            } else {
                                rat(value, 1)
                            }
                        };
                        m.constraints.iter().all(|c| {
                            let lhs: Rational =
                                c.terms.iter().map(|&(v, coef)| coef * assign(v)).sum();
                            match c.sense {
                                Sense::Le => lhs <= c.rhs,
                                Sense::Eq => lhs == c.rhs,
                                Sense::Ge => lhs >= c.rhs,
                            }
                        })
                    };
                    // the true product satisfies the envelope...
                    assert!(eval(bit * value));
                    // ...and no other integer value does
                    for wrong in 0..=bound {
                        if wrong != bit * value {
                            assert!(!eval(wrong), "bound {bound} bit {bit} value {value} wrong {wrong}");
                        }
                    }
                }
            }
        }
    }
}
