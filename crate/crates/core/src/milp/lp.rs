//! Emission of models in the standard LP text format.

use super::{MilpModel, Sense, VarKind};
use crate::rational::{decimal_string, Rational};
use std::collections::HashSet;
use std::fmt::Write;

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("duplicate name '{0}'")]
    NameCollision(String),
}

fn coeff(r: Rational) -> String {
    decimal_string(r, 12)
}

fn append_terms(out: &mut String, terms: &[(usize, Rational)], model: &MilpModel) {
    if terms.is_empty() {
        out.push_str(" 0 zero_pad");
        return;
    }
    for (i, &(var, c)) in terms.iter().enumerate() {
        let mag = coeff(if c < Rational::from_integer(0) { -c } else { c });
        if i == 0 {
            if c < Rational::from_integer(0) {
                write!(out, " -{} {}", mag, model.vars[var].name).unwrap();
            } else {
                write!(out, " {} {}", mag, model.vars[var].name).unwrap();
            }
        } else if c < Rational::from_integer(0) {
            write!(out, " - {} {}", mag, model.vars[var].name).unwrap();
        } else {
            write!(out, " + {} {}", mag, model.vars[var].name).unwrap();
        }
    }
}

/// Renders the model as LP-format text: objective, constraints, bounds and
/// integrality sections. Output is byte-deterministic for a given model.
pub fn emit_lp(model: &MilpModel) -> Result<String, EmitError> {
    let mut seen: HashSet<&str> = HashSet::new();
    for v in &model.vars {
        if !seen.insert(v.name.as_str()) {
            return Err(EmitError::NameCollision(v.name.clone()));
        }
    }
    let mut seen_cons: HashSet<&str> = HashSet::new();
    for c in &model.constraints {
        if !seen_cons.insert(c.name.as_str()) {
            return Err(EmitError::NameCollision(c.name.clone()));
        }
    }

    let mut out = String::new();
    writeln!(out, "\\ {}", model.name).unwrap();
    writeln!(out, "Maximize").unwrap();
    out.push_str(" obj:");
    if model.objective.is_empty() {
        out.push_str(" 0 zero_pad");
    } else {
        append_terms(&mut out, &model.objective, model);
    }
    out.push('\n');
    writeln!(out, "Subject To").unwrap();
    for c in &model.constraints {
        write!(out, " {}:", c.name).unwrap();
        append_terms(&mut out, &c.terms, model);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        writeln!(out, " {} {}", op, coeff(c.rhs)).unwrap();
    }
    writeln!(out, "Bounds").unwrap();
    let mut needs_pad = model.objective.is_empty()
        || model.constraints.iter().any(|c| c.terms.is_empty());
    for v in &model.vars {
        if v.kind == VarKind::Binary {
            continue; // implied 0/1
        }
        writeln!(out, " {} <= {} <= {}", coeff(v.lower), v.name, coeff(v.upper)).unwrap();
    }
    if needs_pad {
        writeln!(out, " zero_pad = 0").unwrap();
        needs_pad = false;
    }
    let _ = needs_pad;
    let generals: Vec<&str> = model
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        writeln!(out, "Generals").unwrap();
        for name in generals {
            writeln!(out, " {name}").unwrap();
        }
    }
    let binaries: Vec<&str> = model
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        writeln!(out, "Binaries").unwrap();
        for name in binaries {
            writeln!(out, " {name}").unwrap();
        }
    }
    writeln!(out, "End").unwrap();
    Ok(out)
}
