//! Model-level checks: tiny-model feasibility matches density feasibility,
//! LP text round-trips through a parser, emission scales, and broken
//! certificates fail in the right family.

use backhaul_core::dsum::{dsum, SolutionBundle};
use backhaul_core::milp::{
    build_global_model, build_node_model, certificate_assignment, check_assignment, emit_lp,
    Sense, VarKind,
};
use backhaul_core::model::{load_tree, two_level_tree, SlaParams};
use backhaul_core::pinwheel::{sxy_feasible, KVector};
use backhaul_core::rational::{rat, Rational};
use std::collections::BTreeMap;
use std::time::Instant;

/// For M = 2, k_max = 1 the only vector is (1,1) with density 2 > 1: no
/// assignment can satisfy the block. Expansion rows pin every binary bit,
/// bounds pin every integer except the ceiling counters and flows, and the
/// envelope rows pin every continuous variable, so enumerating the genuinely
/// free variables is exhaustive.
#[test]
fn tiny_model_infeasible_when_density_exceeds_one() {
    let (model, block) = build_node_model(&[rat(1, 1), rat(1, 1)], rat(1, 1), 1);
    let idx = |name: String| model.var(&name).unwrap_or_else(|| panic!("{name}"));
    let mut feasible = 0;
    for perm in 0..2usize {
        for nu0 in 0..=1i128 {
            for nu1 in 0..=1i128 {
                for bx in 0..=2i128 {
                    for by in 0..=2i128 {
                        for sg0 in 0..=1i128 {
                            for sg1 in 0..=1i128 {
                                let mut a: BTreeMap<usize, Rational> = BTreeMap::new();
                                let mut set = |n: String, v: Rational| {
                                    a.insert(idx(n), v);
                                };
                                let one = rat(1, 1);
                                let zero = rat(0, 1);
                                for i in 0..2 {
                                    set(block.k(i), one);
                                    set(block.kap(i, 0), one);
                                    set(block.ks(0, i), one);
                                    set(block.spec(0, i), one);
                                    set(block.spec_bit(0, i, 0), one);
                                    set(block.mu(0, i), one);
                                    set(block.uvar(0, i, 0), one);
                                    set(block.eta(0, i, 0), one);
                                }
                                set(block.sig(0), rat(sg0, 1));
                                set(block.sig(1), rat(sg1, 1));
                                set(block.gam(0, 0), rat(sg0, 1));
                                set(block.gam(1, 0), rat(sg1, 1));
                                for i in 0..2 {
                                    for j in 0..2 {
                                        let phi = ((i + perm) % 2 == j) as i128;
                                        set(block.phi(i, j), rat(phi, 1));
                                        set(block.zeta(i, j), rat(phi, 1));
                                    }
                                }
                                set(block.active(0), one);
                                set(block.theta(0), one); // forced by sum >= 1
                                set(block.base_x(0), one);
                                set(block.base_y(0), one);
                                set(block.chi(0, 0), one);
                                set(block.psi(0, 0), one);
                                let nux = rat(nu0, 1);
                                let nuy = rat(nu1, 1);
                                set(block.nu(0, 0), nux);
                                set(block.nu(0, 1), nuy);
                                for (i, nu) in [(0usize, nu0), (1, nu1)] {
                                    set(block.pvar(0, i, 0), rat(nu, 1));
                                    set(block.qvar(0, i, 0), rat(nu, 1));
                                    // h = nu*chi + (1-nu)*psi = 1 either way
                                    set(block.fvar(0, i, 0, 0), one);
                                    set(block.vvar(0, i), rat(nu, 1));
                                }
                                let rho_x = rat(nu0 + nu1, 1);
                                let rho_y = rat(2 - nu0 - nu1, 1);
                                set(block.rho(0, true), rho_x);
                                set(block.rho(0, false), rho_y);
                                set(block.beta(0, true), rat(bx, 1));
                                set(block.beta(0, false), rat(by, 1));
                                // x = y = 1 so alpha = beta
                                set(block.alpha(0, true), rat(bx, 1));
                                set(block.alpha(0, false), rat(by, 1));
                                set(block.delta(0, true, 0), rho_x);
                                set(block.delta(0, false, 0), rho_y);
                                set(block.omega(0, true, 0), rat(bx, 1));
                                set(block.omega(0, false, 0), rat(by, 1));
                                set(block.iota(0, true), rat(bx, 1));
                                set(block.iota(0, false), rat(by, 1));
                                let _ = zero;
                                let assignment: backhaul_core::milp::Assignment =
                                    a.into_iter().collect();
                                if check_assignment(&model, &assignment).pass {
                                    feasible += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert_eq!(feasible, 0, "density 2 must leave the block infeasible");
}

/// With k_max = 3 density-feasible pairs exist and the block admits the
/// corresponding assignment.
#[test]
fn tiny_model_feasible_when_density_allows() {
    use backhaul_core::milp::fill_block_for_tests as fill;
    let (model, block) = build_node_model(&[rat(3, 1), rat(3, 1)], rat(1, 1), 3);
    for pair in [[2u64, 2], [2, 3], [3, 3]] {
        let witness = sxy_feasible(&KVector::from_finite(&pair)).expect("density <= 1");
        let mut assignment = std::collections::HashMap::new();
        fill(
            &model,
            &block,
            &mut assignment,
            &pair,
            &[true, true],
            &[1, 1],
            1,
            Some(&witness),
        );
        let report = check_assignment(&model, &assignment);
        assert!(report.pass, "pair {pair:?}: {:?}", report.families);
    }
}

// -------------------------------------------------------------------------
// LP text round trip

#[derive(Default, Debug)]
struct ParsedLp {
    objective_terms: usize,
    constraints: Vec<(String, String, f64, usize)>,
    bounds: usize,
    generals: usize,
    binaries: usize,
}

/// A small LP-format reader: enough structure to confirm the emitted text is
/// a well-formed document with the expected sections and rows.
fn parse_lp(text: &str) -> ParsedLp {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Constraints,
        Bounds,
        Generals,
        Binaries,
        End,
    }
    let mut section = Section::Preamble;
    let mut out = ParsedLp::default();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('\\') || trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "Maximize" | "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Constraints;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Generals" => {
                section = Section::Generals;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "End" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                out.objective_terms +=
                    trimmed.split_whitespace().filter(|t| t.parse::<f64>().is_ok()).count();
            }
            Section::Constraints => {
                let (name, rest) = trimmed.split_once(':').expect("named row");
                let op = if rest.contains("<=") {
                    "<="
                } else if rest.contains(">=") {
                    ">="
                } else {
                    "="
                };
                let (lhs, rhs) = rest.split_once(op).expect("relation");
                let rhs: f64 = rhs.trim().parse().expect("numeric rhs");
                let terms = lhs.split_whitespace().filter(|t| t.parse::<f64>().is_ok()).count();
                out.constraints.push((name.trim().to_string(), op.to_string(), rhs, terms));
            }
            Section::Bounds => out.bounds += 1,
            Section::Generals => out.generals += 1,
            Section::Binaries => out.binaries += 1,
            _ => panic!("unexpected content outside sections: {trimmed}"),
        }
    }
    assert!(section == Section::End, "document must end with End");
    out
}

#[test]
fn emitted_lp_parses_back() {
    let (model, _) = build_node_model(&[rat(10, 1); 5], rat(1, 1), 10);
    let text = emit_lp(&model).unwrap();
    let parsed = parse_lp(&text);
    assert_eq!(parsed.constraints.len(), model.constraints.len());
    assert_eq!(parsed.binaries, model.binary_count());
    assert_eq!(parsed.generals, model.integer_count());
    assert_eq!(
        parsed.bounds,
        model.vars.iter().filter(|v| v.kind != VarKind::Binary).count()
    );
    // spot-check one row's operator against the model
    let sample = &model.constraints[0];
    let found = parsed
        .constraints
        .iter()
        .find(|(name, ..)| name == &sample.name)
        .expect("row present");
    let op = match sample.sense {
        Sense::Le => "<=",
        Sense::Eq => "=",
        Sense::Ge => ">=",
    };
    assert_eq!(found.1, op);
    assert_eq!(found.3, sample.terms.len());
}

#[test]
fn large_model_emits_quickly() {
    let tree = two_level_tree(6, 8, rat(100, 1), rat(10, 1));
    let sla = SlaParams::new(rat(1, 1), 12);
    let gm = build_global_model(&tree, &sla, 12);
    assert!(gm.model.constraints.len() > 10_000);
    let start = Instant::now();
    let text = emit_lp(&gm.model).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0, "emission took {:?}", start.elapsed());
    assert!(text.len() > 100_000);
}

// -------------------------------------------------------------------------
// certificate failures land in the right family

#[test]
fn scrambled_permutation_fails_sorting_family() {
    let tree = two_level_tree(5, 5, rat(18, 1), rat(9, 2));
    let sla = SlaParams::new(rat(1, 1), 10);
    let bundle = dsum(&tree, &sla);
    let (gm, mut assignment) = certificate_assignment(&tree, &sla, &bundle);
    // swap the first two rows of the root's permutation matrix: the mapped
    // sorted vector is no longer nondecreasing (k = 4,4,6,6,6 vs 6 first)
    let root = tree.root();
    let block = gm.blocks[root].as_ref().expect("root block");
    let m = block.m;
    for j in 0..m {
        let a = gm.model.var(&block.phi(0, j)).unwrap();
        let b = gm.model.var(&block.phi(m - 1, j)).unwrap();
        let (va, vb) = (assignment[&a], assignment[&b]);
        assignment.insert(a, vb);
        assignment.insert(b, va);
        let a = gm.model.var(&block.zeta(0, j)).unwrap();
        let b = gm.model.var(&block.zeta(m - 1, j)).unwrap();
        let (va, vb) = (assignment[&a], assignment[&b]);
        assignment.insert(a, vb);
        assignment.insert(b, va);
    }
    let report = check_assignment(&gm.model, &assignment);
    assert!(!report.pass);
    assert!(!report.family_passed("sorting"), "families: {:?}", report.families);
}

#[test]
fn single_ap_optimum_is_admission_gated() {
    let doc = r#"{"root":{"id":"r","children":[
        {"id":"a","capacity_num":2,"flows":1,"flow_capacity_num":1}]}}"#;
    let tree = load_tree(doc).unwrap();
    // tau >= D and c >= lambda: one flow fits and certifies
    let sla = SlaParams::new(rat(1, 1), 3);
    let bundle = dsum(&tree, &sla);
    assert_eq!(bundle.sigma, 1);
    let (gm, assignment) = certificate_assignment(&tree, &sla, &bundle);
    assert!(check_assignment(&gm.model, &assignment).pass);

    // tau < D: claiming sigma = 1 must violate the gated deadline row
    let sla = SlaParams::new(rat(1, 1), 1);
    let honest = dsum(&tree, &sla);
    assert_eq!(honest.sigma, 0);
    let (gm0, a0) = certificate_assignment(&tree, &sla, &honest);
    assert!(check_assignment(&gm0.model, &a0).pass);
    let mut claimed: SolutionBundle = honest.clone();
    claimed.sigma = 1;
    let ap = tree.find("a").unwrap();
    claimed.admissions.insert(ap, 1);
    claimed.link_k[ap] = Some(1);
    let (gm, assignment) = certificate_assignment(&tree, &sla, &claimed);
    let report = check_assignment(&gm.model, &assignment);
    assert!(!report.pass);
    assert!(!report.family_passed("deadline"), "families: {:?}", report.families);

    // rate-infeasible customer link: lambda exceeds the uplink capacity
    let sla = SlaParams::new(rat(2, 1), 4);
    let starved = dsum(&tree, &sla);
    assert_eq!(starved.sigma, 0);
}
