//! Random backhaul trees and the admission-solver experiment.
//!
//! The generator follows the depth-3 protocol: child counts uniform on a
//! degree interval, customer uplinks fixed at 250 Mbps, level-2 and level-1
//! links drawn uniformly from the upper half of 1 Gbps and 4 Gbps caps, and
//! a fixed number of flows spread uniformly over the access points. With a
//! 10 Mbps flow rate everything normalizes to exact packets-per-slot
//! rationals (customer links come out at 25 flows' worth).

use super::rng::SplitMix64;
use super::{write_manifest, ManifestEntry};
use crate::dsum::{bundle_to_json, dsum_with_stats, urr_baseline, SolveStats};
use crate::model::{capacity_bound, NodeData, SlaParams, TreeTopology};
use crate::pinwheel::{verify_schedule, IsSolver, KVector};
use crate::rational::{decimal_string, Rational};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeExperimentConfig {
    pub seed: u64,
    pub trees: u64,
    pub degree_lo: u64,
    pub degree_hi: u64,
    pub flows_total: u64,
    pub lambda_mbps: u64,
    pub customer_mbps: u64,
    pub level2_cap_mbps: u64,
    pub level1_cap_mbps: u64,
    pub taus: Vec<u64>,
    /// Simulated periods per bundle when replay is enabled by the driver.
    pub sim_periods: u64,
}

impl TreeExperimentConfig {
    pub fn new(seed: u64, trees: u64, taus: Vec<u64>) -> Self {
        TreeExperimentConfig {
            seed,
            trees,
            degree_lo: 2,
            degree_hi: 6,
            flows_total: 400,
            lambda_mbps: 10,
            customer_mbps: 250,
            level2_cap_mbps: 1000,
            level1_cap_mbps: 4000,
            taus,
            sim_periods: 5,
        }
    }
}

/// Generates one depth-3 tree from the protocol; fully determined by
/// `(config, tree_seed)`.
pub fn gen_random_tree(config: &TreeExperimentConfig, tree_seed: u64) -> TreeTopology {
    let mut rng = SplitMix64::new(tree_seed);
    let lambda = config.lambda_mbps;
    let cap = |mbps: u64| Rational::new(mbps as i128, lambda as i128);
    let mut nodes = vec![NodeData {
        name: "root".into(),
        parent: None,
        capacity: None,
        level: 0,
        children: Vec::new(),
        flows: 0,
        flow_capacity: None,
    }];
    let n1 = rng.bounded(config.degree_lo, config.degree_hi);
    let mut ap_ids = Vec::new();
    for i in 0..n1 {
        let mid = nodes.len();
        let c1 = rng.bounded(config.level1_cap_mbps / 2, config.level1_cap_mbps);
        nodes.push(NodeData {
            name: format!("m{i}"),
            parent: Some(0),
            capacity: Some(cap(c1)),
            level: 1,
            children: Vec::new(),
            flows: 0,
            flow_capacity: None,
        });
        nodes[0].children.push(mid);
        let n2 = rng.bounded(config.degree_lo, config.degree_hi);
        for j in 0..n2 {
            let ap = nodes.len();
            let c2 = rng.bounded(config.level2_cap_mbps / 2, config.level2_cap_mbps);
            nodes.push(NodeData {
                name: format!("m{i}a{j}"),
                parent: Some(mid),
                capacity: Some(cap(c2)),
                level: 2,
                children: Vec::new(),
                flows: 0,
                flow_capacity: Some(cap(config.customer_mbps)),
            });
            nodes[mid].children.push(ap);
            ap_ids.push(ap);
        }
    }
    for _ in 0..config.flows_total {
        let pick = rng.bounded(0, ap_ids.len() as u64 - 1) as usize;
        nodes[ap_ids[pick]].flows += 1;
    }
    TreeTopology::new(nodes).expect("protocol produces valid trees")
}

#[derive(Debug, Clone)]
pub struct DsumRow {
    pub seed_index: u64,
    pub tau: u64,
    pub sigma_dsum: u64,
    pub sigma_urr: u64,
    pub capacity_bound: u64,
    pub normalized_dsum: Rational,
    pub normalized_urr: Rational,
    pub stats: SolveStats,
}

/// Runs the solver and the round-robin baseline over seeded trees and a
/// deadline sweep. `results.csv` (deterministic) and `timings.csv`
/// (wall-clock, not byte-stable) are written separately so reruns with the
/// same config produce identical result bytes.
pub fn run_dsum_experiment(
    config: &TreeExperimentConfig,
    out_dir: &Path,
) -> std::io::Result<Vec<DsumRow>> {
    std::fs::create_dir_all(out_dir)?;
    let master = SplitMix64::new(config.seed);
    let mut rows = Vec::new();
    let mut artifacts = vec!["results.csv".to_string(), "timings.csv".to_string()];

    for idx in 0..config.trees {
        let tree_seed = master.derive(idx).next_u64();
        let tree = gen_random_tree(config, tree_seed);
        let bound_cache: std::collections::BTreeMap<u64, u64> = Default::default();
        let _ = bound_cache;
        let solver = IsSolver::new();
        for &tau in &config.taus {
            let sla = SlaParams::new(Rational::from_integer(1), tau);
            let (bundle, stats) = dsum_with_stats(&tree, &sla, &solver);
            let urr = urr_baseline(&tree, &sla);
            // every recorded verdict is backed by verifying schedules
            for (id, pi) in bundle.node_schedules.iter().enumerate() {
                if let Some(pi) = pi {
                    let node = tree.node(id);
                    let kv = if node.children.is_empty() {
                        let n = bundle.admissions[&id];
                        KVector::from_finite(&vec![n; n as usize])
                    } else {
                        KVector::from_entries(
                            node.children.iter().map(|&c| bundle.link_k[c]).collect(),
                        )
                    };
                    assert!(verify_schedule(pi, &kv).is_valid());
                }
            }
            let bound = capacity_bound(&tree, sla.lambda);
            let norm = |sigma: u64| {
                if bound == 0 {
                    Rational::from_integer(0)
                } else {
                    Rational::new(sigma as i128, bound as i128)
                }
            };
            let bundle_file = format!("bundle_s{idx}_tau{tau}.json");
            std::fs::write(out_dir.join(&bundle_file), bundle_to_json(&bundle, &tree))?;
            artifacts.push(bundle_file);
            rows.push(DsumRow {
                seed_index: idx,
                tau,
                sigma_dsum: bundle.sigma,
                sigma_urr: urr.sigma,
                capacity_bound: bound,
                normalized_dsum: norm(bundle.sigma),
                normalized_urr: norm(urr.sigma),
                stats,
            });
        }
    }
    rows.sort_by_key(|r| (r.seed_index, r.tau));

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(out_dir.join("results.csv"))
        .map_err(std::io::Error::other)?;
    w.write_record([
        "seed",
        "tau",
        "sigma_dsum",
        "sigma_urr",
        "capacity_bound",
        "normalized_dsum",
        "normalized_dsum_num",
        "normalized_dsum_den",
        "normalized_urr",
        "normalized_urr_num",
        "normalized_urr_den",
    ])
    .map_err(std::io::Error::other)?;
    for r in &rows {
        w.write_record([
            r.seed_index.to_string(),
            r.tau.to_string(),
            r.sigma_dsum.to_string(),
            r.sigma_urr.to_string(),
            r.capacity_bound.to_string(),
            decimal_string(r.normalized_dsum, 6),
            r.normalized_dsum.numer().to_string(),
            r.normalized_dsum.denom().to_string(),
            decimal_string(r.normalized_urr, 6),
            r.normalized_urr.numer().to_string(),
            r.normalized_urr.denom().to_string(),
        ])
        .map_err(std::io::Error::other)?;
    }
    w.flush()?;

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(out_dir.join("timings.csv"))
        .map_err(std::io::Error::other)?;
    w.write_record(["seed", "tau", "solve_ms", "distributed_ms"])
        .map_err(std::io::Error::other)?;
    for r in &rows {
        w.write_record([
            r.seed_index.to_string(),
            r.tau.to_string(),
            format!("{:.3}", r.stats.total_ms),
            format!("{:.3}", r.stats.distributed_ms),
        ])
        .map_err(std::io::Error::other)?;
    }
    w.flush()?;

    write_manifest(
        out_dir,
        &ManifestEntry {
            experiment: "dsum".into(),
            seed: config.seed,
            config: serde_json::to_value(config).expect("serializable"),
            rows: rows.len(),
            artifacts,
        },
    )?;
    Ok(rows)
}
