//! Reproducible experiment harness: seeded corpora, drivers and CSV
//! emission.
//!
//! Identical configurations produce byte-identical result CSVs regardless
//! of worker count: all randomness flows through seeded SplitMix64 streams,
//! parallel work is collected in input order, and wall-clock timings go to
//! a separate file.

mod rng;
mod trees;
mod vectors;

pub use rng::SplitMix64;
pub use trees::{gen_random_tree, run_dsum_experiment, DsumRow, TreeExperimentConfig};
pub use vectors::{
    gen_random_vectors, run_is_vs_sxy, GeneratedCorpus, IsVsSxyRow, VectorExperimentConfig,
};

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub experiment: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub rows: usize,
    pub artifacts: Vec<String>,
}

/// Writes `MANIFEST.json` with seeds, the config echo and the crate version.
pub fn write_manifest(out_dir: &Path, entry: &ManifestEntry) -> std::io::Result<()> {
    let doc = serde_json::json!({
        "experiment": entry.experiment,
        "seed": entry.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "rows": entry.rows,
        "config": entry.config,
        "artifacts": entry.artifacts,
    });
    std::fs::write(
        out_dir.join("MANIFEST.json"),
        serde_json::to_string_pretty(&doc).expect("serializable"),
    )
}
