//! Random vector corpus and the head-to-head scheduler comparison.

use super::rng::SplitMix64;
use super::{write_manifest, ManifestEntry};
use crate::pinwheel::{
    density_of, is_schedule, sxy_schedule, verify_schedule, CyclicSchedule, KVector,
};
use crate::rational::{decimal_string, Rational, RatioRepr};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorExperimentConfig {
    pub seed: u64,
    pub m_values: Vec<usize>,
    pub count_per_m: u64,
    /// Density window `(lo, hi]`.
    pub density_lo: RatioRepr,
    pub density_hi: RatioRepr,
    /// Generation stops for a length after this many consecutive rejections.
    pub max_consecutive_failures: u64,
}

impl VectorExperimentConfig {
    pub fn new(seed: u64, m_values: Vec<usize>, count_per_m: u64) -> Self {
        VectorExperimentConfig {
            seed,
            m_values,
            count_per_m,
            density_lo: Rational::new(7, 10).into(),
            density_hi: Rational::new(1, 1).into(),
            max_consecutive_failures: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub m: usize,
    pub vectors: Vec<Vec<u64>>,
    pub truncated: bool,
}

/// Draws unique sorted vectors of length `m` with entries i.i.d. uniform on
/// `[2, 3m - 1]`, keeping those whose density lies in `(lo, hi]`. Stops
/// after `count` uniques or `max_failures` consecutive rejections (a short
/// corpus is a valid outcome).
pub fn gen_random_vectors(
    m: usize,
    count: u64,
    lo: Rational,
    hi: Rational,
    seed: u64,
    max_failures: u64,
) -> GeneratedCorpus {
    assert!(m >= 4, "corpus protocol starts at length 4");
    let mut rng = SplitMix64::new(seed);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut vectors = Vec::new();
    let mut consecutive_failures = 0u64;
    let upper = 3 * m as u64 - 1;
    while (vectors.len() as u64) < count && consecutive_failures < max_failures {
        let mut v: Vec<u64> = (0..m).map(|_| rng.bounded(2, upper)).collect();
        v.sort_unstable();
        let rho = density_of(&v);
        if rho <= lo || rho > hi || !seen.insert(v.clone()) {
            consecutive_failures += 1;
            continue;
        }
        consecutive_failures = 0;
        vectors.push(v);
    }
    let truncated = (vectors.len() as u64) < count;
    GeneratedCorpus { m, vectors, truncated }
}

#[derive(Debug, Clone, Serialize)]
struct VectorVerdict {
    k: Vec<u64>,
    density: RatioRepr,
    sxy: bool,
    is: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<i64>>,
}

/// One aggregated row of the comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsVsSxyRow {
    pub m: usize,
    pub n: u64,
    pub sxy_success: u64,
    pub is_success: u64,
    pub sxy_min_unsched_density: Option<Rational>,
    pub is_min_unsched_density: Option<Rational>,
    pub truncated: bool,
}

fn schedule_slots(pi: &CyclicSchedule) -> Vec<i64> {
    pi.slots().iter().map(|s| s.map(|t| t as i64).unwrap_or(-1)).collect()
}

/// Runs both schedulers over the corpus of every configured length and
/// writes `is_vs_sxy.csv`, per-length verdict artifacts (schedules included
/// for every success) and a manifest into `out_dir`.
pub fn run_is_vs_sxy(
    config: &VectorExperimentConfig,
    out_dir: &Path,
) -> std::io::Result<Vec<IsVsSxyRow>> {
    std::fs::create_dir_all(out_dir)?;
    let lo: Rational = config.density_lo.into();
    let hi: Rational = config.density_hi.into();
    let master = SplitMix64::new(config.seed);
    let mut rows = Vec::new();
    let mut artifact_files = Vec::new();

    let mut m_values = config.m_values.clone();
    m_values.sort_unstable();
    m_values.dedup();
    for m in m_values {
        let mut stream = master.derive(m as u64);
        let corpus = gen_random_vectors(
            m,
            config.count_per_m,
            lo,
            hi,
            stream.next_u64(),
            config.max_consecutive_failures,
        );
        let verdicts: Vec<VectorVerdict> = corpus
            .vectors
            .par_iter()
            .map(|v| {
                let k = KVector::from_finite(v);
                let sxy = sxy_schedule(&k);
                let is = is_schedule(&k);
                let schedule = is.as_ref().map(|(pi, _)| {
                    assert!(verify_schedule(pi, &k).is_valid());
                    schedule_slots(pi)
                });
                VectorVerdict {
                    k: v.clone(),
                    density: density_of(v).into(),
                    sxy: sxy.is_some(),
                    is: is.is_some(),
                    schedule,
                }
            })
            .collect();
        let n = verdicts.len() as u64;
        let sxy_success = verdicts.iter().filter(|v| v.sxy).count() as u64;
        let is_success = verdicts.iter().filter(|v| v.is).count() as u64;
        let min_over = |pred: &dyn Fn(&VectorVerdict) -> bool| {
            verdicts
                .iter()
                .filter(|v| pred(v))
                .map(|v| Rational::from(v.density))
                .min()
        };
        let row = IsVsSxyRow {
            m,
            n,
            sxy_success,
            is_success,
            sxy_min_unsched_density: min_over(&|v| !v.sxy),
            is_min_unsched_density: min_over(&|v| !v.is),
            truncated: corpus.truncated,
        };
        let artifact = out_dir.join(format!("vectors_m{m}.jsonl"));
        let mut file = std::io::BufWriter::new(std::fs::File::create(&artifact)?);
        for v in &verdicts {
            serde_json::to_writer(&mut file, v)?;
            file.write_all(b"\n")?;
        }
        artifact_files.push(artifact.file_name().unwrap().to_string_lossy().into_owned());
        rows.push(row);
    }

    let csv_path = out_dir.join("is_vs_sxy.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(&csv_path)
        .map_err(std::io::Error::other)?;
    w.write_record([
        "m",
        "n",
        "sxy_success",
        "is_success",
        "sxy_min_unsched_density",
        "sxy_min_unsched_num",
        "sxy_min_unsched_den",
        "is_min_unsched_density",
        "is_min_unsched_num",
        "is_min_unsched_den",
        "truncated",
    ])
    .map_err(std::io::Error::other)?;
    for row in &rows {
        let fmt = |d: &Option<Rational>| match d {
            Some(r) => {
                (decimal_string(*r, 6), r.numer().to_string(), r.denom().to_string())
            }
            None => (String::new(), String::new(), String::new()),
        };
        let (sxy_d, sxy_n, sxy_dn) = fmt(&row.sxy_min_unsched_density);
        let (is_d, is_n, is_dn) = fmt(&row.is_min_unsched_density);
        w.write_record([
            row.m.to_string(),
            row.n.to_string(),
            row.sxy_success.to_string(),
            row.is_success.to_string(),
            sxy_d,
            sxy_n,
            sxy_dn,
            is_d,
            is_n,
            is_dn,
            row.truncated.to_string(),
        ])
        .map_err(std::io::Error::other)?;
    }
    w.flush()?;

    write_manifest(
        out_dir,
        &ManifestEntry {
            experiment: "is_vs_sxy".into(),
            seed: config.seed,
            config: serde_json::to_value(config).expect("serializable"),
            rows: rows.len(),
            artifacts: {
                let mut a = vec!["is_vs_sxy.csv".to_string()];
                a.extend(artifact_files);
                a
            },
        },
    )?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn generator_respects_window_and_uniqueness() {
        let corpus = gen_random_vectors(8, 50, rat(7, 10), rat(1, 1), 42, 100_000);
        assert_eq!(corpus.vectors.len(), 50);
        let mut seen = HashSet::new();
        for v in &corpus.vectors {
            assert!(v.windows(2).all(|w| w[0] <= w[1]));
            assert!(v.iter().all(|&x| (2..=23).contains(&x)));
            let rho = density_of(v);
            assert!(rho > rat(7, 10) && rho <= rat(1, 1));
            assert!(seen.insert(v.clone()));
        }
    }

    #[test]
    fn impossible_window_truncates() {
        let corpus = gen_random_vectors(4, 10, rat(99, 100), rat(991, 1000), 1, 2_000);
        assert!(corpus.truncated);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_random_vectors(6, 30, rat(7, 10), rat(1, 1), 7, 100_000);
        let b = gen_random_vectors(6, 30, rat(7, 10), rat(1, 1), 7, 100_000);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn comparison_rows_maintain_containment() {
        let dir = tempfile::tempdir().unwrap();
        let config = VectorExperimentConfig::new(11, vec![5, 6], 60);
        let rows = run_is_vs_sxy(&config, dir.path()).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.is_success >= row.sxy_success);
            assert!(row.n > 0);
        }
        assert!(dir.path().join("is_vs_sxy.csv").exists());
        assert!(dir.path().join("vectors_m5.jsonl").exists());
        assert!(dir.path().join("MANIFEST.json").exists());
    }

    #[test]
    fn csv_bytes_are_reproducible() {
        let config = VectorExperimentConfig::new(5, vec![5], 40);
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_is_vs_sxy(&config, dir_a.path()).unwrap();
        run_is_vs_sxy(&config, dir_b.path()).unwrap();
        let a = std::fs::read(dir_a.path().join("is_vs_sxy.csv")).unwrap();
        let b = std::fs::read(dir_b.path().join("is_vs_sxy.csv")).unwrap();
        assert_eq!(a, b);
    }
}
