//! Dataset and report files, plus synthetic dataset generation.
//!
//! A generated dataset directory holds four files:
//!
//! | file              | contents                                   |
//! |-------------------|--------------------------------------------|
//! | `snapshots.jsonl` | one snapshot per line                      |
//! | `catalog.jsonl`   | one published post per line                |
//! | `truth.csv`       | ground-truth acceptance and rates          |
//! | `manifest.json`   | format version, generator, record counts   |

mod jsonl;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use jsonl::{
    parse_catalog, parse_snapshots, read_catalog, read_snapshots, render_catalog, render_snapshots, write_catalog,
    write_snapshots, CATALOG_FORMAT, SNAPSHOTS_FORMAT,
};
pub use report::{
    format_decimal, parse_report, read_report, render_report, write_report, FieldError, Record, ReportTable,
};

use crate::error::{Error, Result};
use crate::sim::{run_simulation, SimConfig, RNG_ALGORITHM};
use crate::types::{BotId, PostRecord, SnapshotSet};

pub const DATASET_FORMAT: &str = "feedaudit-dataset/1";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const CATALOG_FILE: &str = "catalog.jsonl";
pub const TRUTH_FILE: &str = "truth.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCounts {
    pub snapshots_per_bot: BTreeMap<BotId, u64>,
    pub catalog_size: u64,
}

/// Description written next to every generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: String,
    /// Tool, RNG algorithm and seed, e.g. `feedaudit 0.1.0; rng=…; seed=42`.
    pub generator: String,
    pub time_zone: String,
    pub counts: DatasetCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SimConfig>,
}

impl DatasetManifest {
    pub fn describe(set: &SnapshotSet, catalog: &[PostRecord], generator: String, config: Option<SimConfig>) -> Self {
        let snapshots_per_bot = set
            .bot_ids()
            .map(|b| (b.clone(), set.snapshots(b.as_str()).map_or(0, |s| s.len() as u64)))
            .collect();
        Self {
            format_version: DATASET_FORMAT.to_string(),
            generator,
            time_zone: "UTC".to_string(),
            counts: DatasetCounts {
                snapshots_per_bot,
                catalog_size: catalog.len() as u64,
            },
            config,
        }
    }

    /// Checks the recorded counts against loaded dataset contents.
    pub fn check(&self, set: &SnapshotSet, catalog: &[PostRecord]) -> Result<()> {
        if self.format_version != DATASET_FORMAT {
            return Err(Error::Version {
                path: MANIFEST_FILE.to_string(),
                found: self.format_version.clone(),
                expected: DATASET_FORMAT.to_string(),
            });
        }
        let actual = Self::describe(set, catalog, String::new(), None).counts;
        if actual != self.counts {
            return Err(Error::Validation {
                path: MANIFEST_FILE.to_string(),
                message: format!("counts {:?} disagree with file contents {:?}", self.counts, actual),
            });
        }
        Ok(())
    }
}

pub fn render_manifest(manifest: &DatasetManifest) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    bytes
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_manifest(manifest)).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid {
        path: path.display().to_string(),
        line: e.line(),
        field: "manifest".into(),
        message: e.to_string(),
    })
}

fn generator_string(config: &SimConfig) -> String {
    format!(
        "feedaudit {}; rng={RNG_ALGORITHM}; seed={}",
        env!("CARGO_PKG_VERSION"),
        config.seed
    )
}

/// Simulates `config` and writes the dataset files into `out_dir` (created if needed).
pub fn generate_synthetic(config: &SimConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let out_dir = out_dir.as_ref();
    let output = run_simulation(config)?;
    let set = output.snapshot_set()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_snapshots(&set, out_dir.join(SNAPSHOTS_FILE))?;
    write_catalog(&output.catalog, out_dir.join(CATALOG_FILE))?;
    write_report(&output.truth, out_dir.join(TRUTH_FILE))?;
    let manifest = DatasetManifest::describe(&set, &output.catalog, generator_string(config), Some(config.clone()));
    write_manifest(&manifest, out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::exposure_table;
    use crate::sim::TruthTable;

    fn config() -> SimConfig {
        SimConfig::new(
            [("a", 1.0), ("b", 2.0)],
            [("x", vec![1.0, 0.5]), ("y", vec![0.3, 1.0])],
            3,
            2.0,
            40,
            42,
        )
    }

    #[test]
    fn generated_files_are_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = generate_synthetic(&config(), dir.path()).unwrap();
        let set = read_snapshots(dir.path().join(SNAPSHOTS_FILE)).unwrap();
        let catalog = read_catalog(dir.path().join(CATALOG_FILE)).unwrap();
        manifest.check(&set, &catalog).unwrap();
        assert_eq!(read_manifest(dir.path().join(MANIFEST_FILE)).unwrap(), manifest);
        assert!(manifest.generator.contains(RNG_ALGORITHM));
        assert!(manifest.generator.ends_with("seed=42"));

        // record lines = header + counts
        let lines = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap().lines().count() as u64;
        assert_eq!(
            lines(SNAPSHOTS_FILE) - 1,
            manifest.counts.snapshots_per_bot.values().sum::<u64>()
        );
        assert_eq!(lines(CATALOG_FILE) - 1, manifest.counts.catalog_size);

        let truth: TruthTable = read_report(dir.path().join(TRUTH_FILE)).unwrap();
        assert_eq!(truth.effective_rate("x", "b"), Some(1.0));
    }

    #[test]
    fn metrics_from_files_equal_in_memory_metrics() {
        let dir = tempfile::tempdir().unwrap();
        generate_synthetic(&config(), dir.path()).unwrap();
        let from_files = read_snapshots(dir.path().join(SNAPSHOTS_FILE)).unwrap();
        let in_memory = run_simulation(&config()).unwrap().snapshot_set().unwrap();
        assert_eq!(from_files, in_memory);
        for k in 1..=3 {
            assert_eq!(
                exposure_table(&from_files, k).unwrap(),
                exposure_table(&in_memory, k).unwrap()
            );
        }
    }

    #[test]
    fn sole_publisher_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let c = SimConfig::new([("only", 1.0)], [("bot", vec![1.0])], 2, 1.0, 25, 7);
        generate_synthetic(&c, dir.path()).unwrap();
        let set = read_snapshots(dir.path().join(SNAPSHOTS_FILE)).unwrap();
        assert!(set
            .iter()
            .all(|s| s.entries.iter().all(|e| e.publisher_id.as_str() == "only")));
    }

    #[test]
    fn manifest_detects_count_mismatch() {
        let out = run_simulation(&config()).unwrap();
        let set = out.snapshot_set().unwrap();
        let manifest = DatasetManifest::describe(&set, &out.catalog, "x".into(), None);
        assert!(manifest.check(&set, &out.catalog[1..]).is_err());
    }
}
