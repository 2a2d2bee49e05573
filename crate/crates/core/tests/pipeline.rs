use std::fs;

use feedaudit::bias::{bias_report, validation_scatter, BootstrapConfig};
use feedaudit::ingest::{self, read_catalog, read_report, read_snapshots, write_report};
use feedaudit::metrics::{exposure_table, occupancy_curves, CurveTable, ExposureTable};
use feedaudit::sim::{SimConfig, TruthTable};
use feedaudit::Error;

fn config() -> SimConfig {
    SimConfig::new(
        [("left", 1.0), ("centre", 2.0), ("right", 1.5)],
        [("a", vec![1.0, 0.5, 0.1]), ("b", vec![0.1, 0.5, 1.0])],
        5,
        1.0,
        3_000,
        2018,
    )
}

#[test]
fn dataset_to_reports() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = ingest::generate_synthetic(&config(), dir.path()).unwrap();
    let set = read_snapshots(dir.path().join(ingest::SNAPSHOTS_FILE)).unwrap();
    let catalog = read_catalog(dir.path().join(ingest::CATALOG_FILE)).unwrap();
    manifest.check(&set, &catalog).unwrap();

    let table = exposure_table(&set, 5).unwrap();
    assert_eq!(table.rows.len(), 6);
    let path = dir.path().join("metrics.csv");
    write_report(&table, &path).unwrap();
    assert_eq!(read_report::<ExposureTable>(&path).unwrap(), table);

    // bot a favours left, bot b favours right
    let truth: TruthTable = read_report(dir.path().join(ingest::TRUTH_FILE)).unwrap();
    let boot = BootstrapConfig {
        replicates: 200,
        ..BootstrapConfig::default()
    };
    let report = bias_report(&set, &catalog, 5, &boot).unwrap();
    assert!(report.get("a", "left").unwrap().ci_low > 0.0);
    assert!(report.get("b", "right").unwrap().ci_low > 0.0);
    assert!(report.get("a", "right").unwrap().ci_high < 0.0);
    assert!(truth.effective_rate("a", "left").unwrap() > truth.effective_rate("a", "right").unwrap());
    for bot in ["a", "b"] {
        let sum: f64 = report
            .rows
            .iter()
            .filter(|r| r.bot_id.as_str() == bot)
            .map(|r| r.bias)
            .sum();
        assert!(sum.abs() < 1e-12);
    }

    // under FIFO the model tracks the measurement closely
    let scatter = validation_scatter(&set, 5).unwrap();
    assert!(scatter.max_abs_deviation() < 0.15, "{}", scatter.max_abs_deviation());

    let curves = occupancy_curves(&set, 5).unwrap();
    let path = dir.path().join("curve.csv");
    write_report(&curves, &path).unwrap();
    assert_eq!(read_report::<CurveTable>(&path).unwrap(), curves);
}

#[test]
fn malformed_snapshot_line_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"bot_id\":\"b\",\"snapshot_time\":\"2018-02-01T00:00:00Z\",\"entries\":[]}\n",
            "{\"bot_id\":\"b\",\"snapshot_time\":\"2018-02-01T01:00:00Z\",\"entries\":",
            "[{\"position\":0,\"post_id\":\"p\",\"publisher_id\":\"j\",\"publication_time\":\"2018-02-01T00:30:00Z\"}]}\n",
        ),
    )
    .unwrap();
    match read_snapshots(&path).unwrap_err() {
        Error::Invalid { line, field, .. } => {
            assert_eq!(line, 2);
            assert_eq!(field, "entries[0].position");
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_snapshots("/nonexistent/snapshots.jsonl").unwrap_err();
    assert!(err.is_io());
    assert!(err.to_string().contains("/nonexistent/snapshots.jsonl"));
}
