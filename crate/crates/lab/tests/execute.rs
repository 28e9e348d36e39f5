use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use collapse_lab::config::parse_config_value;
use collapse_lab::output::{sha256_hex, write_atomic, Table};
use collapse_lab::{execute, LabError, ScenarioConfig};
use serde_json::{json, Value};

fn config(value: Value, dir: &Path) -> ScenarioConfig {
    parse_config_value(value).unwrap().with_output_dir(dir.to_path_buf())
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn small_collapse() -> Value {
    json!({
        "kind": "collapse",
        "master_seed": 42,
        "checkpoints": [0, 1, 2, 4, 8],
        "collapse": {
            "probabilities": [0.3, 0.7],
            "cells": [{ "atoms": 10, "f": [0.5, 0.5] }, { "atoms": 6, "f": [0.2, 0.4] }],
            "t_max": 8.0,
            "trials": 40,
            "covariance": { "steps": 10000 }
        }
    })
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    for value in [small_collapse(), json!({ "kind": "wigner", "master_seed": 7, "wigner": { "n": 64, "samples": 4 } })] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        execute(&config(value.clone(), a.path())).unwrap();
        execute(&config(value, b.path())).unwrap();
        let (x, y) = (csv_files(a.path()), csv_files(b.path()));
        assert!(!x.is_empty());
        assert_eq!(x, y);
    }
}

#[test]
fn seed_override_changes_results_and_hash() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = execute(&config(small_collapse(), a.path())).unwrap();
    let second = execute(&config(small_collapse(), b.path()).with_seed(43)).unwrap();
    assert_ne!(first.manifest.config_sha256, second.manifest.config_sha256);
    assert_eq!(second.manifest.seed, 43);
    assert_ne!(csv_files(a.path())["runs.csv"], csv_files(b.path())["runs.csv"]);
}

#[test]
fn manifest_describes_every_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let run = execute(&config(small_collapse(), dir.path())).unwrap();
    let m = &run.manifest;
    assert_eq!((m.tool.as_str(), m.kind.as_str(), m.seed), ("collapse-lab", "collapse", 42));
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    for expected in ["runs.csv", "checkpoints.csv", "trace.svg", "covariance.csv", "summary.json"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    for f in &m.files {
        let bytes = fs::read(dir.path().join(&f.name)).unwrap();
        assert!(!bytes.is_empty());
        assert_eq!(bytes.len(), f.bytes);
        assert_eq!(sha256_hex(&bytes), f.sha256);
        if f.name.ends_with(".csv") {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            assert!(!r.headers().unwrap().is_empty());
            assert_eq!(r.records().count(), f.rows.unwrap());
        }
    }
    let on_disk: Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk["files"].as_array().unwrap().len(), m.files.len());
    assert_eq!(on_disk["config_sha256"], m.config_sha256.as_str());
    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert!(runs.starts_with("seed,trial,outcome,collapse_time,slip_count\r\n"));
    assert_eq!(runs.lines().count(), 41);
}

#[test]
fn csv_quotes_fields_per_rfc_4180() {
    let mut t = Table::new(["name", "note"]);
    t.push(vec!["a,b".into(), "say \"hi\"".into()]);
    assert_eq!(t.to_csv(), b"name,note\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n");
}

#[test]
fn writes_replace_files_whole_and_leave_no_temporaries() {
    let dir = tempfile::tempdir().unwrap();
    write_atomic(dir.path(), "x.csv", b"old,contents\r\n").unwrap();
    write_atomic(dir.path(), "x.csv", b"new\r\n").unwrap();
    assert_eq!(fs::read(dir.path().join("x.csv")).unwrap(), b"new\r\n");
    execute(&config(small_collapse(), dir.path())).unwrap();
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(".partial-"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let e = execute(&config(json!({ "kind": "timescale", "timescale": {} }), &blocker.join("sub"))).unwrap_err();
    assert!(matches!(e, LabError::Runtime(_)));
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn timescale_reports_formula_and_quoted_value_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let run = execute(&config(json!({ "kind": "timescale", "timescale": {} }), dir.path())).unwrap();
    let text = fs::read_to_string(dir.path().join("timescale.csv")).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][0], "formula");
    let t: f64 = rows[0][1].parse().unwrap();
    assert!((t / 1e-4 - 1.0).abs() < 1e-12);
    assert_eq!(&rows[1][0], "quoted_estimate");
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1e-14);
    assert!(rows[1][2].contains("DISCREPANCY"));
    assert!(run.notes.iter().any(|n| n.contains("DISCREPANCY")));
}

#[test]
fn full_pipeline_feeds_the_front_into_the_collapse_engine() {
    let dir = tempfile::tempdir().unwrap();
    let run = execute(&config(
        json!({
            "kind": "full-pipeline",
            "master_seed": 2,
            "pipeline": {
                "probabilities": [0.4, 0.6],
                "front": { "domain_length": 10.0, "t_final": 4.0, "snapshot_interval": 2.0 },
                "t_max": 20.0,
                "trials": 5
            }
        }),
        dir.path(),
    ))
    .unwrap();
    let names: Vec<&str> = run.manifest.files.iter().map(|f| f.name.as_str()).collect();
    for expected in ["front_front_profile.csv", "collapse_runs.csv", "collapse_checkpoints.csv", "pipeline_cells.csv"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    let cells = fs::read_to_string(dir.path().join("pipeline_cells.csv")).unwrap();
    let mut r = csv::Reader::from_reader(cells.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    // 101 nodes in blocks of 10, the last one a single node
    assert_eq!(rows.len(), 11);
    let entangled: Vec<u64> = rows.iter().map(|row| row[2].parse().unwrap()).collect();
    assert!(entangled[0] > 0, "{entangled:?}");
    assert!(entangled.windows(2).all(|w| w[1] <= w[0] + 1), "{entangled:?}");
    let summary: Value = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["results"]["collapse"]["trials"], 5);
}
