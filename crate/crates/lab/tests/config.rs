use std::path::Path;

use collapse_lab::config::{parse_config, parse_config_str, parse_config_value, Block, SourceSpec, DEFAULT_OUTPUT_DIR};
use collapse_lab::{schema, Kind, LabError};
use serde_json::{json, Map, Value};

fn errors(value: Value) -> Vec<String> {
    match parse_config_value(value) {
        Err(LabError::Validation(errs)) => errs,
        Err(e) => panic!("expected validation errors, got {e}"),
        Ok(cfg) => panic!("expected validation errors, parsed {:?}", cfg.kind),
    }
}

#[test]
fn minimal_front_config_fills_documented_defaults() {
    let cfg = parse_config_str(r#"{ "kind": "front", "front": {} }"#).unwrap();
    assert_eq!(cfg.kind, Kind::Front);
    assert_eq!(cfg.master_seed, 0);
    assert_eq!(cfg.output_dir, Path::new(DEFAULT_OUTPUT_DIR));
    assert!(cfg.checkpoints.is_empty());
    let Block::Front(b) = cfg.block else { panic!("front block") };
    assert_eq!((b.mean_free_path, b.mean_free_time), (1.0, 1.0));
    assert!((b.diffusion - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!((b.domain_length, b.dx, b.t_final, b.snapshot_interval), (100.0, 0.1, 50.0, 10.0));
    assert_eq!(b.dt, None);
    assert_eq!((b.geometry.as_str(), b.scheme.as_str(), b.threshold), ("planar", "euler", 0.5));
    assert_eq!(b.sources, vec![SourceSpec { start: 0.0, end: 2.0, channel: 0 }]);
    assert_eq!(b.channel_probs, None);
}

#[test]
fn front_defaults_scale_with_the_mean_free_path() {
    let cfg = parse_config_value(json!({ "kind": "front", "front": { "mean_free_path": 2e-5, "mean_free_time": 1e-10 } })).unwrap();
    let Block::Front(b) = cfg.block else { panic!("front block") };
    let d = 2e-5f64.powi(2) / 6e-10;
    assert!((b.diffusion / d - 1.0).abs() < 1e-12);
    assert!((b.dx / 2e-6 - 1.0).abs() < 1e-12);
    assert!((b.t_final / 5e-9 - 1.0).abs() < 1e-12);
}

#[test]
fn unknown_keys_are_rejected_by_path() {
    let errs = errors(json!({ "kind": "front", "front": { "dxx": 0.1 }, "seed": 3 }));
    assert!(errs.iter().any(|e| e.contains("front.dxx") && e.contains("unknown key")), "{errs:?}");
    assert!(errs.iter().any(|e| e.starts_with("seed") && e.contains("unknown key")), "{errs:?}");
    let nested = errors(json!({
        "kind": "collapse",
        "collapse": { "probabilities": [0.5, 0.5], "cells": [{ "atoms": 4, "f": [0.1, 0.1], "weight": 2 }] }
    }));
    assert!(nested.iter().any(|e| e.contains("collapse.cells[0].weight")), "{nested:?}");
}

#[test]
fn probabilities_off_the_simplex_report_their_sum() {
    let errs = errors(json!({ "kind": "born", "born": { "probabilities": [0.25, 0.5] } }));
    assert_eq!(errs.len(), 1, "{errs:?}");
    assert!(errs[0].contains("born.probabilities") && errs[0].contains("0.75"), "{errs:?}");
    let errs = errors(json!({ "kind": "front", "front": { "channel_probs": [0.5, 0.7] } }));
    assert!(errs.iter().any(|e| e.contains("sum to 1.2")), "{errs:?}");
}

#[test]
fn every_problem_is_reported_at_once() {
    let errs = errors(json!({
        "kind": "collapse",
        "master_seed": -1,
        "checkpoints": [5, 1],
        "collapse": { "probabilities": [0.2, 0.2], "w": 3.0, "tau": -1, "trials": 0, "colour": "red" }
    }));
    for needle in ["master_seed", "checkpoints", "sum to 0.4", "collapse.w", "collapse.tau", "collapse.trials", "collapse.colour"] {
        assert!(errs.iter().any(|e| e.contains(needle)), "missing {needle} in {errs:?}");
    }
}

#[test]
fn blocks_must_match_the_kind() {
    let errs = errors(json!({ "kind": "timescale", "timescale": {}, "wigner": {} }));
    assert!(errs.iter().any(|e| e.starts_with("wigner") && e.contains("does not belong")), "{errs:?}");
    let errs = errors(json!({ "kind": "wigner" }));
    assert!(errs.iter().any(|e| e.contains("missing parameter block")), "{errs:?}");
    let errs = errors(json!({ "kind": "teleport" }));
    assert!(errs.iter().any(|e| e.contains("unknown kind `teleport`")), "{errs:?}");
    let errs = errors(json!({ "front": {} }));
    assert!(errs.iter().any(|e| e.starts_with("kind")), "{errs:?}");
    let errs = errors(json!({ "kind": "wigner", "wigner": {}, "checkpoints": [1.0] }));
    assert!(errs.iter().any(|e| e.contains("not used by kind")), "{errs:?}");
}

#[test]
fn syntax_and_io_failures_are_validation_errors() {
    assert!(matches!(parse_config_str("{ \"kind\": "), Err(LabError::Validation(_))));
    assert!(matches!(parse_config_str("[1, 2]"), Err(LabError::Validation(_))));
    let e = parse_config(Path::new("/nonexistent/config.json")).unwrap_err();
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn checkpoints_may_not_outrun_the_simulation() {
    let errs = errors(json!({
        "kind": "collapse",
        "checkpoints": [1.0, 50.0],
        "collapse": { "probabilities": [0.5, 0.5], "t_max": 10.0 }
    }));
    assert!(errs.iter().any(|e| e.contains("exceeds t_max")), "{errs:?}");
}

#[test]
fn cell_fractions_need_one_entry_per_channel() {
    let errs = errors(json!({
        "kind": "collapse",
        "collapse": { "probabilities": [0.5, 0.5], "cells": [{ "atoms": 4, "f": [0.1, 0.1, 0.1] }, { "atoms": 0, "f": [2.0, 0.0] }] }
    }));
    assert!(errs.iter().any(|e| e.contains("cells[0].f: expected 2 entries")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("cells[1].atoms")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("cells[1].f: values must lie in [0, 1]")), "{errs:?}");
}

#[test]
fn pipeline_replicates_the_source_for_every_channel() {
    let cfg = parse_config_value(json!({ "kind": "full-pipeline", "pipeline": { "probabilities": [0.2, 0.3, 0.5] } })).unwrap();
    let Block::FullPipeline(b) = cfg.block else { panic!("pipeline block") };
    assert_eq!(b.front.channel_probs.as_deref(), Some(&[0.2, 0.3, 0.5][..]));
    let channels: Vec<usize> = b.front.sources.iter().map(|s| s.channel).collect();
    assert_eq!(channels, vec![0, 1, 2]);
    let errs = errors(json!({ "kind": "full-pipeline", "pipeline": { "probabilities": [0.5, 0.5], "front": { "channel_probs": [1.0] } } }));
    assert!(errs.iter().any(|e| e.contains("pipeline.front.channel_probs")), "{errs:?}");
}

fn schema_block_keys(def: &Value) -> Vec<String> {
    def["properties"].as_object().map(|m| m.keys().cloned().collect()).unwrap_or_default()
}

#[test]
fn schema_lists_exactly_the_keys_the_parser_accepts() {
    let s = schema::schema();
    let top: Vec<String> = schema_block_keys(&s);
    for kind in Kind::ALL {
        assert!(top.contains(&kind.block_key().to_string()), "schema lacks {}", kind.block_key());
        assert_eq!(s["properties"][kind.block_key()]["$ref"], format!("#/$defs/{}", kind.block_key()));
    }
    let kinds: Vec<&str> = s["properties"]["kind"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(kinds, Kind::ALL.map(Kind::name));
    for kind in Kind::ALL {
        let def = &s["$defs"][kind.block_key()];
        // every documented default is accepted and reproduces the implicit default
        let mut explicit = Map::new();
        for key in schema_block_keys(def) {
            let prop = &def["properties"][&key];
            let prop = match prop.get("$ref").and_then(Value::as_str) {
                Some(r) => &s["$defs"]["slip"]["properties"][r.rsplit('/').next().unwrap()],
                None => prop,
            };
            if let Some(d) = prop.get("default") {
                explicit.insert(key, d.clone());
            }
        }
        let mut implicit = Map::new();
        for key in def.get("required").and_then(Value::as_array).into_iter().flatten() {
            let k = key.as_str().unwrap();
            let v = json!([0.5, 0.5]);
            assert_eq!(k, "probabilities");
            implicit.insert(k.into(), v.clone());
            explicit.insert(k.into(), v);
        }
        let a = parse_config_value(json!({ "kind": kind.name(), kind.block_key(): implicit })).unwrap();
        let b = parse_config_value(json!({ "kind": kind.name(), kind.block_key(): explicit.clone() })).unwrap();
        assert_eq!(a.block, b.block, "{}", kind.name());
        // and a key the schema does not list is refused
        explicit.insert("not_in_schema".into(), json!(1));
        let errs = errors(json!({ "kind": kind.name(), kind.block_key(): explicit }));
        assert!(errs.iter().any(|e| e.contains("not_in_schema")), "{errs:?}");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut kinds = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        kinds.push(cfg.kind);
    }
    for kind in Kind::ALL {
        assert!(kinds.contains(&kind), "no shipped config for {}", kind.name());
    }
}
