// Copyright 2026 The casimir-spectroscopy contributors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use casimir_core::analysis::{random_separations, synthesize_measurement};
use casimir_core::io;
use casimir_core::lifshitz::ForceCurve;
use casimir_core::synth::gold_drude;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = r#"{
    "schema_version": 1,
    "seed": 7,
    "dataset": {
        "n_samples": 30,
        "separations": {"min_m": 4e-8, "max_m": 2e-6, "count": 8},
        "grid": {"min": 1e11, "max": 1e19, "count": 10},
        "validation_fraction": 0.2
    },
    "hyper": {"n_trees": 6, "max_depth": null, "min_samples_leaf": 2,
              "max_features_fraction": 0.5, "bootstrap": true, "n_ensembles": 1},
    "search": {"folds": 2},
    "sweep": {"d_max_m": [2e-6]},
    "experiment": {"n_bins": 6}
}"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = walk(dir)
        .into_iter()
        .map(|p| {
            (
                p.strip_prefix(dir).unwrap().display().to_string(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            files.extend(walk(&p));
        } else {
            files.push(p);
        }
    }
    files
}

fn assert_ok(o: &Output) {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn version_flag() {
    let o = casimir(&["--version"]);
    assert_ok(&o);
    assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn simulate_vacuum_gives_zero_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "simulate": {"first": {"type": "vacuum"}, "second": {"type": "gold"},
            "separations": {"min_m": 1e-7, "max_m": 1e-6, "count": 5}}}"#,
    );
    let out = tmp.path().join("curve.csv");
    assert_ok(&casimir(&[
        "simulate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&out),
    ]));
    let (curve, meta) = io::read_curve(&out).unwrap();
    assert!(curve.values.iter().all(|v| *v == 0.0));
    let prov = meta.provenance.unwrap();
    assert_eq!(prov["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(prov["config"]["simulate"]["first"]["type"], "vacuum");
}

#[test]
fn simulate_gold_is_attractive_and_decaying() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gold.csv");
    assert_ok(&casimir(&["simulate", "-o", path_str(&out)]));
    let (curve, _) = io::read_curve(&out).unwrap();
    assert_eq!(curve.len(), 64);
    assert!(curve.is_attractive_and_decaying());
}

#[test]
fn malformed_table_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("table.csv");
    fs::write(&table, "omega_rad_s,eps_imag\n1e12,1.0\n1e13,oops\n").unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"schema_version": 1, "simulate": {{"first": {{"type": "tabulated", "path": {:?}}},
                "separations": [1e-7, 2e-7]}}}}"#,
            path_str(&table)
        ),
    );
    let out = tmp.path().join("curve.csv");
    let o = casimir(&["simulate", "-c", path_str(&cfg), "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 2);
}

#[test]
fn unknown_config_key_exits_2_naming_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "hyper": {"n_tree": 5}}"#,
    );
    let o = casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&tmp.path().join("d")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_tree"));
}

#[test]
fn invalid_value_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "dataset": {"validation_fraction": 1.5}}"#,
    );
    let o = casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&tmp.path().join("d")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation_fraction"));
}

#[test]
fn generate_is_deterministic_and_worker_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    assert_ok(&casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&a),
    ]));
    let first = snapshot(&a);
    assert_ok(&casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&a),
        "--workers",
        "2",
    ]));
    assert_eq!(first, snapshot(&a));
    let dataset = io::read_dataset(&a).unwrap();
    assert_eq!(dataset.len(), 30);
    assert_eq!(dataset.spec.seed, 7);

    let c = tmp.path().join("c");
    assert_ok(&casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&c),
        "--seed",
        "8",
    ]));
    assert_ne!(
        fs::read(a.join(io::CURVES_FILE)).unwrap(),
        fs::read(c.join(io::CURVES_FILE)).unwrap()
    );
}

#[test]
fn generate_single_sample_smoke() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("one");
    // one sample cannot be split into two non-empty partitions
    let o = casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&out),
        "--samples",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let cfg = write_config(
        tmp.path(),
        &SMALL.replace(
            r#""validation_fraction": 0.2"#,
            r#""validation_fraction": 0"#,
        ),
    );
    assert_ok(&casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&out),
        "--samples",
        "1",
    ]));
    let dataset = io::read_dataset(&out).unwrap();
    assert_eq!(dataset.len(), 1);
    assert!(dataset.check_invariants().is_ok());
}

#[test]
fn train_then_reconstruct_training_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let memorize = SMALL.replace(
        r#""hyper": {"n_trees": 6, "max_depth": null, "min_samples_leaf": 2,
              "max_features_fraction": 0.5, "bootstrap": true, "n_ensembles": 1}"#,
        r#""hyper": {"n_trees": 1, "max_depth": null, "min_samples_leaf": 1,
              "max_features_fraction": 1.0, "bootstrap": false, "n_ensembles": 1}"#,
    );
    assert_ne!(memorize, SMALL);
    let cfg = write_config(tmp.path(), &memorize);
    let data = tmp.path().join("data");
    let model = tmp.path().join("model/forest.json");
    assert_ok(&casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&data),
    ]));
    assert_ok(&casimir(&[
        "train",
        "-c",
        path_str(&cfg),
        "--dataset",
        path_str(&data),
        "-o",
        path_str(&model),
    ]));
    assert!(tmp.path().join("model/grid_scores.csv").exists());
    let meta: serde_json::Value =
        io::read_json(&tmp.path().join("model/forest.meta.json")).unwrap();
    assert_eq!(meta["provenance"]["command"], "train");

    let dataset = io::read_dataset(&data).unwrap();
    let sample = dataset
        .samples
        .iter()
        .zip(&dataset.split)
        .find(|(_, p)| **p == casimir_core::synth::Partition::Train)
        .unwrap()
        .0;
    let curve_path = tmp.path().join("sample.csv");
    let sidecar = io::CurveSidecar {
        kind: sample.curve.kind,
        temperature_k: 300.0,
        radius_m: None,
        provenance: None,
    };
    io::write_curve(&curve_path, &sample.curve, &sidecar).unwrap();
    let spectrum = tmp.path().join("spectrum.csv");
    assert_ok(&casimir(&[
        "reconstruct",
        "-c",
        path_str(&cfg),
        "--model",
        path_str(&model),
        "--curve",
        path_str(&curve_path),
        "-o",
        path_str(&spectrum),
    ]));
    let got = io::read_spectrum(&spectrum).unwrap();
    for (a, b) in got.to_target().iter().zip(sample.spectrum.to_target()) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn reconstruct_rejects_foreign_separations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let data = tmp.path().join("data");
    let model = tmp.path().join("forest.json");
    assert_ok(&casimir(&[
        "generate",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&data),
    ]));
    assert_ok(&casimir(&[
        "train",
        "-c",
        path_str(&cfg),
        "--dataset",
        path_str(&data),
        "-o",
        path_str(&model),
    ]));
    let mut seps = io::read_dataset(&data).unwrap().spec.separations;
    seps[3] *= 1.01;
    let curve = ForceCurve::new(
        seps.clone(),
        seps.iter().map(|d| -1e-27 / d.powi(4)).collect(),
        casimir_core::lifshitz::CurveKind::Pressure,
    )
    .unwrap();
    let curve_path = tmp.path().join("foreign.csv");
    let sidecar = io::CurveSidecar {
        kind: curve.kind,
        temperature_k: 300.0,
        radius_m: None,
        provenance: None,
    };
    io::write_curve(&curve_path, &curve, &sidecar).unwrap();
    let out = tmp.path().join("spectrum.csv");
    let o = casimir(&[
        "reconstruct",
        "--model",
        path_str(&model),
        "--curve",
        path_str(&curve_path),
        "-o",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("separation 3"));
    assert!(!out.exists());
}

#[test]
fn degenerate_sweep_writes_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("sweep");
    assert_ok(&casimir(&[
        "sweep",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&out),
    ]));
    let fig = fs::read_to_string(out.join("fig2j.csv")).unwrap();
    assert_eq!(fig.lines().count(), 2);
    assert!(fig.starts_with("d_max_m,"));
    assert_eq!(
        fs::read_to_string(out.join("per_freq_error.csv"))
            .unwrap()
            .lines()
            .count(),
        11
    );
    let first = snapshot(&out);
    assert_ok(&casimir(&[
        "sweep",
        "-c",
        path_str(&cfg),
        "-o",
        path_str(&out),
    ]));
    assert_eq!(first, snapshot(&out));
}

fn control_file(dir: &Path) -> PathBuf {
    let seps = random_separations(60, 60e-9, 400e-9, 1);
    let file = synthesize_measurement(&gold_drude(), &seps, 37.69e-6, 300.0).unwrap();
    let path = dir.join("measured.csv");
    io::write_measured(&path, &file).unwrap();
    path
}

#[test]
fn experiment_round_trip_and_missing_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &SMALL.replace(
            r#""experiment": {"n_bins": 6}"#,
            r#""experiment": {"n_bins": 6, "reference": {"type": "gold"}}"#,
        ),
    );
    let measured = control_file(tmp.path());
    let out = tmp.path().join("exp");
    assert_ok(&casimir(&[
        "experiment",
        "-c",
        path_str(&cfg),
        "--measured",
        path_str(&measured),
        "-o",
        path_str(&out),
    ]));
    let recon = fs::read_to_string(out.join("fig4_recon.csv")).unwrap();
    assert!(
        recon.starts_with("omega_rad_s,eps_real,eps_imag,eps_real_reference,eps_imag_reference")
    );
    assert_eq!(recon.lines().count(), 11);
    let report: serde_json::Value = io::read_json(&out.join("report.json")).unwrap();
    assert!(report["reference"]["low_freq_abs_error"].as_f64().unwrap() >= 0.0);

    fs::remove_file(io::sidecar_path(&measured)).unwrap();
    let out2 = tmp.path().join("exp2");
    let o = casimir(&[
        "experiment",
        "-c",
        path_str(&cfg),
        "--measured",
        path_str(&measured),
        "-o",
        path_str(&out2),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sidecar"));
    assert!(!out2.exists());
}
