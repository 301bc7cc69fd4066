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

//! Subcommand implementations. Each writes its outputs atomically and
//! embeds a provenance record (tool version and effective config).

use std::path::{Path, PathBuf};

use casimir_core::analysis::{
    dmax_sweep, reconstruct_experiment, spearman, ExperimentResult, MeasuredGradientFile, SweepRow,
};
use casimir_core::dielectric::{SpectrumSample, TabulatedOptics};
use casimir_core::inversion::{fit_forest, grid_search, EvaluationSet, TrainingSet};
use casimir_core::io;
use casimir_core::lifshitz::{
    force_curve, ConstantPermittivity, ImaginaryResponse, MatsubaraSettings, SphereGeometry,
};
use casimir_core::synth::{generate_dataset, gold_drude, split};
use serde::Serialize;
use serde_json::json;

use crate::config::{MaterialConfig, ReferenceConfig, RunConfig};
use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn provenance(command: &str, config: &RunConfig) -> serde_json::Value {
    json!({
        "tool": "casimir",
        "version": VERSION,
        "command": command,
        "config": config,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    Ok(io::write_atomic(path, &io::to_json_pretty(value)?)?)
}

/// `model.json` → `model.meta.json`.
fn meta_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| CliError::Config(format!("paths.{what}: required (config key or flag)")))
}

enum Material {
    Model(casimir_core::dielectric::DielectricModel),
    Table(TabulatedOptics),
    Constant(ConstantPermittivity),
}

impl Material {
    fn from_config(config: &MaterialConfig, unit: crate::config::FrequencyUnit) -> Result<Self> {
        Ok(match config {
            MaterialConfig::Gold => Material::Model(gold_drude()),
            MaterialConfig::Vacuum => Material::Constant(ConstantPermittivity::VACUUM),
            MaterialConfig::Constant { epsilon } => {
                if !(*epsilon >= 1.0 && epsilon.is_finite()) {
                    return Err(CliError::Config(format!(
                        "simulate: constant epsilon must be ≥ 1, got {epsilon}"
                    )));
                }
                Material::Constant(ConstantPermittivity(*epsilon))
            }
            MaterialConfig::DrudeLorentz { drude, oscillators } => Material::Model(
                MaterialConfig::model(unit, drude, oscillators)
                    .map_err(|e| CliError::Config(format!("simulate: {e}")))?,
            ),
            MaterialConfig::Tabulated {
                path,
                low_freq_drude,
            } => {
                let low = low_freq_drude
                    .as_ref()
                    .map(|d| MaterialConfig::drude_params(unit, d))
                    .transpose()
                    .map_err(|e| CliError::Config(format!("simulate.low_freq_drude: {e}")))?;
                Material::Table(io::read_tabulated_optics(path, low)?)
            }
        })
    }

    fn response(&self) -> &dyn ImaginaryResponse {
        match self {
            Material::Model(m) => m,
            Material::Table(t) => t,
            Material::Constant(c) => c,
        }
    }
}

pub fn simulate(config: &RunConfig) -> Result<()> {
    let out = required(&config.paths.out, "out")?;
    let sim = &config.simulate;
    let first = Material::from_config(&sim.first, config.frequency_unit)?;
    let second = Material::from_config(&sim.second, config.frequency_unit)?;
    let separations = sim
        .separations
        .resolve()
        .map_err(|e| CliError::Config(format!("simulate.separations: {e}")))?;
    let geometry = sim
        .sphere_radius_m
        .map(SphereGeometry::new)
        .transpose()
        .map_err(|e| CliError::Config(format!("simulate.sphere_radius_m: {e}")))?;
    let settings = MatsubaraSettings::at_temperature(sim.temperature_k);
    settings
        .validate()
        .map_err(|e| CliError::Config(format!("simulate.temperature_K: {e}")))?;
    log::info!("simulating {} separations", separations.len());
    let curve = force_curve(
        &separations,
        first.response(),
        second.response(),
        settings,
        sim.kind,
        geometry.as_ref(),
    )
    .map_err(|e| match e {
        casimir_core::Error::Input(m) => CliError::Config(format!("simulate: {m}")),
        other => other.into(),
    })?;
    let sidecar = io::CurveSidecar {
        kind: sim.kind,
        temperature_k: sim.temperature_k,
        radius_m: sim.sphere_radius_m,
        provenance: Some(provenance("simulate", config)),
    };
    io::write_curve(out, &curve, &sidecar)?;
    Ok(())
}

pub fn generate(config: &RunConfig) -> Result<()> {
    let out = required(&config.paths.out, "out")?;
    let spec = config.dataset_spec()?;
    log::info!("generating {} samples", spec.n_samples);
    let mut dataset = generate_dataset(&spec)?;
    if config.dataset.validation_fraction > 0.0 {
        dataset = split(dataset, config.dataset.validation_fraction, config.seed)?;
    }
    dataset.check_invariants()?;
    io::write_dataset(out, &dataset)?;
    write_json(&out.join("run.json"), &provenance("generate", config))?;
    Ok(())
}

pub fn train(config: &RunConfig) -> Result<()> {
    let dataset_dir = required(&config.paths.dataset, "dataset")?;
    let out = required(&config.paths.out, "out")?;
    let dataset = io::read_dataset(dataset_dir)?;
    let train = TrainingSet::from_dataset(&dataset)?;
    let grid = config.hyper_grid();
    log::info!(
        "grid search over {} points",
        grid.points(&config.hyper).len()
    );
    let search = grid_search(
        &train,
        &grid,
        &config.hyper,
        config.search.folds,
        config.search.holdout_fraction,
        config.seed,
    )?;
    log::info!("fitting final forest with {:?}", search.best);
    let forest = fit_forest(&train, &search.best, config.seed)?;
    let eval = EvaluationSet::validation(&dataset);
    let scores = if eval.len() >= 2 {
        json!({
            "validation_r2": forest.score(&eval)?,
            "baseline_r2": forest.baseline_score(&eval)?,
            "score_space": forest.metadata.score_space,
        })
    } else {
        serde_json::Value::Null
    };
    let meta = json!({
        "provenance": provenance("train", config),
        "dataset_hash": dataset.spec.hash(),
        "best": search.best,
        "validation": scores,
    });
    io::write_atomic(out, &io::forest_json(&forest)?)?;
    io::write_atomic(
        &out.with_file_name("grid_scores.csv"),
        &io::grid_scores_csv(&search.table)?,
    )?;
    write_json(&meta_path(out), &meta)?;
    Ok(())
}

pub fn reconstruct(config: &RunConfig) -> Result<()> {
    let model = required(&config.paths.model, "model")?;
    let curve_path = required(&config.paths.curve, "curve")?;
    let out = required(&config.paths.out, "out")?;
    let forest = io::read_forest(model)?;
    let (curve, _) = io::read_curve(curve_path)?;
    let spectrum = forest.predict(&curve)?;
    io::write_atomic(out, &io::spectrum_csv(&spectrum)?)?;
    write_json(
        &meta_path(out),
        &json!({
            "provenance": provenance("reconstruct", config),
            "dataset_hash": forest.metadata.dataset_hash,
        }),
    )?;
    Ok(())
}

fn sweep_tables(rows: &[SweepRow]) -> Result<(Vec<u8>, Vec<u8>)> {
    let fig2j = io::csv_bytes(
        &[
            "d_max_m",
            "n_separations",
            "mean_low_freq_abs_error",
            "ci90_lo",
            "ci90_hi",
            "median_low_freq_rel_error",
            "top_decade_eps_imag_mae",
            "validation_r2",
        ],
        rows.iter().map(|r| {
            let e = r.report.mean_low_freq_abs_error;
            let mut row = vec![io::fmt_f64(r.d_max), r.n_separations.to_string()];
            row.extend(
                [
                    e.mean,
                    e.lo,
                    e.hi,
                    r.report.median_low_freq_rel_error,
                    r.report.per_frequency.top_decade_eps_imag(),
                    r.report.validation_r2,
                ]
                .map(io::fmt_f64),
            );
            row
        }),
    )?;
    let per_freq = io::table_csv(
        &["d_max_m", "omega_rad_s", "eps_real_mae", "eps_imag_mae"],
        rows.iter().flat_map(|r| {
            let p = &r.report.per_frequency;
            (0..p.grid.len())
                .map(move |k| vec![r.d_max, p.grid.points()[k], p.eps_real[k], p.eps_imag[k]])
        }),
    )?;
    Ok((fig2j, per_freq))
}

pub fn sweep(config: &RunConfig) -> Result<()> {
    let out = required(&config.paths.out, "out")?;
    let spec = config.sweep_spec()?;
    log::info!("sweeping {} d_max values", spec.d_max.len());
    let rows = dmax_sweep(&spec, &config.hyper)?;
    let (fig2j, per_freq) = sweep_tables(&rows)?;
    let d: Vec<f64> = rows.iter().map(|r| r.d_max).collect();
    let e: Vec<f64> = rows
        .iter()
        .map(|r| r.report.mean_low_freq_abs_error.mean)
        .collect();
    let summary = json!({
        "provenance": provenance("sweep", config),
        "spearman_dmax_low_freq_error": if rows.len() >= 2 { json!(spearman(&d, &e)) } else { serde_json::Value::Null },
    });
    io::write_dir_atomic(out, |dir| {
        std::fs::write(dir.join("fig2j.csv"), &fig2j)?;
        std::fs::write(dir.join("per_freq_error.csv"), &per_freq)?;
        std::fs::write(dir.join("run.json"), io::to_json_pretty(&summary)?)?;
        Ok(())
    })?;
    Ok(())
}

fn experiment_tables(
    result: &ExperimentResult,
    reference: Option<&SpectrumSample>,
) -> Result<Vec<u8>> {
    let s = &result.reconstruction;
    let mut header = vec!["omega_rad_s", "eps_real", "eps_imag"];
    if reference.is_some() {
        header.extend(["eps_real_reference", "eps_imag_reference"]);
    }
    Ok(io::table_csv(
        &header,
        (0..s.grid.len()).map(|k| {
            let mut row = vec![s.grid.points()[k], s.eps_real[k], s.eps_imag[k]];
            if let Some(r) = reference {
                row.extend([r.eps_real[k], r.eps_imag[k]]);
            }
            row
        }),
    )?)
}

pub fn experiment(config: &RunConfig) -> Result<()> {
    let measured = required(&config.paths.measured, "measured")?;
    let out = required(&config.paths.out, "out")?;
    let mut file: MeasuredGradientFile = io::read_measured(measured)?;
    if let Some(sigma) = config.experiment.relative_noise {
        file = file
            .with_relative_noise(sigma, config.experiment.noise_seed)
            .map_err(|e| CliError::Config(format!("experiment.relative_noise: {e}")))?;
    }
    let spec = config.experiment_spec()?;
    let reference = match &config.experiment.reference {
        None => None,
        Some(ReferenceConfig::Gold) => Some(gold_drude().spectrum(&spec.training.grid)?),
        Some(ReferenceConfig::Spectrum { path }) => {
            let s = io::read_spectrum(path)?;
            if s.grid != spec.training.grid {
                return Err(CliError::Input(format!(
                    "{}: reference grid differs from dataset.grid",
                    path.display()
                )));
            }
            Some(s)
        }
    };
    log::info!("reconstructing from {} measured rows", file.rows.len());
    let result = reconstruct_experiment(&file, &spec, &config.hyper, reference.as_ref())?;
    let recon = experiment_tables(&result, reference.as_ref())?;
    let binned = io::curve_csv(&result.binned)?;
    let report = json!({
        "provenance": provenance("experiment", config),
        "training_hash": result.training_hash,
        "validation": result.validation,
        "reference": result.reference,
    });
    io::write_dir_atomic(out, |dir| {
        std::fs::write(dir.join("fig4_recon.csv"), &recon)?;
        std::fs::write(dir.join("binned.csv"), &binned)?;
        std::fs::write(dir.join("report.json"), io::to_json_pretty(&report)?)?;
        Ok(())
    })?;
    Ok(())
}
