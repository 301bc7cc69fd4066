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

//! Randomized invariant checks, each over at least `CASES` draws. Shared by
//! the property test target and the acceptance suite.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use casimir_core::analysis::{dmax_sweep, per_frequency_error, SampleMetrics, SweepSpec};
use casimir_core::dielectric::{
    DielectricModel, DrudeParams, FrequencyGrid, LorentzOscillator, SpectrumSample, TabulatedOptics,
};
use casimir_core::inversion::{
    fit_forest, r2_score, EvaluationSet, Forest, Hyperparams, Matrix, TrainingSet,
};
use casimir_core::io;
use casimir_core::lifshitz::{
    free_energy_per_area, ideal_metal_energy, ideal_metal_pressure, pressure, uniform_separations,
    ConstantPermittivity, CurveKind, ForceCurve, MatsubaraSettings, PlatePair,
};
use casimir_core::synth::{
    generate_dataset, gold_drude, sample_model, sample_rng, split, Dataset, DatasetSpec, Partition,
    Sample, SamplingRanges,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: usize = 100;

pub type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        (
            "imaginary-axis permittivity decreases",
            imaginary_axis_decreases,
        ),
        ("real-axis absorption is non-negative", passive_on_real_axis),
        (
            "continuation agrees with closed forms",
            continuation_consistency,
        ),
        (
            "imaginary-axis permittivity tends to 1 from above",
            high_frequency_limit,
        ),
        ("pressure magnitude decays with separation", pressure_decays),
        ("identical materials attract", identical_materials_attract),
        (
            "energy derivative matches pressure",
            energy_pressure_consistency,
        ),
        ("ideal-metal limits", ideal_metal_limits),
        ("pressure bounded by ideal metal", bounded_by_ideal_metal),
        ("pressure symmetric in materials", material_symmetry),
        (
            "pressure stable under tighter quadrature",
            quadrature_convergence,
        ),
        ("generated spectra are passive", generated_spectra_passive),
        (
            "generated curves attract and decay",
            generated_curves_attract,
        ),
        ("dataset files round-trip byte for byte", dataset_round_trip),
        (
            "plasma frequency draws are log-uniform",
            plasma_frequency_log_uniform,
        ),
        ("forest prediction is the mean over trees", ensemble_mean),
        (
            "removing and re-adding a tree is exact",
            tree_removal_round_trip,
        ),
        ("signed-log transform round-trips", transform_round_trip),
        ("training row order is irrelevant", permutation_invariance),
        ("memorizing tree has train R² of 1", overfit_sanity),
        ("forest beats the mean predictor", generalization_direction),
        (
            "error metrics are non-negative, zero iff equal",
            metrics_zero_iff_equal,
        ),
        (
            "sweeps are reproducible and restriction-consistent",
            sweep_consistency,
        ),
    ]
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

/// A passive model with parameters spread well beyond the training ranges.
fn random_model(rng: &mut impl Rng) -> DielectricModel {
    let drude = rng.random_bool(0.7).then(|| {
        DrudeParams::new(log_uniform(rng, 14.0, 17.0), log_uniform(rng, 12.0, 15.0)).unwrap()
    });
    let count = if drude.is_some() {
        rng.random_range(0..=3)
    } else {
        rng.random_range(1..=3)
    };
    let oscillators = (0..count)
        .map(|_| {
            LorentzOscillator::new(
                log_uniform(rng, 14.0, 17.0),
                log_uniform(rng, 13.0, 18.0),
                log_uniform(rng, 12.0, 16.0),
            )
            .unwrap()
        })
        .collect();
    DielectricModel::new(drude, oscillators).unwrap()
}

fn settings() -> MatsubaraSettings {
    MatsubaraSettings::default()
}

pub fn imaginary_axis_decreases() -> Result<(), String> {
    let mut rng = rng(1);
    for _ in 0..CASES {
        let m = random_model(&mut rng);
        let x1 = log_uniform(&mut rng, 10.0, 19.0);
        let x2 = x1 * log_uniform(&mut rng, 0.001, 2.0);
        let (e1, e2) = (m.eval_imag(x1).unwrap(), m.eval_imag(x2).unwrap());
        ensure!(
            e2 < e1,
            "{m:?}: ε(i{x2:e}) = {e2} not below ε(i{x1:e}) = {e1}"
        );
    }
    Ok(())
}

pub fn passive_on_real_axis() -> Result<(), String> {
    let mut rng = rng(2);
    for _ in 0..CASES {
        let m = random_model(&mut rng);
        for _ in 0..20 {
            let w = log_uniform(&mut rng, 9.0, 21.0);
            let e = m.eval_real(w).unwrap();
            ensure!(e.im >= 0.0, "{m:?}: ε″({w:e}) = {}", e.im);
        }
    }
    Ok(())
}

/// Log grid refined to γ/20 over ±50γ around each resonance.
fn dense_table(m: &DielectricModel) -> TabulatedOptics {
    let (lo, hi) = (1e11, 1e19);
    let mut points = FrequencyGrid::log_spaced(lo, hi, 2000)
        .unwrap()
        .points()
        .to_vec();
    for osc in &m.oscillators {
        for j in -1000..=1000 {
            let w = osc.resonance + f64::from(j) * osc.damping / 20.0;
            if w > lo && w < hi {
                points.push(w);
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    TabulatedOptics::from_model(m, points).unwrap()
}

pub fn continuation_consistency() -> Result<(), String> {
    let mut rng = rng(3);
    let xi_grid = FrequencyGrid::default();
    for case in 0..CASES {
        // alternate pure Drude and pure Lorentz
        let m = if case % 2 == 0 {
            DielectricModel::drude(
                log_uniform(&mut rng, 15.0, 16.5),
                log_uniform(&mut rng, 13.0, 14.5),
            )
            .unwrap()
        } else {
            let osc = LorentzOscillator::new(
                log_uniform(&mut rng, 14.5, 16.5),
                log_uniform(&mut rng, 14.5, 17.0),
                log_uniform(&mut rng, 13.5, 15.5),
            )
            .unwrap();
            DielectricModel::new(None, vec![osc]).unwrap()
        };
        let table = dense_table(&m);
        for &xi in xi_grid.points() {
            let kk = table.kk_continuation(xi).unwrap();
            let exact = m.eval_imag(xi).unwrap();
            ensure!(
                (kk / exact - 1.0).abs() <= 1e-3,
                "{m:?} at ξ = {xi:e}: {kk} vs {exact}"
            );
        }
    }
    Ok(())
}

pub fn high_frequency_limit() -> Result<(), String> {
    let mut rng = rng(4);
    for _ in 0..CASES {
        let m = random_model(&mut rng);
        let mut prev = f64::INFINITY;
        for k in 15..=30 {
            let e = m.eval_imag(10f64.powi(k)).unwrap();
            ensure!(e >= 1.0 && e <= prev, "{m:?}: ε(i1e{k}) = {e}");
            prev = e;
        }
        ensure!(prev - 1.0 < 1e-20, "{m:?}: ε(i1e30) − 1 = {}", prev - 1.0);
    }
    Ok(())
}

pub fn pressure_decays() -> Result<(), String> {
    let mut rng = rng(5);
    for _ in 0..CASES {
        let (a, b) = (random_model(&mut rng), random_model(&mut rng));
        let mut pair = PlatePair::new(&a, &b, settings()).unwrap();
        let d1 = log_uniform(&mut rng, -8.0, -5.5);
        let d2 = d1 * log_uniform(&mut rng, 0.01, 1.0);
        let (p1, p2) = (pair.pressure(d1).unwrap(), pair.pressure(d2).unwrap());
        ensure!(
            p2.abs() < p1.abs(),
            "{a:?} / {b:?}: |P({d2:e})| = {} ≥ |P({d1:e})| = {}",
            p2.abs(),
            p1.abs()
        );
    }
    Ok(())
}

pub fn identical_materials_attract() -> Result<(), String> {
    let mut rng = rng(6);
    for _ in 0..CASES {
        let m = random_model(&mut rng);
        let d = log_uniform(&mut rng, -8.0, -5.0);
        let s = MatsubaraSettings::at_temperature(rng.random_range(1.0..600.0));
        let p = pressure(d, &m, &m, s).unwrap();
        let f = free_energy_per_area(d, &m, &m, s).unwrap();
        ensure!(
            p < 0.0 && f < 0.0,
            "{m:?} at d = {d:e}, T = {}: P = {p}, F = {f}",
            s.temperature
        );
    }
    Ok(())
}

pub fn energy_pressure_consistency() -> Result<(), String> {
    let gold = gold_drude();
    for d in [60e-9, 100e-9, 1e-6] {
        let mut pair = PlatePair::new(&gold, &gold, settings()).unwrap();
        let h = d * 1e-3;
        let fd = -(pair.free_energy(d + h).unwrap() - pair.free_energy(d - h).unwrap()) / (2.0 * h);
        let p = pair.pressure(d).unwrap();
        ensure!(
            (fd / p - 1.0).abs() < 5e-3,
            "d = {d:e}: −dF/dd = {fd}, P = {p}"
        );
    }
    Ok(())
}

pub fn ideal_metal_limits() -> Result<(), String> {
    let metal = ConstantPermittivity(1e10);
    let s = MatsubaraSettings::at_temperature(1.0);
    let d = 100e-9;
    let p = pressure(d, &metal, &metal, s).unwrap();
    let f = free_energy_per_area(d, &metal, &metal, s).unwrap();
    ensure!((p / ideal_metal_pressure(d) - 1.0).abs() < 0.02, "P = {p}");
    ensure!((f / ideal_metal_energy(d) - 1.0).abs() < 0.02, "F = {f}");
    Ok(())
}

pub fn bounded_by_ideal_metal() -> Result<(), String> {
    let mut rng = rng(7);
    let metal = ConstantPermittivity(1e10);
    for _ in 0..CASES {
        let (a, b) = (random_model(&mut rng), random_model(&mut rng));
        let d = log_uniform(&mut rng, -8.0, -5.3);
        let s = MatsubaraSettings::at_temperature(rng.random_range(1.0..600.0));
        let p = pressure(d, &a, &b, s).unwrap();
        let ideal = pressure(d, &metal, &metal, s).unwrap();
        ensure!(
            p.abs() <= ideal.abs(),
            "{a:?} / {b:?} at d = {d:e}: |P| = {} > {}",
            p.abs(),
            ideal.abs()
        );
    }
    Ok(())
}

pub fn material_symmetry() -> Result<(), String> {
    let mut rng = rng(8);
    for _ in 0..CASES {
        let (a, b) = (random_model(&mut rng), random_model(&mut rng));
        let d = log_uniform(&mut rng, -8.0, -5.3);
        let ab = pressure(d, &a, &b, settings()).unwrap();
        let ba = pressure(d, &b, &a, settings()).unwrap();
        ensure!(ab.to_bits() == ba.to_bits(), "{a:?} / {b:?}: {ab} ≠ {ba}");
    }
    Ok(())
}

pub fn quadrature_convergence() -> Result<(), String> {
    let mut rng = rng(9);
    for _ in 0..CASES {
        let (a, b) = (random_model(&mut rng), random_model(&mut rng));
        let d = log_uniform(&mut rng, -8.0, -5.3);
        let coarse = settings();
        let fine = MatsubaraSettings {
            quadrature_tolerance: coarse.quadrature_tolerance / 2.0,
            ..coarse
        };
        let p1 = pressure(d, &a, &b, coarse).unwrap();
        let p2 = pressure(d, &a, &b, fine).unwrap();
        ensure!(
            ((p1 - p2) / p2).abs() < coarse.quadrature_tolerance,
            "{a:?} / {b:?} at d = {d:e}: {p1} vs {p2}"
        );
    }
    Ok(())
}

fn lorentz_spec(n: usize, seed: u64) -> DatasetSpec {
    DatasetSpec {
        n_samples: n,
        separations: uniform_separations(40e-9, 5e-6, 6).unwrap(),
        ranges: SamplingRanges::drude_lorentz(),
        seed,
        ..DatasetSpec::default()
    }
}

pub fn generated_spectra_passive() -> Result<(), String> {
    let data = generate_dataset(&lorentz_spec(CASES, 11)).unwrap();
    for s in &data.samples {
        ensure!(s.spectrum.is_passive(), "sample {} has negative ε″", s.id);
    }
    Ok(())
}

pub fn generated_curves_attract() -> Result<(), String> {
    let data = generate_dataset(&lorentz_spec(CASES, 12)).unwrap();
    for s in &data.samples {
        ensure!(
            s.curve.is_attractive_and_decaying(),
            "sample {}: {:?}",
            s.id,
            s.curve.values
        );
    }
    Ok(())
}

pub fn dataset_round_trip() -> Result<(), String> {
    let tmp = tempfile::tempdir().unwrap();
    for case in 0..CASES as u64 {
        let spec = DatasetSpec {
            n_samples: 4,
            separations: uniform_separations(50e-9, 1e-6, 3).unwrap(),
            grid: FrequencyGrid::log_spaced(1e11, 1e19, 5).unwrap(),
            ranges: SamplingRanges::drude_lorentz(),
            seed: case,
            ..DatasetSpec::default()
        };
        let data = split(generate_dataset(&spec).unwrap(), 0.5, case).unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        io::write_dataset(&a, &data).unwrap();
        let back = io::read_dataset(&a).map_err(|e| e.to_string())?;
        io::write_dataset(&b, &back).unwrap();
        for f in [
            io::SPEC_FILE,
            io::SPECTRA_FILE,
            io::CURVES_FILE,
            io::SPLIT_FILE,
            io::MODELS_FILE,
        ] {
            ensure!(
                std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap(),
                "seed {case}: {f} differs"
            );
        }
    }
    Ok(())
}

pub fn plasma_frequency_log_uniform() -> Result<(), String> {
    let ranges = SamplingRanges::drude_only();
    let n = 2000;
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let m = sample_model(&mut sample_rng(3, i), &ranges).unwrap();
            let r = ranges.log10_plasma_frequency;
            (m.drude.unwrap().plasma_frequency.log10() - r.min) / (r.max - r.min)
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let ks = u
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).max(x - i as f64 / n as f64))
        .fold(0.0, f64::max);
    ensure!(ks < 0.05, "KS statistic {ks}");
    Ok(())
}

/// Random non-physical dataset with distinct feature rows.
fn random_dataset(rng: &mut impl Rng, n: usize, features: usize, grid_len: usize) -> Dataset {
    let grid = FrequencyGrid::log_spaced(1e12, 1e15, grid_len).unwrap();
    let separations: Vec<f64> = (1..=features).map(|k| k as f64 * 1e-7).collect();
    let model = DielectricModel::drude(1e16, 1e14).unwrap();
    let samples = (0..n)
        .map(|i| Sample {
            id: i as u64,
            model: model.clone(),
            spectrum: SpectrumSample::new(
                grid.clone(),
                (0..grid_len).map(|_| rng.random_range(-1e4..1e4)).collect(),
                (0..grid_len).map(|_| rng.random_range(0.0..1e3)).collect(),
            )
            .unwrap(),
            curve: ForceCurve::new(
                separations.clone(),
                (0..features)
                    .map(|_| -log_uniform(rng, -6.0, 2.0))
                    .collect(),
                CurveKind::Pressure,
            )
            .unwrap(),
        })
        .collect();
    let spec = DatasetSpec {
        n_samples: n,
        separations,
        grid,
        ..DatasetSpec::default()
    };
    Dataset {
        spec,
        samples,
        split: vec![Partition::Train; n],
    }
}

fn small_hyper(rng: &mut impl Rng) -> Hyperparams {
    Hyperparams {
        n_trees: rng.random_range(1..=4),
        max_depth: if rng.random_bool(0.5) {
            None
        } else {
            Some(rng.random_range(1..6))
        },
        min_samples_leaf: rng.random_range(1..=3),
        max_features_fraction: rng.random_range(0.2..=1.0),
        bootstrap: rng.random_bool(0.5),
        n_ensembles: rng.random_range(1..=3),
    }
}

fn independent_mean(forest: &Forest, z: &[f64]) -> Vec<f64> {
    let width = forest.training_targets.cols();
    let trees: Vec<_> = forest.ensembles.iter().flatten().collect();
    let mut out = vec![0.0; width];
    for t in &trees {
        let rows = t.leaf_for(z);
        for &r in rows {
            for (o, v) in out.iter_mut().zip(forest.training_targets.row(r as usize)) {
                *o += v / rows.len() as f64 / trees.len() as f64;
            }
        }
    }
    out
}

pub fn ensemble_mean() -> Result<(), String> {
    let mut rng = rng(13);
    for case in 0..CASES {
        let n = rng.random_range(4..20);
        let data = random_dataset(&mut rng, n, 3, 2);
        let mut hyper = small_hyper(&mut rng);
        hyper.n_trees = rng.random_range(1..=4);
        let forest = fit_forest(
            &TrainingSet::from_dataset(&data).unwrap(),
            &hyper,
            case as u64,
        )
        .unwrap();
        let curve = &data.samples[rng.random_range(0..data.len())].curve;
        let z = forest.feature_transform.forward(&curve.values);
        let got = forest.predict_transformed(&z);
        let want = independent_mean(&forest, &z);
        for (g, w) in got.iter().zip(&want) {
            ensure!(
                (g - w).abs() <= 1e-12 * (1.0 + w.abs()),
                "case {case}: {g} vs {w}"
            );
        }
    }
    Ok(())
}

pub fn tree_removal_round_trip() -> Result<(), String> {
    let mut rng = rng(14);
    for case in 0..CASES {
        let data = random_dataset(&mut rng, 10, 3, 2);
        let forest = fit_forest(
            &TrainingSet::from_dataset(&data).unwrap(),
            &small_hyper(&mut rng),
            case as u64,
        )
        .unwrap();
        let mut edited = forest.clone();
        let member = rng.random_range(0..edited.ensembles.len());
        let tree = edited.ensembles[member].pop().unwrap();
        edited.ensembles[member].push(tree);
        for s in &data.samples {
            let a = forest.predict_target(&s.curve).unwrap();
            let b = edited.predict_target(&s.curve).unwrap();
            ensure!(
                a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()),
                "case {case}: predictions moved"
            );
        }
    }
    Ok(())
}

pub fn transform_round_trip() -> Result<(), String> {
    let mut rng = rng(15);
    for _ in 0..CASES {
        let data = random_dataset(&mut rng, 8, 2, 3);
        let forest = fit_forest(
            &TrainingSet::from_dataset(&data).unwrap(),
            &Hyperparams {
                n_trees: 1,
                n_ensembles: 1,
                ..Hyperparams::default()
            },
            0,
        )
        .unwrap();
        let t = &forest.target_transform;
        let y: Vec<f64> = (0..t.width())
            .map(|_| {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                sign * log_uniform(&mut rng, -250.0, 250.0)
            })
            .collect();
        let back = t.inverse(&t.forward(&y));
        for (a, b) in back.iter().zip(&y) {
            ensure!((a - b).abs() <= 1e-12 * b.abs(), "{b} → {a}");
        }
    }
    Ok(())
}

pub fn permutation_invariance() -> Result<(), String> {
    let mut rng = rng(16);
    for case in 0..CASES {
        let n = rng.random_range(3..15);
        let data = random_dataset(&mut rng, n, 3, 2);
        let hyper = small_hyper(&mut rng);
        let reference = fit_forest(
            &TrainingSet::from_dataset(&data).unwrap(),
            &hyper,
            case as u64,
        )
        .unwrap();
        let mut shuffled = data.clone();
        shuffled.samples.shuffle(&mut rng);
        let forest = fit_forest(
            &TrainingSet::from_dataset(&shuffled).unwrap(),
            &hyper,
            case as u64,
        )
        .unwrap();
        ensure!(
            serde_json::to_string(&forest).unwrap() == serde_json::to_string(&reference).unwrap(),
            "case {case}: shuffled rows changed the forest"
        );
    }
    Ok(())
}

pub fn overfit_sanity() -> Result<(), String> {
    let mut rng = rng(17);
    let hyper = Hyperparams {
        n_trees: 1,
        max_depth: None,
        min_samples_leaf: 1,
        max_features_fraction: rng.random_range(0.2..=1.0),
        bootstrap: false,
        n_ensembles: 1,
    };
    for case in 0..CASES {
        let (n, features) = (rng.random_range(2..30), rng.random_range(1..5));
        let data = random_dataset(&mut rng, n, features, 3);
        let train = TrainingSet::from_dataset(&data).unwrap();
        let forest = fit_forest(&train, &hyper, case as u64).unwrap();
        let pred: Vec<Vec<f64>> = data
            .samples
            .iter()
            .map(|s| forest.predict_target(&s.curve).unwrap())
            .collect();
        let truth: Vec<Vec<f64>> = data
            .samples
            .iter()
            .map(|s| forest.target_transform.forward(&s.spectrum.to_target()))
            .collect();
        let r2 = r2_score(
            &Matrix::from_rows(&pred).unwrap(),
            &Matrix::from_rows(&truth).unwrap(),
        )
        .unwrap();
        ensure!((r2 - 1.0).abs() < 1e-12, "case {case}: train R² = {r2}");
    }
    Ok(())
}

pub fn generalization_direction() -> Result<(), String> {
    let spec = DatasetSpec {
        n_samples: 400,
        separations: uniform_separations(40e-9, 5e-6, 24).unwrap(),
        ..DatasetSpec::default()
    };
    let data = split(generate_dataset(&spec).unwrap(), 0.2, spec.seed).unwrap();
    let forest = fit_forest(
        &TrainingSet::from_dataset(&data).unwrap(),
        &Hyperparams::default(),
        spec.seed,
    )
    .unwrap();
    let eval = EvaluationSet::validation(&data);
    let (r2, base) = (
        forest.score(&eval).unwrap(),
        forest.baseline_score(&eval).unwrap(),
    );
    ensure!(
        r2 > base,
        "validation R² {r2} does not beat baseline {base}"
    );
    Ok(())
}

pub fn metrics_zero_iff_equal() -> Result<(), String> {
    let mut rng = rng(18);
    let grid = FrequencyGrid::log_spaced(1e11, 1e19, 6).unwrap();
    for _ in 0..CASES {
        let spectrum = |rng: &mut ChaCha8Rng| {
            SpectrumSample::new(
                grid.clone(),
                (0..6).map(|_| rng.random_range(-1e3..1e3)).collect(),
                (0..6).map(|_| rng.random_range(1e-3..1e3)).collect(),
            )
            .unwrap()
        };
        let truth = spectrum(&mut rng);
        let same = per_frequency_error(std::slice::from_ref(&truth), std::slice::from_ref(&truth))
            .unwrap();
        ensure!(
            same.eps_real
                .iter()
                .chain(&same.eps_imag)
                .all(|v| *v == 0.0),
            "nonzero error for identical spectra"
        );
        let m = SampleMetrics::compare(0, &truth, &truth).unwrap();
        ensure!(
            m.low_freq_abs_error == 0.0 && m.eps_imag_median_rel_error == 0.0,
            "nonzero metrics for identical spectra"
        );
        let mut other = truth.clone();
        let k = rng.random_range(0..6);
        if rng.random_bool(0.5) {
            other.eps_real[k] += rng.random_range(1e-3..1.0);
        } else {
            other.eps_imag[k] += rng.random_range(1e-3..1.0);
        }
        let e = per_frequency_error(std::slice::from_ref(&other), std::slice::from_ref(&truth))
            .unwrap();
        ensure!(
            e.eps_real.iter().chain(&e.eps_imag).all(|v| *v >= 0.0),
            "negative error"
        );
        ensure!(
            e.eps_real.iter().chain(&e.eps_imag).any(|v| *v > 0.0),
            "zero error for different spectra"
        );
        let m = SampleMetrics::compare(0, &other, &truth).unwrap();
        ensure!(
            m.low_freq_abs_error >= 0.0
                && m.eps_imag_median_rel_error >= 0.0
                && m.eps_real_mean_abs_error >= 0.0,
            "negative metric {m:?}"
        );
    }
    Ok(())
}

pub fn sweep_consistency() -> Result<(), String> {
    let base = DatasetSpec {
        n_samples: 30,
        separations: uniform_separations(40e-9, 2e-6, 8).unwrap(),
        grid: FrequencyGrid::log_spaced(1e11, 1e19, 8).unwrap(),
        ..DatasetSpec::default()
    };
    let hyper = Hyperparams {
        n_trees: 8,
        n_ensembles: 1,
        ..Hyperparams::default()
    };
    let spec = SweepSpec {
        base: base.clone(),
        d_max: vec![1e-6, 2e-6],
        validation_fraction: 0.2,
    };
    let a = dmax_sweep(&spec, &hyper).unwrap();
    ensure!(
        a == dmax_sweep(&spec, &hyper).unwrap(),
        "sweep not reproducible"
    );
    let data = split(generate_dataset(&base).unwrap(), 0.2, base.seed).unwrap();
    let restricted = data.restrict_separations(2e-6).unwrap();
    ensure!(
        restricted == data,
        "full-range restriction changed the dataset"
    );
    let (_, report) = casimir_core::analysis::train_and_evaluate(&data, &hyper, base.seed).unwrap();
    ensure!(
        a[1].report == report,
        "full-range leg differs from baseline training"
    );
    Ok(())
}
