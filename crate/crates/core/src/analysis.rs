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

//! Experiments built on the forward model and the inversion: maximum
//! separation sweeps, reconstruction from measured sphere–plate gradients,
//! and the error metrics used to compare reconstructed spectra.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dielectric::{FrequencyGrid, SpectrumSample};
use crate::error::{Error, Result};
use crate::inversion::{fit_forest, EvaluationSet, Forest, Hyperparams, TrainingSet};
use crate::lifshitz::{CurveKind, ForceCurve};
use crate::parallel::map_range;
use crate::synth::{generate_dataset, split, Dataset, DatasetSpec};

pub const DEFAULT_BINS: usize = 32;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.2;

// ------------------------------------------------------------------ metrics

/// Mean absolute error per grid point, separately for ε′ and ε″.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyErrors {
    pub grid: FrequencyGrid,
    pub eps_real: Vec<f64>,
    pub eps_imag: Vec<f64>,
}

impl FrequencyErrors {
    /// Mean ε″ error over grid points within one decade of the top.
    pub fn top_decade_eps_imag(&self) -> f64 {
        let cut = self.grid.max() / 10.0;
        mean_where(&self.grid, &self.eps_imag, |w| w >= cut)
    }

    /// Mean ε′ error over grid points within one decade of the bottom.
    pub fn lowest_decade_eps_real(&self) -> f64 {
        let cut = self.grid.min() * 10.0;
        mean_where(&self.grid, &self.eps_real, |w| w <= cut)
    }
}

fn mean_where(grid: &FrequencyGrid, values: &[f64], keep: impl Fn(f64) -> bool) -> f64 {
    let picked: Vec<f64> = grid
        .points()
        .iter()
        .zip(values)
        .filter(|(w, _)| keep(**w))
        .map(|(_, v)| *v)
        .collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}

pub fn per_frequency_error(
    pred: &[SpectrumSample],
    truth: &[SpectrumSample],
) -> Result<FrequencyErrors> {
    if pred.len() != truth.len() {
        return Err(Error::input(format!(
            "{} predictions against {} references",
            pred.len(),
            truth.len()
        )));
    }
    let first = truth
        .first()
        .ok_or_else(|| Error::input("no spectra to compare"))?;
    let grid = first.grid.clone();
    let mut eps_real = vec![0.0; grid.len()];
    let mut eps_imag = vec![0.0; grid.len()];
    for (p, t) in pred.iter().zip(truth) {
        if p.grid != grid || t.grid != grid {
            return Err(Error::input("spectra are on different frequency grids"));
        }
        for k in 0..grid.len() {
            eps_real[k] += (p.eps_real[k] - t.eps_real[k]).abs();
            eps_imag[k] += (p.eps_imag[k] - t.eps_imag[k]).abs();
        }
    }
    let n = pred.len() as f64;
    eps_real
        .iter_mut()
        .chain(eps_imag.iter_mut())
        .for_each(|v| *v /= n);
    Ok(FrequencyErrors {
        grid,
        eps_real,
        eps_imag,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

// |a − b|/|b|, zero when both vanish, undefined entries skipped by callers
fn relative(a: f64, b: f64) -> Option<f64> {
    let diff = (a - b).abs();
    if diff == 0.0 {
        Some(0.0)
    } else if b == 0.0 {
        None
    } else {
        Some(diff / b.abs())
    }
}

/// Errors of one reconstructed spectrum against its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub id: u64,
    /// |Δε′(ω_min)|.
    pub low_freq_abs_error: f64,
    /// |Δε′(ω_min)|/|ε′(ω_min)|.
    pub low_freq_rel_error: f64,
    /// Median of |Δε″|/ε″ over the whole grid.
    pub eps_imag_median_rel_error: f64,
    /// Median of |Δε″|/ε″ over the lowest frequency decade.
    pub lowest_decade_eps_imag_rel_error: f64,
    /// Mean |Δε′| over the grid.
    pub eps_real_mean_abs_error: f64,
}

impl SampleMetrics {
    pub fn compare(id: u64, pred: &SpectrumSample, truth: &SpectrumSample) -> Result<Self> {
        if pred.grid != truth.grid {
            return Err(Error::input("spectra are on different frequency grids"));
        }
        let n = truth.grid.len();
        let imag_rel = |keep: &dyn Fn(f64) -> bool| {
            let mut r: Vec<f64> = (0..n)
                .filter(|&k| keep(truth.grid.points()[k]))
                .filter_map(|k| relative(pred.eps_imag[k], truth.eps_imag[k]))
                .collect();
            median(&mut r)
        };
        let cut = truth.grid.min() * 10.0;
        let low_abs = (pred.eps_real[0] - truth.eps_real[0]).abs();
        Ok(Self {
            id,
            low_freq_abs_error: low_abs,
            low_freq_rel_error: relative(pred.eps_real[0], truth.eps_real[0])
                .unwrap_or(f64::INFINITY),
            eps_imag_median_rel_error: imag_rel(&|_| true),
            lowest_decade_eps_imag_rel_error: imag_rel(&|w| w <= cut),
            eps_real_mean_abs_error: (0..n)
                .map(|k| (pred.eps_real[k] - truth.eps_real[k]).abs())
                .sum::<f64>()
                / n as f64,
        })
    }
}

/// A mean with a bootstrap 90% band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn bootstrap(values: &[f64], resamples: usize, seed: u64) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        if n < 2 || resamples == 0 {
            return Self {
                mean,
                lo: mean,
                hi: mean,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut means: Vec<f64> = (0..resamples)
            .map(|_| {
                (0..n)
                    .map(|_| *values.choose(&mut rng).expect("non-empty"))
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        means.sort_by(f64::total_cmp);
        let at = |q: f64| means[((resamples - 1) as f64 * q).round() as usize];
        Self {
            mean,
            lo: at(0.05),
            hi: at(0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub validation_r2: f64,
    pub baseline_r2: f64,
    pub samples: Vec<SampleMetrics>,
    pub mean_low_freq_abs_error: Estimate,
    pub median_low_freq_rel_error: f64,
    pub per_frequency: FrequencyErrors,
}

/// Scores `forest` against every sample of `eval`.
pub fn evaluate(forest: &Forest, eval: &EvaluationSet, seed: u64) -> Result<ReconstructionReport> {
    let preds = eval
        .curves
        .iter()
        .map(|c| forest.predict(c))
        .collect::<Result<Vec<_>>>()?;
    let samples = eval
        .ids
        .iter()
        .zip(preds.iter().zip(&eval.spectra))
        .map(|(&id, (p, t))| SampleMetrics::compare(id, p, t))
        .collect::<Result<Vec<_>>>()?;
    let low: Vec<f64> = samples.iter().map(|s| s.low_freq_abs_error).collect();
    let mut rel: Vec<f64> = samples.iter().map(|s| s.low_freq_rel_error).collect();
    Ok(ReconstructionReport {
        validation_r2: forest.score(eval)?,
        baseline_r2: forest.baseline_score(eval)?,
        mean_low_freq_abs_error: Estimate::bootstrap(&low, BOOTSTRAP_RESAMPLES, seed),
        median_low_freq_rel_error: median(&mut rel),
        per_frequency: per_frequency_error(&preds, &eval.spectra)?,
        samples,
    })
}

/// Trains on the train partition of `dataset` and evaluates on its
/// validation partition.
pub fn train_and_evaluate(
    dataset: &Dataset,
    hyper: &Hyperparams,
    seed: u64,
) -> Result<(Forest, ReconstructionReport)> {
    let train = TrainingSet::from_dataset(dataset)?;
    let forest = fit_forest(&train, hyper, seed)?;
    let report = evaluate(&forest, &EvaluationSet::validation(dataset), seed)?;
    Ok((forest, report))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = 0.5 * (i + j) as f64;
            for &k in &order[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

// -------------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dataset at the widest range; its seed is shared by every leg.
    pub base: DatasetSpec,
    /// Maximum separations, metres, strictly increasing.
    pub d_max: Vec<f64>,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

fn default_validation_fraction() -> f64 {
    DEFAULT_VALIDATION_FRACTION
}

impl SweepSpec {
    pub fn d_min(&self) -> f64 {
        self.base.separations[0]
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.d_max.is_empty() {
            return Err(Error::config("d_max list is empty"));
        }
        if self.d_max.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("d_max list must be strictly increasing"));
        }
        let widest = *self.base.separations.last().expect("validated");
        for &d in &self.d_max {
            let kept = self.base.separations.iter().filter(|s| **s <= d).count();
            if !(d > self.d_min()) || kept < 2 {
                return Err(Error::config(format!(
                    "d_max {d} m keeps fewer than two separations above d_min {} m",
                    self.d_min()
                )));
            }
            if d > widest * (1.0 + 1e-12) {
                return Err(Error::config(format!(
                    "d_max {d} m exceeds the widest separation {widest} m"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d_max: f64,
    pub n_separations: usize,
    pub report: ReconstructionReport,
}

/// For each d_max, restricts the shared dataset, trains on its train
/// partition and evaluates on its validation partition. Rows follow d_max.
pub fn dmax_sweep(spec: &SweepSpec, hyper: &Hyperparams) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    hyper.validate()?;
    let seed = spec.base.seed;
    let full = split(
        generate_dataset(&spec.base)?,
        spec.validation_fraction,
        seed,
    )?;
    // A leg at the full range shares bytes with the unrestricted dataset.
    map_range(spec.d_max.len(), |i| {
        let d_max = spec.d_max[i];
        let data = full.restrict_separations(d_max)?;
        log::info!(
            "sweep leg d_max = {d_max:e} m with {} separations",
            data.spec.separations.len()
        );
        let (_, report) = train_and_evaluate(&data, hyper, seed)?;
        Ok(SweepRow {
            d_max,
            n_separations: data.spec.separations.len(),
            report,
        })
    })
    .into_iter()
    .collect()
}

// ---------------------------------------------------------- measured files

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredRow {
    /// Separation, m.
    pub d: f64,
    /// Force gradient, N/m.
    pub gradient: f64,
    pub sigma: Option<f64>,
}

/// Sphere–plate force-gradient measurements, sorted by separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredGradientFile {
    pub rows: Vec<MeasuredRow>,
    /// Sphere radius, m.
    pub radius: f64,
    /// K.
    pub temperature: f64,
}

impl MeasuredGradientFile {
    pub fn new(mut rows: Vec<MeasuredRow>, radius: f64, temperature: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("measured gradient file has no rows"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::input(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        for r in &rows {
            if !(r.d > 0.0 && r.d.is_finite() && r.gradient.is_finite()) {
                return Err(Error::input(format!(
                    "invalid measurement row at d = {}",
                    r.d
                )));
            }
            if r.sigma.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
                return Err(Error::input(format!("invalid uncertainty at d = {}", r.d)));
            }
        }
        rows.sort_by(|a, b| a.d.total_cmp(&b.d));
        Ok(Self {
            rows,
            radius,
            temperature,
        })
    }

    /// Samples `curve` (a gradient curve) row by row.
    pub fn from_curve(curve: &ForceCurve, radius: f64, temperature: f64) -> Result<Self> {
        if curve.kind != CurveKind::Gradient {
            return Err(Error::input("measured files hold force gradients"));
        }
        let rows = curve
            .separations
            .iter()
            .zip(&curve.values)
            .map(|(&d, &gradient)| MeasuredRow {
                d,
                gradient,
                sigma: None,
            })
            .collect();
        Self::new(rows, radius, temperature)
    }

    /// Copy with each gradient multiplied by (1 + σ·N(0,1)).
    pub fn with_relative_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::config(format!(
                "noise level must be non-negative, got {sigma}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for r in &mut out.rows {
            let z: f64 = StandardNormal.sample(&mut rng);
            r.gradient *= 1.0 + sigma * z;
            r.sigma = Some(sigma * r.gradient.abs());
        }
        Ok(out)
    }
}

/// Averages rows in `n_bins` uniform separation bins over [min, max].
/// Empty bins are dropped.
pub fn bin_measurements(raw: &MeasuredGradientFile, n_bins: usize) -> Result<ForceCurve> {
    if n_bins < 2 {
        return Err(Error::config(format!("need at least 2 bins, got {n_bins}")));
    }
    if raw.rows.len() < n_bins {
        return Err(Error::input(format!(
            "{} rows cannot fill {n_bins} bins",
            raw.rows.len()
        )));
    }
    let lo = raw.rows[0].d;
    let hi = raw.rows[raw.rows.len() - 1].d;
    if !(hi > lo) {
        return Err(Error::input("every measurement falls in one bin"));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut sum_d = vec![0.0; n_bins];
    let mut sum_g = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for r in &raw.rows {
        let b = (((r.d - lo) / width) as usize).min(n_bins - 1);
        sum_d[b] += r.d;
        sum_g[b] += r.gradient;
        count[b] += 1;
    }
    let (mut d, mut g) = (Vec::new(), Vec::new());
    for b in 0..n_bins {
        if count[b] > 0 {
            d.push(sum_d[b] / count[b] as f64);
            g.push(sum_g[b] / count[b] as f64);
        }
    }
    if d.len() < 2 {
        return Err(Error::input("every measurement falls in one bin"));
    }
    ForceCurve::new(d, g, CurveKind::Gradient)
}

/// Settings for reconstructing a spectrum from a measured file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Training dataset; separations, curve kind, radius and temperature are
    /// replaced by those of the measured file.
    pub training: DatasetSpec,
    #[serde(default = "default_bins")]
    pub n_bins: usize,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            training: DatasetSpec::default(),
            n_bins: DEFAULT_BINS,
            validation_fraction: DEFAULT_VALIDATION_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub binned: ForceCurve,
    pub reconstruction: SpectrumSample,
    /// How the forest did on withheld synthetic samples.
    pub validation: ReconstructionReport,
    /// Errors against the supplied reference spectrum.
    pub reference: Option<SampleMetrics>,
    pub training_hash: String,
}

/// Binned training spec matching the file's separations and geometry.
pub fn experiment_training_spec(
    file: &MeasuredGradientFile,
    spec: &ExperimentSpec,
) -> Result<(ForceCurve, DatasetSpec)> {
    let binned = bin_measurements(file, spec.n_bins)?;
    let training = DatasetSpec {
        separations: binned.separations.clone(),
        curve_kind: CurveKind::Gradient,
        sphere_radius: Some(file.radius),
        temperature: file.temperature,
        ..spec.training.clone()
    };
    training.validate()?;
    Ok((binned, training))
}

/// Forest trained for one measured-file layout; files whose binned
/// separations match can be reconstructed without retraining.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentModel {
    pub forest: Forest,
    pub validation: ReconstructionReport,
    pub n_bins: usize,
    pub training_hash: String,
}

impl ExperimentModel {
    pub fn train(
        file: &MeasuredGradientFile,
        spec: &ExperimentSpec,
        hyper: &Hyperparams,
    ) -> Result<Self> {
        let (_, training) = experiment_training_spec(file, spec)?;
        let seed = training.seed;
        let dataset = split(generate_dataset(&training)?, spec.validation_fraction, seed)?;
        let (forest, validation) = train_and_evaluate(&dataset, hyper, seed)?;
        Ok(Self {
            forest,
            validation,
            n_bins: spec.n_bins,
            training_hash: training.hash(),
        })
    }

    pub fn reconstruct(
        &self,
        file: &MeasuredGradientFile,
        reference: Option<&SpectrumSample>,
    ) -> Result<ExperimentResult> {
        let binned = bin_measurements(file, self.n_bins)?;
        let reconstruction = self.forest.predict(&binned)?;
        let reference = reference
            .map(|r| SampleMetrics::compare(0, &reconstruction, r))
            .transpose()?;
        Ok(ExperimentResult {
            binned,
            reconstruction,
            validation: self.validation.clone(),
            reference,
            training_hash: self.training_hash.clone(),
        })
    }
}

pub fn reconstruct_experiment(
    file: &MeasuredGradientFile,
    spec: &ExperimentSpec,
    hyper: &Hyperparams,
    reference: Option<&SpectrumSample>,
) -> Result<ExperimentResult> {
    ExperimentModel::train(file, spec, hyper)?.reconstruct(file, reference)
}

/// `n` sorted separations drawn uniformly from [d_lo, d_hi].
pub fn random_separations(n: usize, d_lo: f64, d_hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(d_lo..=d_hi)).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

/// Noiseless measurement of `sample` against the gold sensing sphere.
pub fn synthesize_measurement(
    sample: &dyn crate::lifshitz::ImaginaryResponse,
    separations: &[f64],
    radius: f64,
    temperature: f64,
) -> Result<MeasuredGradientFile> {
    let geometry = crate::lifshitz::SphereGeometry::new(radius)?;
    let curve = crate::lifshitz::force_curve(
        separations,
        &crate::synth::gold_drude(),
        sample,
        crate::lifshitz::MatsubaraSettings::at_temperature(temperature),
        CurveKind::Gradient,
        Some(&geometry),
    )?;
    MeasuredGradientFile::from_curve(&curve, radius, temperature)
}
