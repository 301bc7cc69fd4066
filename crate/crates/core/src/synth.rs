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

//! Random dielectric models, their spectra and force curves, assembled into
//! reproducible train/validation datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dielectric::{
    DielectricModel, DrudeParams, FrequencyGrid, LorentzOscillator, SpectrumSample,
};
use crate::error::{Error, Result};
use crate::lifshitz::{
    force_curve, uniform_separations, validate_separations, CurveKind, ForceCurve,
    MatsubaraSettings, SphereGeometry,
};
use crate::parallel::map_range;

/// Plasma frequency of the Drude stand-in for the gold sensing surface, rad/s.
pub const GOLD_PLASMA_FREQUENCY: f64 = 1.37e16;
/// Damping of the Drude stand-in for the gold sensing surface, rad/s.
pub const GOLD_DAMPING: f64 = 5.3e13;

pub fn gold_drude() -> DielectricModel {
    DielectricModel::drude(GOLD_PLASMA_FREQUENCY, GOLD_DAMPING).expect("gold parameters are valid")
}

/// Closed interval of log10 values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRange {
    pub min: f64,
    pub max: f64,
}

impl LogRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::config(format!(
                "{name}: need finite min ≤ max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// Log-uniform draw; degenerate ranges return 10^min exactly.
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.min == self.max {
            return 10f64.powf(self.min);
        }
        10f64.powf(rng.random_range(self.min..=self.max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingRanges {
    pub p_drude: f64,
    pub log10_plasma_frequency: LogRange,
    pub log10_drude_damping: LogRange,
    /// Inclusive [min, max] oscillator count.
    pub oscillator_count: [usize; 2],
    pub log10_strength: LogRange,
    pub log10_resonance: LogRange,
    pub log10_oscillator_damping: LogRange,
}

impl SamplingRanges {
    /// Drude-only training space.
    pub fn drude_only() -> Self {
        Self {
            p_drude: 1.0,
            oscillator_count: [0, 0],
            ..Self::drude_lorentz()
        }
    }

    /// Drude plus up to four Lorentz oscillators.
    pub fn drude_lorentz() -> Self {
        Self {
            p_drude: 0.9,
            log10_plasma_frequency: LogRange::new(15.0, 16.5),
            log10_drude_damping: LogRange::new(13.0, 14.5),
            oscillator_count: [0, 4],
            log10_strength: LogRange::new(14.5, 16.5),
            log10_resonance: LogRange::new(14.5, 17.0),
            log10_oscillator_damping: LogRange::new(13.5, 15.5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_drude) {
            return Err(Error::config(format!(
                "p_drude must lie in [0, 1], got {}",
                self.p_drude
            )));
        }
        self.log10_plasma_frequency
            .validate("log10_plasma_frequency")?;
        self.log10_drude_damping.validate("log10_drude_damping")?;
        self.log10_strength.validate("log10_strength")?;
        self.log10_resonance.validate("log10_resonance")?;
        self.log10_oscillator_damping
            .validate("log10_oscillator_damping")?;
        let [lo, hi] = self.oscillator_count;
        if lo > hi {
            return Err(Error::config(format!(
                "oscillator_count: min {lo} exceeds max {hi}"
            )));
        }
        if self.p_drude == 0.0 && hi == 0 {
            return Err(Error::config(
                "p_drude = 0 with no oscillators can only produce empty models",
            ));
        }
        Ok(())
    }
}

impl Default for SamplingRanges {
    fn default() -> Self {
        Self::drude_only()
    }
}

/// Draw one model. A draw without a Drude term always gets at least one
/// oscillator so the model is never empty.
pub fn sample_model(rng: &mut impl Rng, ranges: &SamplingRanges) -> Result<DielectricModel> {
    ranges.validate()?;
    let has_drude =
        ranges.p_drude == 1.0 || (ranges.p_drude > 0.0 && rng.random_bool(ranges.p_drude));
    let drude = if has_drude {
        Some(DrudeParams::new(
            ranges.log10_plasma_frequency.sample(rng),
            ranges.log10_drude_damping.sample(rng),
        )?)
    } else {
        None
    };
    let [mut lo, hi] = ranges.oscillator_count;
    if !has_drude {
        lo = lo.max(1);
    }
    let count = if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    };
    let oscillators = (0..count)
        .map(|_| {
            LorentzOscillator::new(
                ranges.log10_strength.sample(rng),
                ranges.log10_resonance.sample(rng),
                ranges.log10_oscillator_damping.sample(rng),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    DielectricModel::new(drude, oscillators)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub n_samples: usize,
    pub separations: Vec<f64>,
    pub grid: FrequencyGrid,
    pub ranges: SamplingRanges,
    pub temperature: f64,
    pub curve_kind: CurveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_radius: Option<f64>,
    pub seed: u64,
}

impl DatasetSpec {
    pub const DEFAULT_SAMPLES: usize = 5000;
    pub const DEFAULT_SEPARATIONS: usize = 64;
    pub const DEFAULT_D_MIN: f64 = 40e-9;
    pub const DEFAULT_D_MAX: f64 = 5e-6;

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::config("n_samples must be at least 1"));
        }
        validate_separations(&self.separations)?;
        self.ranges.validate()?;
        self.settings().validate()?;
        match (self.curve_kind, self.sphere_radius) {
            (CurveKind::Gradient, None) => {
                Err(Error::config("gradient datasets need sphere_radius"))
            }
            (CurveKind::Gradient, Some(r)) => SphereGeometry::new(r).map(|_| ()),
            (CurveKind::Pressure, Some(_)) => Err(Error::config(
                "sphere_radius only applies to gradient datasets",
            )),
            (CurveKind::Pressure, None) => Ok(()),
        }
    }

    pub fn settings(&self) -> MatsubaraSettings {
        MatsubaraSettings::at_temperature(self.temperature)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("dataset spec serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn geometry(&self) -> Option<SphereGeometry> {
        self.sphere_radius.map(|radius| SphereGeometry { radius })
    }
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            n_samples: Self::DEFAULT_SAMPLES,
            separations: uniform_separations(
                Self::DEFAULT_D_MIN,
                Self::DEFAULT_D_MAX,
                Self::DEFAULT_SEPARATIONS,
            )
            .expect("default separations are valid"),
            grid: FrequencyGrid::default(),
            ranges: SamplingRanges::default(),
            temperature: MatsubaraSettings::DEFAULT_TEMPERATURE,
            curve_kind: CurveKind::Pressure,
            sphere_radius: None,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u64,
    pub model: DielectricModel,
    pub spectrum: SpectrumSample,
    pub curve: ForceCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Validation,
}

impl Partition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub samples: Vec<Sample>,
    pub split: Vec<Partition>,
}

/// Per-sample RNG stream keyed by (seed, index).
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Largest tolerated fraction of failed samples.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Forward-model every sample of `spec` against the gold sensing surface.
/// All samples start in the training partition; see [`split`].
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let sensing = gold_drude();
    let settings = spec.settings();
    let geometry = spec.geometry();
    let results = map_range(spec.n_samples, |i| -> Result<Sample> {
        let mut rng = sample_rng(spec.seed, i as u64);
        let model = sample_model(&mut rng, &spec.ranges)?;
        let spectrum = model.spectrum(&spec.grid)?;
        let curve = force_curve(
            &spec.separations,
            &sensing,
            &model,
            settings,
            spec.curve_kind,
            geometry.as_ref(),
        )?;
        Ok(Sample {
            id: i as u64,
            model,
            spectrum,
            curve,
        })
    });
    let mut samples = Vec::with_capacity(spec.n_samples);
    let mut failures = 0usize;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => {
                log::error!("sample {i} failed: {e}");
                failures += 1;
            }
        }
    }
    if failures as f64 > MAX_FAILURE_FRACTION * spec.n_samples as f64 || samples.is_empty() {
        return Err(Error::Numerical(format!(
            "{failures} of {} samples failed",
            spec.n_samples
        )));
    }
    let split = vec![Partition::Train; samples.len()];
    Ok(Dataset {
        spec: spec.clone(),
        samples,
        split,
    })
}

/// Random train/validation assignment with exactly round(fraction·n)
/// validation samples.
pub fn split(mut dataset: Dataset, validation_fraction: f64, seed: u64) -> Result<Dataset> {
    let n = dataset.samples.len();
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::config(format!(
            "validation_fraction must lie in (0, 1), got {validation_fraction}"
        )));
    }
    let n_val = (validation_fraction * n as f64).round() as usize;
    if n_val == 0 || n_val == n {
        return Err(Error::config(format!(
            "validation_fraction {validation_fraction} leaves an empty partition for {n} samples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, n, n_val);
    dataset.split = vec![Partition::Train; n];
    for i in chosen.iter() {
        dataset.split[i] = Partition::Validation;
    }
    Ok(dataset)
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn partition(&self, which: Partition) -> impl Iterator<Item = &Sample> {
        self.samples
            .iter()
            .zip(&self.split)
            .filter(move |(_, p)| **p == which)
            .map(|(s, _)| s)
    }

    /// Same samples with every curve cut to separations ≤ `d_max`.
    pub fn restrict_separations(&self, d_max: f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(Sample {
                    curve: s.curve.restrict(d_max)?,
                    ..s.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spec = self.spec.clone();
        spec.separations = samples[0].curve.separations.clone();
        Ok(Self {
            spec,
            samples,
            split: self.split.clone(),
        })
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.split.len() != self.samples.len() {
            return Err(Error::input("split labels do not cover every sample"));
        }
        for s in &self.samples {
            if s.curve.separations != self.spec.separations {
                return Err(Error::input(format!(
                    "sample {} has foreign separations",
                    s.id
                )));
            }
            if s.spectrum.grid != self.spec.grid {
                return Err(Error::input(format!("sample {} has a foreign grid", s.id)));
            }
            if !s.spectrum.is_passive() {
                return Err(Error::input(format!("sample {} has negative ε″", s.id)));
            }
            if !s.curve.is_attractive_and_decaying() {
                return Err(Error::input(format!(
                    "sample {} curve is not attractive and decaying",
                    s.id
                )));
            }
        }
        Ok(())
    }
}
