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

//! The run configuration document shared by every subcommand.

use std::path::PathBuf;

use casimir_core::analysis::{
    ExperimentSpec, SweepSpec, DEFAULT_BINS, DEFAULT_VALIDATION_FRACTION,
};
use casimir_core::constants::EV_TO_RAD_PER_S;
use casimir_core::dielectric::{DielectricModel, DrudeParams, FrequencyGrid, LorentzOscillator};
use casimir_core::inversion::{HyperGrid, Hyperparams};
use casimir_core::lifshitz::{uniform_separations, CurveKind, MatsubaraSettings};
use casimir_core::synth::{DatasetSpec, SamplingRanges};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FrequencyUnit {
    #[default]
    #[serde(rename = "rad_s")]
    RadPerSecond,
    #[serde(rename = "eV")]
    ElectronVolt,
}

impl FrequencyUnit {
    pub fn to_rad_s(self, value: f64) -> f64 {
        match self {
            FrequencyUnit::RadPerSecond => value,
            FrequencyUnit::ElectronVolt => value * EV_TO_RAD_PER_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Unit of frequencies given in this document (grid bounds, material
    /// parameters). Sampling ranges are always log10 of rad/s.
    #[serde(default)]
    pub frequency_unit: FrequencyUnit,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub hyper: Hyperparams,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub paths: PathsConfig,
}

fn default_seed() -> u64 {
    42
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: default_seed(),
            frequency_unit: FrequencyUnit::default(),
            dataset: DatasetConfig::default(),
            hyper: Hyperparams::default(),
            search: SearchConfig::default(),
            simulate: SimulateConfig::default(),
            sweep: SweepConfig::default(),
            experiment: ExperimentConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeparationsConfig {
    Uniform {
        min_m: f64,
        max_m: f64,
        count: usize,
    },
    List(Vec<f64>),
}

impl SeparationsConfig {
    pub fn resolve(&self) -> casimir_core::Result<Vec<f64>> {
        match self {
            SeparationsConfig::Uniform {
                min_m,
                max_m,
                count,
            } => uniform_separations(*min_m, *max_m, *count),
            SeparationsConfig::List(d) => {
                casimir_core::lifshitz::validate_separations(d)?;
                Ok(d.clone())
            }
        }
    }
}

impl Default for SeparationsConfig {
    fn default() -> Self {
        SeparationsConfig::Uniform {
            min_m: DatasetSpec::DEFAULT_D_MIN,
            max_m: DatasetSpec::DEFAULT_D_MAX,
            count: DatasetSpec::DEFAULT_SEPARATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = FrequencyGrid::default();
        Self {
            min: g.min(),
            max: g.max(),
            count: g.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangesConfig {
    Preset(RangePreset),
    Explicit(SamplingRanges),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangePreset {
    DrudeOnly,
    DrudeLorentz,
}

impl RangesConfig {
    pub fn resolve(&self) -> SamplingRanges {
        match self {
            RangesConfig::Preset(RangePreset::DrudeOnly) => SamplingRanges::drude_only(),
            RangesConfig::Preset(RangePreset::DrudeLorentz) => SamplingRanges::drude_lorentz(),
            RangesConfig::Explicit(r) => r.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub n_samples: usize,
    pub separations: SeparationsConfig,
    pub grid: GridConfig,
    pub ranges: RangesConfig,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    pub curve_kind: CurveKind,
    pub sphere_radius_m: Option<f64>,
    /// Zero keeps every sample in the training partition.
    pub validation_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            n_samples: DatasetSpec::DEFAULT_SAMPLES,
            separations: SeparationsConfig::default(),
            grid: GridConfig::default(),
            ranges: RangesConfig::Preset(RangePreset::DrudeOnly),
            temperature_k: MatsubaraSettings::DEFAULT_TEMPERATURE,
            curve_kind: CurveKind::Pressure,
            sphere_radius_m: None,
            validation_fraction: DEFAULT_VALIDATION_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridChoice {
    Preset(GridPreset),
    Explicit(HyperGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPreset {
    /// Only the `hyper` section.
    Single,
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub grid: GridChoice,
    pub folds: usize,
    pub holdout_fraction: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: GridChoice::Preset(GridPreset::Single),
            folds: 3,
            holdout_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeConfig {
    pub plasma_frequency: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialConfig {
    /// The gold-like Drude sensing surface.
    Gold,
    Vacuum,
    Constant {
        epsilon: f64,
    },
    DrudeLorentz {
        #[serde(default)]
        drude: Option<DrudeConfig>,
        #[serde(default)]
        oscillators: Vec<OscillatorConfig>,
    },
    /// CSV `omega_rad_s,eps_imag`, continued to imaginary frequencies.
    Tabulated {
        path: PathBuf,
        #[serde(default)]
        low_freq_drude: Option<DrudeConfig>,
    },
}

impl MaterialConfig {
    pub fn drude_params(unit: FrequencyUnit, d: &DrudeConfig) -> casimir_core::Result<DrudeParams> {
        DrudeParams::new(unit.to_rad_s(d.plasma_frequency), unit.to_rad_s(d.damping))
    }

    pub fn model(
        unit: FrequencyUnit,
        drude: &Option<DrudeConfig>,
        oscillators: &[OscillatorConfig],
    ) -> casimir_core::Result<DielectricModel> {
        let drude = drude
            .as_ref()
            .map(|d| Self::drude_params(unit, d))
            .transpose()?;
        let oscillators = oscillators
            .iter()
            .map(|o| {
                LorentzOscillator::new(
                    unit.to_rad_s(o.strength),
                    unit.to_rad_s(o.resonance),
                    unit.to_rad_s(o.damping),
                )
            })
            .collect::<casimir_core::Result<Vec<_>>>()?;
        DielectricModel::new(drude, oscillators)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub first: MaterialConfig,
    pub second: MaterialConfig,
    pub separations: SeparationsConfig,
    pub kind: CurveKind,
    pub sphere_radius_m: Option<f64>,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            first: MaterialConfig::Gold,
            second: MaterialConfig::Gold,
            separations: SeparationsConfig::default(),
            kind: CurveKind::Pressure,
            sphere_radius_m: None,
            temperature_k: MatsubaraSettings::DEFAULT_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d_max_m: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_max_m: vec![0.5e-6, 1e-6, 2e-6, 5e-6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceConfig {
    Gold,
    Spectrum { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_bins: usize,
    pub reference: Option<ReferenceConfig>,
    /// Relative Gaussian noise added to the measured gradients before binning.
    pub relative_noise: Option<f64>,
    pub noise_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_bins: DEFAULT_BINS,
            reference: None,
            relative_noise: None,
            noise_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub out: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub measured: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        let key =
            |k: &'static str| move |e: casimir_core::Error| CliError::Config(format!("{k}: {e}"));
        self.hyper.validate().map_err(key("hyper"))?;
        self.dataset
            .separations
            .resolve()
            .map_err(key("dataset.separations"))?;
        self.grid().map_err(key("dataset.grid"))?;
        self.dataset
            .ranges
            .resolve()
            .validate()
            .map_err(key("dataset.ranges"))?;
        let f = self.dataset.validation_fraction;
        if !(0.0..1.0).contains(&f) {
            return Err(CliError::Config(format!(
                "dataset.validation_fraction: must lie in [0, 1), got {f}"
            )));
        }
        self.simulate
            .separations
            .resolve()
            .map_err(key("simulate.separations"))?;
        if self.search.folds == 0 {
            return Err(CliError::Config("search.folds: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> casimir_core::Result<FrequencyGrid> {
        let g = &self.dataset.grid;
        FrequencyGrid::log_spaced(
            self.frequency_unit.to_rad_s(g.min),
            self.frequency_unit.to_rad_s(g.max),
            g.count,
        )
    }

    pub fn dataset_spec(&self) -> Result<DatasetSpec> {
        let key =
            |k: &'static str| move |e: casimir_core::Error| CliError::Config(format!("{k}: {e}"));
        let spec = DatasetSpec {
            n_samples: self.dataset.n_samples,
            separations: self
                .dataset
                .separations
                .resolve()
                .map_err(key("dataset.separations"))?,
            grid: self.grid().map_err(key("dataset.grid"))?,
            ranges: self.dataset.ranges.resolve(),
            temperature: self.dataset.temperature_k,
            curve_kind: self.dataset.curve_kind,
            sphere_radius: self.dataset.sphere_radius_m,
            seed: self.seed,
        };
        spec.validate().map_err(key("dataset"))?;
        Ok(spec)
    }

    pub fn hyper_grid(&self) -> HyperGrid {
        match &self.search.grid {
            GridChoice::Preset(GridPreset::Single) => HyperGrid::single(&self.hyper),
            GridChoice::Preset(GridPreset::Default) => HyperGrid::default(),
            GridChoice::Explicit(g) => g.clone(),
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let spec = SweepSpec {
            base: self.dataset_spec()?,
            d_max: self.sweep.d_max_m.clone(),
            validation_fraction: self.dataset.validation_fraction,
        };
        spec.validate()
            .map_err(|e| CliError::Config(format!("sweep: {e}")))?;
        Ok(spec)
    }

    /// Training spec for an experiment; the curve fields are replaced by
    /// those of the measured file later.
    pub fn experiment_spec(&self) -> Result<ExperimentSpec> {
        let mut training = DatasetSpec {
            curve_kind: CurveKind::Pressure,
            sphere_radius: None,
            ..self.dataset_spec_unchecked()?
        };
        training.seed = self.seed;
        Ok(ExperimentSpec {
            training,
            n_bins: self.experiment.n_bins,
            validation_fraction: self.dataset.validation_fraction,
        })
    }

    fn dataset_spec_unchecked(&self) -> Result<DatasetSpec> {
        let key =
            |k: &'static str| move |e: casimir_core::Error| CliError::Config(format!("{k}: {e}"));
        Ok(DatasetSpec {
            n_samples: self.dataset.n_samples,
            separations: self
                .dataset
                .separations
                .resolve()
                .map_err(key("dataset.separations"))?,
            grid: self.grid().map_err(key("dataset.grid"))?,
            ranges: self.dataset.ranges.resolve(),
            temperature: self.dataset.temperature_k,
            curve_kind: self.dataset.curve_kind,
            sphere_radius: self.dataset.sphere_radius_m,
            seed: self.seed,
        })
    }
}
