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

//! Drude–Lorentz dielectric models, their evaluation on the real and
//! imaginary frequency axes, and Kramers–Kronig continuation of tabulated
//! absorption spectra onto the imaginary axis.
//!
//! All frequencies are angular frequencies in rad/s.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveGaussLegendre;

/// Free-carrier response: plasma frequency ω_p and damping γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeParams {
    pub plasma_frequency: f64,
    pub damping: f64,
}

impl DrudeParams {
    pub fn new(plasma_frequency: f64, damping: f64) -> Result<Self> {
        let params = Self {
            plasma_frequency,
            damping,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.plasma_frequency > 0.0 && self.plasma_frequency.is_finite()) {
            return Err(Error::domain(format!(
                "Drude plasma frequency must be positive, got {}",
                self.plasma_frequency
            )));
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return Err(Error::domain(format!(
                "Drude damping must be positive, got {}",
                self.damping
            )));
        }
        Ok(())
    }

    /// Absorptive part ε″(ω) = ω_p²γ / (ω(ω² + γ²)).
    pub fn eps_imag(&self, omega: f64) -> f64 {
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        wp2 * self.damping / (omega * (omega * omega + self.damping * self.damping))
    }
}

/// A bound-charge resonance with strength Ω_j, resonance ω_j and damping γ_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzOscillator {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

impl LorentzOscillator {
    pub fn new(strength: f64, resonance: f64, damping: f64) -> Result<Self> {
        let osc = Self {
            strength,
            resonance,
            damping,
        };
        osc.validate()?;
        Ok(osc)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("strength", self.strength),
            ("resonance", self.resonance),
            ("damping", self.damping),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::domain(format!(
                    "Lorentz oscillator {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Drude term plus an ordered list of Lorentz oscillators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DielectricModel {
    pub drude: Option<DrudeParams>,
    #[serde(default)]
    pub oscillators: Vec<LorentzOscillator>,
}

impl DielectricModel {
    pub fn new(drude: Option<DrudeParams>, oscillators: Vec<LorentzOscillator>) -> Result<Self> {
        let model = Self { drude, oscillators };
        model.validate()?;
        Ok(model)
    }

    pub fn drude(plasma_frequency: f64, damping: f64) -> Result<Self> {
        Self::new(
            Some(DrudeParams::new(plasma_frequency, damping)?),
            Vec::new(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.drude.is_none() && self.oscillators.is_empty() {
            return Err(Error::domain(
                "dielectric model needs a Drude term or at least one oscillator",
            ));
        }
        if let Some(d) = &self.drude {
            d.validate()?;
        }
        self.oscillators
            .iter()
            .try_for_each(LorentzOscillator::validate)
    }

    /// Complex permittivity at real angular frequency ω.
    pub fn eval_real(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!(
                "real frequency must be positive, got {omega}"
            )));
        }
        let mut eps = Complex64::new(1.0, 0.0);
        if let Some(d) = &self.drude {
            let wp2 = d.plasma_frequency * d.plasma_frequency;
            eps -= wp2 / (omega * Complex64::new(omega, d.damping));
        }
        for osc in &self.oscillators {
            let denom = Complex64::new(
                osc.resonance * osc.resonance - omega * omega,
                -osc.damping * omega,
            );
            eps += osc.strength * osc.strength / denom;
        }
        Ok(eps)
    }

    /// Permittivity ε(iξ) continued to imaginary frequency ξ > 0.
    pub fn eval_imag(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::domain(format!(
                "imaginary frequency must be positive, got {xi}"
            )));
        }
        let mut eps = 1.0;
        if let Some(d) = &self.drude {
            eps += d.plasma_frequency * d.plasma_frequency / (xi * (xi + d.damping));
        }
        for osc in &self.oscillators {
            eps += osc.strength * osc.strength
                / (osc.resonance * osc.resonance + xi * xi + osc.damping * xi);
        }
        Ok(eps)
    }

    /// ε(0) of the bound-charge part; `None` when a Drude term makes it diverge.
    pub fn static_permittivity(&self) -> Option<f64> {
        if self.drude.is_some() {
            return None;
        }
        Some(
            1.0 + self
                .oscillators
                .iter()
                .map(|o| (o.strength / o.resonance).powi(2))
                .sum::<f64>(),
        )
    }

    /// Largest frequency scale appearing in the model.
    pub fn max_characteristic_frequency(&self) -> f64 {
        let mut max: f64 = 0.0;
        if let Some(d) = &self.drude {
            max = max.max(d.plasma_frequency).max(d.damping);
        }
        for o in &self.oscillators {
            max = max.max(o.strength).max(o.resonance).max(o.damping);
        }
        max
    }

    pub fn spectrum(&self, grid: &FrequencyGrid) -> Result<SpectrumSample> {
        let mut eps_real = Vec::with_capacity(grid.len());
        let mut eps_imag = Vec::with_capacity(grid.len());
        for &w in grid.points() {
            let eps = self.eval_real(w)?;
            eps_real.push(eps.re);
            eps_imag.push(eps.im);
        }
        SpectrumSample::new(grid.clone(), eps_real, eps_imag)
    }
}

/// Strictly increasing, positive angular-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub const DEFAULT_POINTS: usize = 80;
    pub const DEFAULT_MIN: f64 = 1e11;
    pub const DEFAULT_MAX: f64 = 1e19;

    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::input("frequency grid is empty"));
        }
        if points.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::input(
                "frequency grid points must be positive and finite",
            ));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("frequency grid must be strictly increasing"));
        }
        Ok(Self(points))
    }

    /// `count` logarithmically spaced points over [min, max].
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(min > 0.0) || !(max > min) {
            return Err(Error::config(format!(
                "log-spaced grid needs 0 < min < max and ≥ 2 points (got {min}, {max}, {count})"
            )));
        }
        let (lo, hi) = (min.log10(), max.log10());
        let step = (hi - lo) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count)
            .map(|k| 10f64.powf(lo + step * k as f64))
            .collect();
        points[0] = min;
        points[count - 1] = max;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Decades spanned by the grid.
    pub fn decades(&self) -> f64 {
        (self.max() / self.min()).log10()
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::log_spaced(Self::DEFAULT_MIN, Self::DEFAULT_MAX, Self::DEFAULT_POINTS)
            .expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(grid: FrequencyGrid) -> Self {
        grid.0
    }
}

/// ε′ and ε″ sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub grid: FrequencyGrid,
    pub eps_real: Vec<f64>,
    pub eps_imag: Vec<f64>,
}

impl SpectrumSample {
    pub fn new(grid: FrequencyGrid, eps_real: Vec<f64>, eps_imag: Vec<f64>) -> Result<Self> {
        if eps_real.len() != grid.len() || eps_imag.len() != grid.len() {
            return Err(Error::input(format!(
                "spectrum arrays ({}, {}) do not match grid length {}",
                eps_real.len(),
                eps_imag.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            eps_real,
            eps_imag,
        })
    }

    /// Passivity: ε″ ≥ 0 on the whole grid.
    pub fn is_passive(&self) -> bool {
        self.eps_imag.iter().all(|v| *v >= 0.0)
    }

    /// Concatenated [ε′ ‖ ε″] vector, the regression target layout.
    pub fn to_target(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.grid.len());
        v.extend_from_slice(&self.eps_real);
        v.extend_from_slice(&self.eps_imag);
        v
    }

    pub fn from_target(grid: FrequencyGrid, target: &[f64]) -> Result<Self> {
        let n = grid.len();
        if target.len() != 2 * n {
            return Err(Error::input(format!(
                "target length {} is not twice the grid length {n}",
                target.len()
            )));
        }
        Self::new(grid, target[..n].to_vec(), target[n..].to_vec())
    }
}

/// Tabulated absorption ε″(ω) with a Drude extrapolation below the table and
/// an ω⁻³ tail above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedOptics {
    frequencies: Vec<f64>,
    eps_imag: Vec<f64>,
    /// `None` means no absorption below the lowest tabulated frequency.
    low_freq_extrapolation: Option<DrudeParams>,
}

/// Exponent of the ε″ ∝ ω^(-n) high-frequency tail.
const TAIL_EXPONENT: i32 = 3;

impl TabulatedOptics {
    pub fn new(
        frequencies: Vec<f64>,
        eps_imag: Vec<f64>,
        low_freq_extrapolation: Option<DrudeParams>,
    ) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::input("tabulated optics table is empty"));
        }
        if frequencies.len() != eps_imag.len() {
            return Err(Error::input(format!(
                "tabulated optics columns differ in length ({} vs {})",
                frequencies.len(),
                eps_imag.len()
            )));
        }
        if frequencies.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::input(
                "tabulated frequencies must be positive and finite",
            ));
        }
        if frequencies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input(
                "tabulated frequencies must be strictly increasing",
            ));
        }
        if eps_imag.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::input(
                "tabulated eps_imag must be finite and non-negative",
            ));
        }
        if let Some(d) = &low_freq_extrapolation {
            d.validate()?;
        }
        Ok(Self {
            frequencies,
            eps_imag,
            low_freq_extrapolation,
        })
    }

    /// Tabulates ε″ of `model` at the given frequencies.
    pub fn from_model(model: &DielectricModel, frequencies: Vec<f64>) -> Result<Self> {
        let eps_imag = frequencies
            .iter()
            .map(|&w| model.eval_real(w).map(|e| e.im.max(0.0)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(frequencies, eps_imag, model.drude)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn eps_imag(&self) -> &[f64] {
        &self.eps_imag
    }

    pub fn low_freq_extrapolation(&self) -> Option<&DrudeParams> {
        self.low_freq_extrapolation.as_ref()
    }

    /// ε″ at any ω > 0, including both extrapolations.
    pub fn eps_imag_at(&self, omega: f64) -> f64 {
        let n = self.frequencies.len();
        let (w_lo, w_hi) = (self.frequencies[0], self.frequencies[n - 1]);
        if omega < w_lo {
            return self
                .low_freq_extrapolation
                .map_or(0.0, |d| d.eps_imag(omega));
        }
        if omega > w_hi {
            return self.eps_imag[n - 1] * (w_hi / omega).powi(TAIL_EXPONENT);
        }
        let k = match self.frequencies.binary_search_by(|w| w.total_cmp(&omega)) {
            Ok(k) => return self.eps_imag[k],
            Err(k) => k - 1,
        };
        self.interpolate(k, omega)
    }

    // log-log where both ends are positive, otherwise linear in ln ω
    fn interpolate(&self, k: usize, omega: f64) -> f64 {
        let (w0, w1) = (self.frequencies[k], self.frequencies[k + 1]);
        let (e0, e1) = (self.eps_imag[k], self.eps_imag[k + 1]);
        let s = (omega / w0).ln() / (w1 / w0).ln();
        if e0 > 0.0 && e1 > 0.0 {
            (e0.ln() + s * (e1 / e0).ln()).exp()
        } else {
            e0 + s * (e1 - e0)
        }
    }

    /// ε(iξ) = 1 + (2/π) ∫₀^∞ ω ε″(ω) / (ω² + ξ²) dω.
    pub fn kk_continuation(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::domain(format!(
                "imaginary frequency must be positive, got {xi}"
            )));
        }
        let n = self.frequencies.len();
        let (w_lo, w_hi) = (self.frequencies[0], self.frequencies[n - 1]);

        let below = self
            .low_freq_extrapolation
            .map_or(0.0, |d| drude_kk_below(&d, w_lo, xi));

        // ω ε″/(ω²+ξ²) dω = ω² ε″/(ω²+ξ²) du with u = ln ω
        let quad = AdaptiveGaussLegendre::new(6, 1e-8, 0.0);
        let xi2 = xi * xi;
        let mut tabulated = 0.0;
        for k in 0..n.saturating_sub(1) {
            let (u0, u1) = (self.frequencies[k].ln(), self.frequencies[k + 1].ln());
            let (value, _) = quad.integrate(u0, u1, &mut |u: f64| {
                let w = u.exp();
                w * w * self.interpolate(k, w) / (w * w + xi2)
            });
            tabulated += value;
        }

        let tail = self.eps_imag[n - 1] * tail_kernel(xi / w_hi);

        Ok(1.0 + 2.0 / PI * (below + tabulated + tail))
    }

    /// Static limit of the table when no Drude extrapolation is present:
    /// ε(0) = 1 + (2/π) ∫ ε″(ω)/ω dω.
    pub fn static_permittivity(&self) -> Option<f64> {
        if self.low_freq_extrapolation.is_some() {
            return None;
        }
        let n = self.frequencies.len();
        let quad = AdaptiveGaussLegendre::new(6, 1e-8, 0.0);
        let mut integral = 0.0;
        for k in 0..n.saturating_sub(1) {
            let (u0, u1) = (self.frequencies[k].ln(), self.frequencies[k + 1].ln());
            integral += quad
                .integrate(u0, u1, &mut |u: f64| self.interpolate(k, u.exp()))
                .0;
        }
        // ∫_{ω_max}^∞ A (ω_max/ω)³ / ω dω = A / 3
        integral += self.eps_imag[n - 1] / f64::from(TAIL_EXPONENT);
        Some(1.0 + 2.0 / PI * integral)
    }
}

/// ∫₀^{a} ω ε″_D(ω)/(ω² + ξ²) dω = ω_p²γ ∫₀^{a} dω / ((ω² + γ²)(ω² + ξ²)).
fn drude_kk_below(d: &DrudeParams, a: f64, xi: f64) -> f64 {
    let g = d.damping;
    let wp2 = d.plasma_frequency * d.plasma_frequency;
    let diff = xi * xi - g * g;
    if diff.abs() > 1e-6 * xi * xi {
        wp2 * g * ((a / g).atan() / g - (a / xi).atan() / xi) / diff
    } else {
        // coincident poles: ∫₀^a dω/(ω²+γ²)² = (atan(a/γ)/γ + a/(a²+γ²)) / (2γ²)
        wp2 * g * ((a / g).atan() / g + a / (a * a + g * g)) / (2.0 * g * g)
    }
}

/// ∫_{ω_max}^∞ ω (ω_max/ω)³ / (ω² + ξ²) dω = (x − atan x)/x³ with x = ξ/ω_max.
fn tail_kernel(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 5.0 + x2 * x2 / 7.0
    } else {
        (x - x.atan()) / (x * x * x)
    }
}
