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

//! Finite-temperature Lifshitz interaction between two dielectric half-spaces
//! across a vacuum gap, and its proximity-force conversion to a sphere–plate
//! force gradient.
//!
//! Sign convention: attraction is negative.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::dielectric::{DielectricModel, TabulatedOptics};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_laguerre, trilog, AdaptiveGaussLegendre, Rule};

/// Permittivity on the imaginary frequency axis, plus its static TM limit.
pub trait ImaginaryResponse: Sync {
    /// ε(iξ) for ξ > 0.
    fn permittivity_at(&self, xi: f64) -> Result<f64>;

    /// TM reflection coefficient of the zero-frequency Matsubara term.
    fn static_tm_reflection(&self) -> f64;
}

fn static_reflection_from(eps0: Option<f64>) -> f64 {
    // Drude-type conductors reflect the static TM mode perfectly
    eps0.map_or(1.0, |e| (e - 1.0) / (e + 1.0))
}

impl ImaginaryResponse for DielectricModel {
    fn permittivity_at(&self, xi: f64) -> Result<f64> {
        self.eval_imag(xi)
    }

    fn static_tm_reflection(&self) -> f64 {
        static_reflection_from(self.static_permittivity())
    }
}

impl ImaginaryResponse for TabulatedOptics {
    fn permittivity_at(&self, xi: f64) -> Result<f64> {
        self.kk_continuation(xi)
    }

    fn static_tm_reflection(&self) -> f64 {
        static_reflection_from(self.static_permittivity())
    }
}

/// Frequency-independent ε(iξ); ε = 1 is vacuum, very large ε approaches an
/// ideal metal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantPermittivity(pub f64);

impl ConstantPermittivity {
    pub const VACUUM: Self = Self(1.0);
}

impl ImaginaryResponse for ConstantPermittivity {
    fn permittivity_at(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::domain(format!(
                "imaginary frequency must be positive, got {xi}"
            )));
        }
        Ok(self.0)
    }

    fn static_tm_reflection(&self) -> f64 {
        static_reflection_from(Some(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatsubaraSettings {
    pub temperature: f64,
    #[serde(default = "MatsubaraSettings::default_term_tolerance")]
    pub term_tolerance: f64,
    #[serde(default = "MatsubaraSettings::default_quadrature_tolerance")]
    pub quadrature_tolerance: f64,
}

impl MatsubaraSettings {
    pub const DEFAULT_TEMPERATURE: f64 = 300.0;
    /// Number of consecutive negligible terms that ends the Matsubara series.
    pub const CONSECUTIVE_SMALL_TERMS: usize = 5;
    pub const MAX_TERMS: usize = 5_000_000;

    fn default_term_tolerance() -> f64 {
        1e-9
    }

    fn default_quadrature_tolerance() -> f64 {
        1e-8
    }

    pub fn at_temperature(temperature: f64) -> Self {
        Self {
            temperature,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::config(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        for (name, tol) in [
            ("term_tolerance", self.term_tolerance),
            ("quadrature_tolerance", self.quadrature_tolerance),
        ] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::config(format!(
                    "{name} must lie in (0, 1), got {tol}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for MatsubaraSettings {
    fn default() -> Self {
        Self {
            temperature: Self::DEFAULT_TEMPERATURE,
            term_tolerance: Self::default_term_tolerance(),
            quadrature_tolerance: Self::default_quadrature_tolerance(),
        }
    }
}

/// ξ_n = 2πn k_B T / ħ.
pub fn matsubara_frequency(temperature: f64, n: usize) -> f64 {
    2.0 * PI * n as f64 * BOLTZMANN * temperature / HBAR
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub te: f64,
    pub tm: f64,
    /// Vacuum decay constant κ₀ = √(k² + ξ²/c²), 1/m.
    pub kappa0: f64,
}

/// Imaginary-frequency Fresnel coefficients of a vacuum/medium interface at
/// transverse wavevector `k`.
pub fn fresnel(eps: f64, xi: f64, k: f64) -> Result<ReflectionPair> {
    if !(eps >= 1.0) {
        return Err(Error::domain(format!(
            "imaginary-axis permittivity must be ≥ 1, got {eps}"
        )));
    }
    if !(xi > 0.0) || !(k >= 0.0) {
        return Err(Error::domain(format!(
            "fresnel needs ξ > 0 and k ≥ 0 (got ξ = {xi}, k = {k})"
        )));
    }
    let q = xi / SPEED_OF_LIGHT;
    let kappa0 = (k * k + q * q).sqrt();
    let (te, tm) = reflection(eps, kappa0, q);
    Ok(ReflectionPair { te, tm, kappa0 })
}

// Rearranged to avoid cancellation when ε → 1:
//   κ₀ − κ_m = −(ε−1)q²/(κ₀+κ_m),  εκ₀ − κ_m = (ε−1)((ε+1)κ₀² − q²)/(εκ₀+κ_m)
#[inline]
fn reflection(eps: f64, kappa0: f64, q: f64) -> (f64, f64) {
    let delta = (eps - 1.0) * q * q;
    let kappa_m = (kappa0 * kappa0 + delta).sqrt();
    let sum_te = kappa0 + kappa_m;
    let te = -delta / (sum_te * sum_te);
    let sum_tm = eps * kappa0 + kappa_m;
    let tm = (eps - 1.0) * ((eps + 1.0) * kappa0 * kappa0 - q * q) / (sum_tm * sum_tm);
    (te, tm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Pressure,
    FreeEnergy,
}

const LAGUERRE_ORDERS: [usize; 4] = [60, 120, 240, 480];

fn laguerre_rules() -> &'static [Rule] {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(|| LAGUERRE_ORDERS.iter().map(|&n| gauss_laguerre(n)).collect())
}

/// Evaluates Lifshitz sums for one material pair, caching ε(iξ_n) across
/// separations.
pub struct PlatePair<'a> {
    first: &'a dyn ImaginaryResponse,
    second: &'a dyn ImaginaryResponse,
    settings: MatsubaraSettings,
    eps_cache: Vec<(f64, f64)>,
}

impl<'a> PlatePair<'a> {
    pub fn new(
        first: &'a dyn ImaginaryResponse,
        second: &'a dyn ImaginaryResponse,
        settings: MatsubaraSettings,
    ) -> Result<Self> {
        settings.validate()?;
        Ok(Self {
            first,
            second,
            settings,
            eps_cache: Vec::new(),
        })
    }

    pub fn settings(&self) -> &MatsubaraSettings {
        &self.settings
    }

    fn permittivities(&mut self, n: usize) -> Result<(f64, f64)> {
        while self.eps_cache.len() < n {
            let xi = matsubara_frequency(self.settings.temperature, self.eps_cache.len() + 1);
            let e1 = self.first.permittivity_at(xi)?;
            let e2 = self.second.permittivity_at(xi)?;
            if !(e1 >= 1.0 && e2 >= 1.0 && e1.is_finite() && e2.is_finite()) {
                return Err(Error::domain(format!(
                    "ε(iξ) must be finite and ≥ 1 (got {e1}, {e2} at ξ = {xi})"
                )));
            }
            self.eps_cache.push((e1, e2));
        }
        Ok(self.eps_cache[n - 1])
    }

    /// Plate–plate pressure (Pa) at separation `d` (m).
    pub fn pressure(&mut self, d: f64) -> Result<f64> {
        let sum = self.matsubara_sum(d, Quantity::Pressure)?;
        let kt = BOLTZMANN * self.settings.temperature;
        Ok(-kt / PI * sum / (8.0 * d * d * d))
    }

    /// Free energy per unit area (J/m²) at separation `d` (m).
    pub fn free_energy(&mut self, d: f64) -> Result<f64> {
        let sum = self.matsubara_sum(d, Quantity::FreeEnergy)?;
        let kt = BOLTZMANN * self.settings.temperature;
        Ok(kt / (2.0 * PI) * sum / (4.0 * d * d))
    }

    // Σ′ over Matsubara terms of the dimensionless y-integral, y = 2κ₀d.
    fn matsubara_sum(&mut self, d: f64, quantity: Quantity) -> Result<f64> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::domain(format!(
                "separation must be positive, got {d}"
            )));
        }
        let static_product = self.first.static_tm_reflection() * self.second.static_tm_reflection();
        let zeroth = match quantity {
            Quantity::Pressure => 2.0 * trilog(static_product),
            Quantity::FreeEnergy => -trilog(static_product),
        };
        let mut sum = 0.5 * zeroth;
        let mut small_run = 0;
        let mut n = 1;
        while small_run < MatsubaraSettings::CONSECUTIVE_SMALL_TERMS {
            if n > MatsubaraSettings::MAX_TERMS {
                return Err(Error::Convergence {
                    what: "Matsubara series",
                    index: n,
                    separation_m: d,
                });
            }
            let (e1, e2) = self.permittivities(n)?;
            let xi = matsubara_frequency(self.settings.temperature, n);
            let term = self.term(e1, e2, xi, d, quantity, n)?;
            sum += term;
            if term.abs() <= self.settings.term_tolerance * sum.abs() {
                small_run += 1;
            } else {
                small_run = 0;
            }
            n += 1;
        }
        Ok(sum)
    }

    fn term(&self, e1: f64, e2: f64, xi: f64, d: f64, quantity: Quantity, n: usize) -> Result<f64> {
        let q = xi / SPEED_OF_LIGHT;
        let y0 = 2.0 * q * d;
        let damping = (-y0).exp();
        if damping == 0.0 {
            return Ok(0.0);
        }
        // Head panel t ∈ [0, HEAD] by adaptive Gauss–Legendre: when y₀ is small the
        // integrand has a logarithmic singularity just left of t = 0, which a
        // Laguerre rule resolves poorly. The remainder is Gauss–Laguerre about HEAD.
        let head_quad =
            AdaptiveGaussLegendre::new(8, 0.1 * self.settings.quadrature_tolerance, 0.0);
        let (head, head_ok) = head_quad.integrate(0.0, HEAD_PANEL, &mut |t: f64| {
            (-t).exp() * integrand(e1, e2, q, d, y0 + t, quantity)
        });
        if !head_ok {
            return Err(Error::Convergence {
                what: "wavevector quadrature",
                index: n,
                separation_m: d,
            });
        }
        let tail_weight = (-HEAD_PANEL).exp();
        let rules = laguerre_rules();
        let tail =
            |rule: &Rule| tail_weight * laguerre_sum(rule, e1, e2, q, d, y0 + HEAD_PANEL, quantity);
        let mut previous = head + tail(&rules[0]);
        for rule in &rules[1..] {
            let current = head + tail(rule);
            if (current - previous).abs() <= self.settings.quadrature_tolerance * current.abs() {
                return Ok(current * damping);
            }
            previous = current;
        }
        Err(Error::Convergence {
            what: "wavevector quadrature",
            index: n,
            separation_m: d,
        })
    }
}

/// Width of the Gauss–Legendre head panel in t = y − y₀.
const HEAD_PANEL: f64 = 2.0;

// Σ_p of the y-space integrand with the e^{-y} weight divided out:
//   pressure:     y² · A/(1 − A e^{-y})
//   free energy:  y · ln(1 − A e^{-y}) / e^{-y}
#[inline]
fn integrand(e1: f64, e2: f64, q: f64, d: f64, y: f64, quantity: Quantity) -> f64 {
    let kappa0 = y / (2.0 * d);
    let (te1, tm1) = reflection(e1, kappa0, q);
    let (te2, tm2) = reflection(e2, kappa0, q);
    let decay = (-y).exp();
    match quantity {
        Quantity::Pressure => {
            let f = |a: f64| a / (1.0 - a * decay);
            y * y * (f(te1 * te2) + f(tm1 * tm2))
        }
        Quantity::FreeEnergy => {
            let f = |a: f64| {
                let s = a * decay;
                if s == 0.0 {
                    -a
                } else {
                    a * (-s).ln_1p() / s
                }
            };
            y * (f(te1 * te2) + f(tm1 * tm2))
        }
    }
}

// ∫₀^∞ e^{-s} g(start + s) ds
fn laguerre_sum(
    rule: &Rule,
    e1: f64,
    e2: f64,
    q: f64,
    d: f64,
    start: f64,
    quantity: Quantity,
) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .filter(|(_, w)| **w != 0.0)
        .map(|(&s, &w)| w * integrand(e1, e2, q, d, start + s, quantity))
        .sum()
}

pub fn pressure(
    d: f64,
    first: &dyn ImaginaryResponse,
    second: &dyn ImaginaryResponse,
    settings: MatsubaraSettings,
) -> Result<f64> {
    PlatePair::new(first, second, settings)?.pressure(d)
}

pub fn free_energy_per_area(
    d: f64,
    first: &dyn ImaginaryResponse,
    second: &dyn ImaginaryResponse,
    settings: MatsubaraSettings,
) -> Result<f64> {
    PlatePair::new(first, second, settings)?.free_energy(d)
}

/// Zero-temperature ideal-metal pressure −π²ħc/(240 d⁴).
pub fn ideal_metal_pressure(d: f64) -> f64 {
    -PI * PI * HBAR * SPEED_OF_LIGHT / (240.0 * d.powi(4))
}

/// Zero-temperature ideal-metal energy per area −π²ħc/(720 d³).
pub fn ideal_metal_energy(d: f64) -> f64 {
    -PI * PI * HBAR * SPEED_OF_LIGHT / (720.0 * d.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereGeometry {
    pub radius: f64,
}

impl SphereGeometry {
    /// Ratio R/d below which the proximity approximation is flagged.
    pub const PFA_MIN_RATIO: f64 = 10.0;

    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    pub fn pfa_valid_at(&self, d: f64) -> bool {
        self.radius >= Self::PFA_MIN_RATIO * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfaGradient {
    /// Sphere–plate force gradient, N/m.
    pub value: f64,
    /// Set when R < 10·d.
    pub outside_validity: bool,
}

/// Proximity-force sphere–plate gradient F′ = 2πR·P(d).
pub fn pfa_gradient(
    d: f64,
    geometry: &SphereGeometry,
    first: &dyn ImaginaryResponse,
    second: &dyn ImaginaryResponse,
    settings: MatsubaraSettings,
) -> Result<PfaGradient> {
    let p = pressure(d, first, second, settings)?;
    Ok(gradient_from_pressure(p, d, geometry))
}

fn gradient_from_pressure(p: f64, d: f64, geometry: &SphereGeometry) -> PfaGradient {
    PfaGradient {
        value: 2.0 * PI * geometry.radius * p,
        outside_validity: !geometry.pfa_valid_at(d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    /// Plate–plate pressure, Pa.
    Pressure,
    /// Sphere–plate force gradient, N/m.
    Gradient,
}

/// Values sampled against strictly increasing separations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceCurve {
    pub separations: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
}

impl ForceCurve {
    pub fn new(separations: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        validate_separations(&separations)?;
        if separations.len() != values.len() {
            return Err(Error::input(format!(
                "force curve has {} separations but {} values",
                separations.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("force curve values must be finite"));
        }
        Ok(Self {
            separations,
            values,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.separations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.separations.is_empty()
    }

    /// All values attractive (negative) with strictly decreasing magnitude.
    pub fn is_attractive_and_decaying(&self) -> bool {
        self.values.iter().all(|v| *v < 0.0)
            && self.values.windows(2).all(|w| w[1].abs() < w[0].abs())
    }

    /// Keeps only separations ≤ `d_max`.
    pub fn restrict(&self, d_max: f64) -> Result<Self> {
        let keep = self.separations.iter().take_while(|d| **d <= d_max).count();
        if keep == 0 {
            return Err(Error::input(format!(
                "no separations at or below d_max = {d_max} m"
            )));
        }
        Ok(Self {
            separations: self.separations[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
            kind: self.kind,
        })
    }
}

pub fn validate_separations(separations: &[f64]) -> Result<()> {
    if separations.is_empty() {
        return Err(Error::input("separation list is empty"));
    }
    if separations.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::input("separations must be positive and finite"));
    }
    if separations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("separations must be strictly increasing"));
    }
    Ok(())
}

/// `count` uniformly spaced separations over [min, max].
pub fn uniform_separations(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !(min > 0.0) || (count > 1 && !(max > min)) {
        return Err(Error::config(format!(
            "uniform separations need 0 < min < max and count ≥ 1 (got {min}, {max}, {count})"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|k| min + step * k as f64).collect();
    out[count - 1] = max;
    Ok(out)
}

/// Evaluates a full force curve. Requires `geometry` iff `kind` is gradient.
pub fn force_curve(
    separations: &[f64],
    first: &dyn ImaginaryResponse,
    second: &dyn ImaginaryResponse,
    settings: MatsubaraSettings,
    kind: CurveKind,
    geometry: Option<&SphereGeometry>,
) -> Result<ForceCurve> {
    validate_separations(separations)?;
    let geometry = match (kind, geometry) {
        (CurveKind::Gradient, None) => {
            return Err(Error::input("gradient curves need a sphere geometry"))
        }
        (CurveKind::Pressure, Some(_)) => {
            return Err(Error::input("pressure curves take no sphere geometry"))
        }
        (_, g) => g,
    };
    let mut pair = PlatePair::new(first, second, settings)?;
    let mut values = Vec::with_capacity(separations.len());
    let mut flagged = 0;
    for &d in separations {
        let p = pair.pressure(d)?;
        values.push(match geometry {
            Some(g) => {
                let grad = gradient_from_pressure(p, d, g);
                flagged += usize::from(grad.outside_validity);
                grad.value
            }
            None => p,
        });
    }
    if flagged > 0 {
        log::warn!(
            "{flagged} separations violate R ≥ {}·d; proximity approximation is unreliable there",
            SphereGeometry::PFA_MIN_RATIO
        );
    }
    ForceCurve::new(separations.to_vec(), values, kind)
}
