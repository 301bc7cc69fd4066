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

//! Browser bindings: model spectra, imaginary-axis permittivity and
//! pressure against gold. Arrays cross the boundary as flat `Float64Array`s.
//!
//! Oscillators are passed as `[strength, resonance, damping, ...]` triples in
//! rad/s. A non-positive plasma frequency drops the Drude term.

use casimir_core::dielectric::{DielectricModel, DrudeParams, FrequencyGrid, LorentzOscillator};
use casimir_core::lifshitz::{validate_separations, MatsubaraSettings, PlatePair};
use casimir_core::synth::gold_drude;
use wasm_bindgen::prelude::*;

type Outcome<T> = std::result::Result<T, String>;

fn model(plasma: f64, damping: f64, oscillators: &[f64]) -> Outcome<DielectricModel> {
    if !oscillators.len().is_multiple_of(3) {
        return Err(format!(
            "oscillators must come in triples, got {} values",
            oscillators.len()
        ));
    }
    let drude = if plasma > 0.0 {
        Some(DrudeParams::new(plasma, damping).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let oscillators = oscillators
        .chunks_exact(3)
        .map(|c| LorentzOscillator::new(c[0], c[1], c[2]))
        .collect::<casimir_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    DielectricModel::new(drude, oscillators).map_err(|e| e.to_string())
}

/// `[ω, ε′, ε″]` rows on a log grid.
pub fn spectrum_rows(
    plasma: f64,
    damping: f64,
    oscillators: &[f64],
    w_min: f64,
    w_max: f64,
    count: usize,
) -> Outcome<Vec<f64>> {
    let m = model(plasma, damping, oscillators)?;
    let grid = FrequencyGrid::log_spaced(w_min, w_max, count).map_err(|e| e.to_string())?;
    let s = m.spectrum(&grid).map_err(|e| e.to_string())?;
    Ok(grid
        .points()
        .iter()
        .zip(s.eps_real.iter().zip(&s.eps_imag))
        .flat_map(|(&w, (&re, &im))| [w, re, im])
        .collect())
}

/// `[ξ, ε(iξ)]` rows on a log grid.
pub fn imaginary_rows(
    plasma: f64,
    damping: f64,
    oscillators: &[f64],
    xi_min: f64,
    xi_max: f64,
    count: usize,
) -> Outcome<Vec<f64>> {
    let m = model(plasma, damping, oscillators)?;
    let grid = FrequencyGrid::log_spaced(xi_min, xi_max, count).map_err(|e| e.to_string())?;
    grid.points()
        .iter()
        .map(|&xi| m.eval_imag(xi).map(|e| [xi, e]).map_err(|e| e.to_string()))
        .collect::<Outcome<Vec<_>>>()
        .map(|rows| rows.concat())
}

/// `[d, P]` rows for the model facing a gold plate.
pub fn pressure_rows(
    plasma: f64,
    damping: f64,
    oscillators: &[f64],
    d_min: f64,
    d_max: f64,
    count: usize,
    temperature: f64,
) -> Outcome<Vec<f64>> {
    let m = model(plasma, damping, oscillators)?;
    let gold = gold_drude();
    let mut pair = PlatePair::new(&m, &gold, MatsubaraSettings::at_temperature(temperature))
        .map_err(|e| e.to_string())?;
    let separations = FrequencyGrid::log_spaced(d_min, d_max, count).map_err(|e| e.to_string())?;
    validate_separations(separations.points()).map_err(|e| e.to_string())?;
    separations
        .points()
        .iter()
        .map(|&d| pair.pressure(d).map(|p| [d, p]).map_err(|e| e.to_string()))
        .collect::<Outcome<Vec<_>>>()
        .map(|rows| rows.concat())
}

#[wasm_bindgen]
pub fn spectrum(
    plasma: f64,
    damping: f64,
    oscillators: &[f64],
    w_min: f64,
    w_max: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    spectrum_rows(plasma, damping, oscillators, w_min, w_max, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = imaginaryAxis)]
pub fn imaginary_axis(
    plasma: f64,
    damping: f64,
    oscillators: &[f64],
    xi_min: f64,
    xi_max: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    imaginary_rows(plasma, damping, oscillators, xi_min, xi_max, count)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pressureCurve)]
pub fn pressure_curve(
    plasma: f64,
    damping: f64,
    oscillators: &[f64],
    d_min: f64,
    d_max: f64,
    count: usize,
    temperature: f64,
) -> Result<Vec<f64>, JsError> {
    pressure_rows(
        plasma,
        damping,
        oscillators,
        d_min,
        d_max,
        count,
        temperature,
    )
    .map_err(|e| JsError::new(&e))
}
