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

//! Exact SI constants used throughout the crate.

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Angular frequency (rad/s) of a photon with energy 1 eV.
pub const EV_TO_RAD_PER_S: f64 = ELEMENTARY_CHARGE / HBAR;

pub fn ev_to_rad_per_s(energy_ev: f64) -> f64 {
    energy_ev * EV_TO_RAD_PER_S
}

pub fn rad_per_s_to_ev(omega: f64) -> f64 {
    omega / EV_TO_RAD_PER_S
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electron_volt_conversion() {
        // ħω = 1 eV  →  ω ≈ 1.519267e15 rad/s
        assert!((EV_TO_RAD_PER_S / 1.5192674488e15 - 1.0).abs() < 1e-10);
        assert!((rad_per_s_to_ev(ev_to_rad_per_s(2.5)) - 2.5).abs() < 1e-15);
    }
}
