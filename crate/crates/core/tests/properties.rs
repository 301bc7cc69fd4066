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

mod support;

use support::invariants as inv;

macro_rules! property {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = inv::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

property!(
    imaginary_axis_decreases,
    passive_on_real_axis,
    continuation_consistency,
    high_frequency_limit,
    pressure_decays,
    identical_materials_attract,
    energy_pressure_consistency,
    ideal_metal_limits,
    bounded_by_ideal_metal,
    material_symmetry,
    quadrature_convergence,
    generated_spectra_passive,
    generated_curves_attract,
    dataset_round_trip,
    plasma_frequency_log_uniform,
    ensemble_mean,
    tree_removal_round_trip,
    transform_round_trip,
    permutation_invariance,
    overfit_sanity,
    generalization_direction,
    metrics_zero_iff_equal,
    sweep_consistency,
);

#[test]
fn every_invariant_is_listed() {
    assert_eq!(inv::all().len(), 23);
}
