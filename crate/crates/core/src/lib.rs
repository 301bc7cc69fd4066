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

//! Lifshitz-theory Casimir interactions and their supervised inversion.
//!
//! The forward chain runs from a [`dielectric::DielectricModel`] through
//! [`lifshitz::force_curve`]; [`synth`] assembles training sets from it and
//! [`inversion`] learns the map from force curves back to permittivity
//! spectra with bagged multi-output regression trees. [`analysis`] drives the
//! separation-range sweeps and experiment reconstructions on top.

// comparisons are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod dielectric;
pub mod error;
pub mod inversion;
pub mod io;
pub mod lifshitz;
mod parallel;
pub mod quadrature;
pub mod synth;

pub use error::{Error, Result};
