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

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// Invalid configuration (ranges, fractions, hyperparameters).
    #[error("configuration error: {0}")]
    Config(String),
    /// A series or quadrature failed to converge within its budget.
    #[error("{what} did not converge (Matsubara index {index}, separation {separation_m} m)")]
    Convergence {
        what: &'static str,
        index: usize,
        separation_m: f64,
    },
    /// Numerical failure not tied to a single series term.
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("undefined score: {0}")]
    UndefinedScore(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
