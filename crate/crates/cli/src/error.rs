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

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] casimir_core::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    /// 2 configuration, 3 input data, 4 numerical convergence.
    pub fn exit_code(&self) -> i32 {
        use casimir_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Core(e) => match e {
                E::Config(_) => 2,
                E::Input(_) | E::Domain(_) | E::Io(_) | E::Csv(_) | E::Json(_) => 3,
                E::Convergence { .. } | E::Numerical(_) | E::UndefinedScore(_) => 4,
            },
        }
    }
}
