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

//! Signed-logarithmic scaling of features and targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// x ↦ sign(x)·log10(1 + |x|/s) per column, with s the training median of |x|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub scales: Vec<f64>,
}

impl SignedLog {
    /// Fits one scale per column of the row-major `rows`. Columns whose median
    /// magnitude is zero get scale 1.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>, width: usize) -> Result<Self> {
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
        for row in rows {
            if row.len() != width {
                return Err(Error::input(format!(
                    "row of length {} in a {width}-column transform fit",
                    row.len()
                )));
            }
            for (c, v) in columns.iter_mut().zip(row) {
                c.push(v.abs());
            }
        }
        if columns.first().is_some_and(Vec::is_empty) {
            return Err(Error::input("cannot fit a transform on zero rows"));
        }
        let scales = columns
            .into_iter()
            .map(|mut c| {
                let m = median(&mut c);
                if m > 0.0 && m.is_finite() {
                    m
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { scales })
    }

    pub fn width(&self) -> usize {
        self.scales.len()
    }

    pub fn forward(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.scales)
            .map(|(&x, &s)| x.signum() * (x.abs() / s).ln_1p() / std::f64::consts::LN_10)
            .collect()
    }

    pub fn inverse(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.scales)
            .map(|(&z, &s)| {
                if z == 0.0 {
                    0.0
                } else {
                    z.signum() * s * (z.abs() * std::f64::consts::LN_10).exp_m1()
                }
            })
            .collect()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
