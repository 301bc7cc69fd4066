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

//! Supervised inversion from force curves to permittivity spectra with bagged
//! multi-output regression trees.
//!
//! Features are signed-log force values; targets are the signed-log
//! concatenation [ε′ ‖ ε″] over the frequency grid. Every score reported here
//! is computed in that transformed target space.

mod forest;
mod search;
mod transform;
mod tree;

pub use forest::{fit_forest, Forest, TrainingMetadata};
pub use search::{grid_search, HyperGrid, ScoreRow, SearchResult};
pub use transform::SignedLog;
pub use tree::{fit_tree, Node, Tree};

use serde::{Deserialize, Serialize};

use crate::dielectric::{FrequencyGrid, SpectrumSample};
use crate::error::{Error, Result};
use crate::lifshitz::{CurveKind, ForceCurve};
use crate::synth::{Dataset, Partition, Sample};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::input(format!(
                "matrix data length {} is not {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::input("ragged matrix rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn map_rows(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self.iter_rows().map(f).collect();
        if rows.is_empty() {
            return Self::new(0, self.cols, Vec::new());
        }
        Self::from_rows(&rows)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// `None` grows trees until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features_fraction: f64,
    pub bootstrap: bool,
    /// Independently trained forests whose predictions are averaged.
    pub n_ensembles: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: None,
            min_samples_leaf: 2,
            max_features_fraction: 1.0 / 3.0,
            bootstrap: true,
            n_ensembles: 4,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.n_ensembles == 0 {
            return Err(Error::config("n_trees and n_ensembles must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::config("min_samples_leaf must be at least 1"));
        }
        if !(self.max_features_fraction > 0.0 && self.max_features_fraction <= 1.0) {
            return Err(Error::config(format!(
                "max_features_fraction must lie in (0, 1], got {}",
                self.max_features_fraction
            )));
        }
        if self.max_depth == Some(0) {
            return Err(Error::config("max_depth must be at least 1 (or unlimited)"));
        }
        Ok(())
    }

    /// ⌈fraction · n_features⌉, at least one.
    pub fn features_per_split(&self, n_features: usize) -> usize {
        let k = (self.max_features_fraction * n_features as f64 - 1e-9).ceil() as usize;
        k.clamp(1, n_features.max(1))
    }
}

/// The training partition of a dataset. Only obtainable from
/// [`TrainingSet::from_dataset`], so validation samples cannot leak into
/// fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    ids: Vec<u64>,
    features: Matrix,
    targets: Matrix,
    separations: Vec<f64>,
    curve_kind: CurveKind,
    grid: FrequencyGrid,
    dataset_hash: String,
}

impl TrainingSet {
    pub fn from_dataset(dataset: &Dataset) -> Result<Self> {
        Self::from_samples(
            dataset.partition(Partition::Train),
            &dataset.spec.separations,
            dataset.spec.curve_kind,
            &dataset.spec.grid,
            dataset.spec.hash(),
        )
    }

    /// Rows are stored sorted by sample id, so the input order is irrelevant.
    pub(crate) fn from_samples<'a>(
        samples: impl IntoIterator<Item = &'a Sample>,
        separations: &[f64],
        curve_kind: CurveKind,
        grid: &FrequencyGrid,
        dataset_hash: String,
    ) -> Result<Self> {
        let mut samples: Vec<&Sample> = samples.into_iter().collect();
        samples.sort_by_key(|s| s.id);
        if samples.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::input("duplicate sample ids in training set"));
        }
        for s in &samples {
            if s.curve.separations != separations || s.curve.kind != curve_kind {
                return Err(Error::input(format!(
                    "sample {} does not share the dataset separations",
                    s.id
                )));
            }
            if &s.spectrum.grid != grid {
                return Err(Error::input(format!("sample {} has a foreign grid", s.id)));
            }
        }
        let features: Vec<Vec<f64>> = samples.iter().map(|s| s.curve.values.clone()).collect();
        let targets: Vec<Vec<f64>> = samples.iter().map(|s| s.spectrum.to_target()).collect();
        Ok(Self {
            ids: samples.iter().map(|s| s.id).collect(),
            features: matrix_or_empty(&features, separations.len())?,
            targets: matrix_or_empty(&targets, 2 * grid.len())?,
            separations: separations.to_vec(),
            curve_kind,
            grid: grid.clone(),
            dataset_hash,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    pub fn separations(&self) -> &[f64] {
        &self.separations
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Rows at the given positions, for cross-validation folds.
    pub(crate) fn subset(&self, positions: &[usize]) -> Self {
        Self {
            ids: positions.iter().map(|&i| self.ids[i]).collect(),
            features: self.features.select_rows(positions),
            targets: self.targets.select_rows(positions),
            ..self.clone()
        }
    }
}

fn matrix_or_empty(rows: &[Vec<f64>], cols: usize) -> Result<Matrix> {
    if rows.is_empty() {
        Matrix::new(0, cols, Vec::new())
    } else {
        Matrix::from_rows(rows)
    }
}

/// Held-out samples, used only for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    pub ids: Vec<u64>,
    pub curves: Vec<ForceCurve>,
    pub spectra: Vec<SpectrumSample>,
}

impl EvaluationSet {
    pub fn validation(dataset: &Dataset) -> Self {
        Self::from_samples(dataset.partition(Partition::Validation))
    }

    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a Sample>) -> Self {
        let mut ids = Vec::new();
        let mut curves = Vec::new();
        let mut spectra = Vec::new();
        for s in samples {
            ids.push(s.id);
            curves.push(s.curve.clone());
            spectra.push(s.spectrum.clone());
        }
        Self {
            ids,
            curves,
            spectra,
        }
    }

    pub(crate) fn from_training(set: &TrainingSet) -> Result<Self> {
        let mut curves = Vec::with_capacity(set.len());
        let mut spectra = Vec::with_capacity(set.len());
        for i in 0..set.len() {
            curves.push(ForceCurve::new(
                set.separations.clone(),
                set.features.row(i).to_vec(),
                set.curve_kind,
            )?);
            spectra.push(SpectrumSample::from_target(
                set.grid.clone(),
                set.targets.row(i),
            )?);
        }
        Ok(Self {
            ids: set.ids.clone(),
            curves,
            spectra,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Coefficient of determination averaged over output columns; columns with
/// zero variance in `truth` are skipped.
pub fn r2_score(pred: &Matrix, truth: &Matrix) -> Result<f64> {
    if pred.rows() != truth.rows() || pred.cols() != truth.cols() {
        return Err(Error::input(format!(
            "shape mismatch: prediction {}×{} vs truth {}×{}",
            pred.rows(),
            pred.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    if truth.rows() < 2 {
        return Err(Error::input("R² needs at least two rows"));
    }
    let n = truth.rows() as f64;
    let mut total = 0.0;
    let mut retained = 0usize;
    for j in 0..truth.cols() {
        let mean = (0..truth.rows()).map(|i| truth.row(i)[j]).sum::<f64>() / n;
        let (mut ss_res, mut ss_tot) = (0.0, 0.0);
        for i in 0..truth.rows() {
            let t = truth.row(i)[j];
            ss_res += (t - pred.row(i)[j]).powi(2);
            ss_tot += (t - mean).powi(2);
        }
        if ss_tot > 0.0 {
            total += 1.0 - ss_res / ss_tot;
            retained += 1;
        }
    }
    if retained == 0 {
        return Err(Error::UndefinedScore(
            "every output column has zero variance".into(),
        ));
    }
    Ok(total / retained as f64)
}
