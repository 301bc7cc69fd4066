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

//! Bagged ensembles of regression trees, averaged over independently trained
//! ensemble members.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transform::SignedLog;
use super::tree::{fit_tree, leaf_mean, Tree};
use super::{EvaluationSet, Hyperparams, Matrix, TrainingSet};
use crate::dielectric::{FrequencyGrid, SpectrumSample};
use crate::error::{Error, Result};
use crate::lifshitz::{CurveKind, ForceCurve};
use crate::parallel::map_range;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    /// SHA-256 of the dataset spec the forest was trained from.
    pub dataset_hash: String,
    pub seed: u64,
    pub n_training_samples: usize,
    /// Training sample ids in row order of `training_targets`.
    pub training_ids: Vec<u64>,
    pub score_space: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub hyper: Hyperparams,
    pub feature_transform: SignedLog,
    pub target_transform: SignedLog,
    pub separations: Vec<f64>,
    pub curve_kind: CurveKind,
    pub grid: FrequencyGrid,
    /// `ensembles[e][t]` is tree `t` of ensemble member `e`.
    pub ensembles: Vec<Vec<Tree>>,
    /// Transformed training targets referenced by the tree leaves.
    pub training_targets: Matrix,
    pub metadata: TrainingMetadata,
}

/// RNG stream for tree `tree` of ensemble member `member`.
fn tree_rng(seed: u64, member: usize, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((member as u64) << 32) | tree as u64);
    rng
}

pub fn fit_forest(train: &TrainingSet, hyper: &Hyperparams, seed: u64) -> Result<Forest> {
    hyper.validate()?;
    if train.len() < 2 {
        return Err(Error::input(format!(
            "forest training needs at least 2 samples, got {}",
            train.len()
        )));
    }
    let width = train.features().cols();
    let feature_transform = SignedLog::fit(train.features().iter_rows(), width)?;
    let target_transform = SignedLog::fit(train.targets().iter_rows(), train.targets().cols())?;
    let x = train
        .features()
        .map_rows(|r| feature_transform.forward(r))?;
    let y = train.targets().map_rows(|r| target_transform.forward(r))?;
    let n = train.len();

    let total = hyper.n_ensembles * hyper.n_trees;
    let fitted = map_range(total, |k| -> Result<Tree> {
        let (member, tree) = (k / hyper.n_trees, k % hyper.n_trees);
        let mut rng = tree_rng(seed, member, tree);
        let rows: Vec<usize> = if hyper.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        fit_tree(&x, &y, &rows, hyper, &mut rng)
    });
    let mut trees = fitted.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
    let ensembles = (0..hyper.n_ensembles)
        .map(|_| trees.by_ref().take(hyper.n_trees).collect())
        .collect();

    Ok(Forest {
        hyper: *hyper,
        feature_transform,
        target_transform,
        separations: train.separations().to_vec(),
        curve_kind: train.curve_kind,
        grid: train.grid().clone(),
        ensembles,
        training_targets: y,
        metadata: TrainingMetadata {
            dataset_hash: train.dataset_hash.clone(),
            seed,
            n_training_samples: n,
            training_ids: train.ids().to_vec(),
            score_space: "signed-log".into(),
        },
    })
}

impl Forest {
    pub fn n_trees(&self) -> usize {
        self.ensembles.iter().map(Vec::len).sum()
    }

    /// Mean over ensemble members of each member's mean leaf vector, in
    /// transformed target space; `x` is already feature-transformed.
    pub fn predict_transformed(&self, x: &[f64]) -> Vec<f64> {
        let width = self.training_targets.cols();
        let mut out = vec![0.0; width];
        for member in &self.ensembles {
            let mut acc = vec![0.0; width];
            for tree in member {
                let leaf = leaf_mean(tree.leaf_for(x), &self.training_targets);
                acc.iter_mut().zip(&leaf).for_each(|(a, v)| *a += v);
            }
            let m = member.len() as f64;
            out.iter_mut().zip(&acc).for_each(|(o, a)| *o += a / m);
        }
        let e = self.ensembles.len() as f64;
        out.iter_mut().for_each(|o| *o /= e);
        out
    }

    fn check_curve(&self, curve: &ForceCurve) -> Result<()> {
        if curve.kind != self.curve_kind {
            return Err(Error::input(format!(
                "curve kind {:?} does not match the model's {:?}",
                curve.kind, self.curve_kind
            )));
        }
        if curve.separations.len() != self.separations.len() {
            return Err(Error::input(format!(
                "curve has {} separations, model expects {}",
                curve.separations.len(),
                self.separations.len()
            )));
        }
        if let Some((i, (a, b))) = curve
            .separations
            .iter()
            .zip(&self.separations)
            .enumerate()
            .find(|(_, (a, b))| a != b)
        {
            return Err(Error::input(format!(
                "separation {i} differs: curve has {a} m, model expects {b} m"
            )));
        }
        Ok(())
    }

    /// Transformed-space prediction for a raw curve.
    pub fn predict_target(&self, curve: &ForceCurve) -> Result<Vec<f64>> {
        self.check_curve(curve)?;
        Ok(self.predict_transformed(&self.feature_transform.forward(&curve.values)))
    }

    pub fn predict(&self, curve: &ForceCurve) -> Result<SpectrumSample> {
        let z = self.predict_target(curve)?;
        SpectrumSample::from_target(self.grid.clone(), &self.target_transform.inverse(&z))
    }

    /// R² in transformed target space over an evaluation set.
    pub fn score(&self, eval: &EvaluationSet) -> Result<f64> {
        let pred = eval
            .curves
            .iter()
            .map(|c| self.predict_target(c))
            .collect::<Result<Vec<_>>>()?;
        let truth: Vec<Vec<f64>> = eval
            .spectra
            .iter()
            .map(|s| self.target_transform.forward(&s.to_target()))
            .collect();
        super::r2_score(&Matrix::from_rows(&pred)?, &Matrix::from_rows(&truth)?)
    }

    /// R² of predicting the training mean everywhere, for comparison.
    pub fn baseline_score(&self, eval: &EvaluationSet) -> Result<f64> {
        let width = self.training_targets.cols();
        let rows = self.training_targets.rows() as f64;
        let mut mean = vec![0.0; width];
        for r in self.training_targets.iter_rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / rows);
        }
        let truth: Vec<Vec<f64>> = eval
            .spectra
            .iter()
            .map(|s| self.target_transform.forward(&s.to_target()))
            .collect();
        let pred = vec![mean; truth.len()];
        super::r2_score(&Matrix::from_rows(&pred)?, &Matrix::from_rows(&truth)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.ensembles.is_empty() || self.ensembles.iter().any(Vec::is_empty) {
            return Err(Error::input("forest has no trees"));
        }
        let n_features = self.separations.len();
        if self.feature_transform.width() != n_features
            || self.target_transform.width() != 2 * self.grid.len()
            || self.training_targets.cols() != 2 * self.grid.len()
        {
            return Err(Error::input("forest transforms do not match its shapes"));
        }
        for tree in self.ensembles.iter().flatten() {
            tree.validate(n_features, self.training_targets.rows())?;
        }
        Ok(())
    }
}
