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

//! Cross-validated grid search over forest hyperparameters, scored by R².

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fit_forest, EvaluationSet, Hyperparams, TrainingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperGrid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_leaf: Vec<usize>,
    pub max_features_fraction: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            n_trees: vec![100, 200, 400],
            max_depth: vec![Some(8), Some(16), None],
            min_samples_leaf: vec![1, 2, 5],
            max_features_fraction: vec![1.0 / 3.0, 1.0],
        }
    }
}

impl HyperGrid {
    /// Grid containing only `hyper`.
    pub fn single(hyper: &Hyperparams) -> Self {
        Self {
            n_trees: vec![hyper.n_trees],
            max_depth: vec![hyper.max_depth],
            min_samples_leaf: vec![hyper.min_samples_leaf],
            max_features_fraction: vec![hyper.max_features_fraction],
        }
    }

    /// Cartesian product; `base` supplies the fields that are not searched.
    pub fn points(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &min_samples_leaf in &self.min_samples_leaf {
                    for &max_features_fraction in &self.max_features_fraction {
                        out.push(Hyperparams {
                            n_trees,
                            max_depth,
                            min_samples_leaf,
                            max_features_fraction,
                            ..*base
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub hyper: Hyperparams,
    pub mean_r2: f64,
    pub fold_r2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Hyperparams,
    pub table: Vec<ScoreRow>,
}

/// Validation split inside the training partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Folds {
    KFold(usize),
    Holdout(f64),
}

// smaller n_trees first, then shallower (unlimited is deepest)
fn simpler(a: &Hyperparams, b: &Hyperparams) -> bool {
    let depth = |h: &Hyperparams| h.max_depth.unwrap_or(usize::MAX);
    (a.n_trees, depth(a)) < (b.n_trees, depth(b))
}

/// Scores every grid point by cross-validated R² on `train` alone.
///
/// `folds ≥ 2` runs k-fold cross-validation; `folds = 1` requires
/// `holdout_fraction` and scores a single random holdout.
pub fn grid_search(
    train: &TrainingSet,
    grid: &HyperGrid,
    base: &Hyperparams,
    folds: usize,
    holdout_fraction: Option<f64>,
    seed: u64,
) -> Result<SearchResult> {
    let points = grid.points(base);
    if points.is_empty() {
        return Err(Error::config("hyperparameter grid is empty"));
    }
    let scheme = match (folds, holdout_fraction) {
        (0, _) => return Err(Error::config("folds must be at least 1")),
        (1, Some(f)) if f > 0.0 && f < 1.0 => Folds::Holdout(f),
        (1, _) => {
            return Err(Error::config(
                "folds = 1 needs a holdout_fraction in (0, 1)",
            ))
        }
        (k, _) => Folds::KFold(k),
    };
    let splits = fold_splits(train.len(), scheme, seed)?;

    let mut table = Vec::with_capacity(points.len());
    for hyper in points {
        hyper.validate()?;
        let mut fold_r2 = Vec::with_capacity(splits.len());
        for (k, (fit_rows, score_rows)) in splits.iter().enumerate() {
            let fit = train.subset(fit_rows);
            let held = EvaluationSet::from_training(&train.subset(score_rows))?;
            let forest = fit_forest(&fit, &hyper, seed.wrapping_add(k as u64))?;
            fold_r2.push(forest.score(&held)?);
        }
        let mean_r2 = fold_r2.iter().sum::<f64>() / fold_r2.len() as f64;
        log::info!("grid point {hyper:?}: mean R² {mean_r2:.5}");
        table.push(ScoreRow {
            hyper,
            mean_r2,
            fold_r2,
        });
    }

    let mut best = &table[0];
    for row in &table[1..] {
        if row.mean_r2 > best.mean_r2
            || (row.mean_r2 == best.mean_r2 && simpler(&row.hyper, &best.hyper))
        {
            best = row;
        }
    }
    Ok(SearchResult {
        best: best.hyper,
        table,
    })
}

type Split = (Vec<usize>, Vec<usize>);

fn fold_splits(n: usize, scheme: Folds, seed: u64) -> Result<Vec<Split>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let splits: Vec<Split> = match scheme {
        Folds::KFold(k) => {
            if n < 2 * k {
                return Err(Error::config(format!(
                    "{k}-fold cross-validation needs at least {} samples, got {n}",
                    2 * k
                )));
            }
            (0..k)
                .map(|f| {
                    let (mut fit, mut held) = (Vec::new(), Vec::new());
                    for (pos, &i) in order.iter().enumerate() {
                        if pos % k == f {
                            held.push(i);
                        } else {
                            fit.push(i);
                        }
                    }
                    fit.sort_unstable();
                    held.sort_unstable();
                    (fit, held)
                })
                .collect()
        }
        Folds::Holdout(fraction) => {
            let n_held = (fraction * n as f64).round() as usize;
            if n_held < 2 || n - n_held < 2 {
                return Err(Error::config(format!(
                    "holdout fraction {fraction} leaves too few samples out of {n}"
                )));
            }
            let mut held = order[..n_held].to_vec();
            let mut fit = order[n_held..].to_vec();
            fit.sort_unstable();
            held.sort_unstable();
            vec![(fit, held)]
        }
    };
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::FrequencyGrid;
    use crate::dielectric::{DielectricModel, SpectrumSample};
    use crate::lifshitz::CurveKind;
    use crate::lifshitz::ForceCurve;
    use crate::synth::Sample;
    use rand::Rng;

    // Two features on {0,1}²; target depends on their XOR, which a depth-1
    // tree cannot represent.
    fn xor_training_set(n: usize) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = FrequencyGrid::new(vec![1.0]).unwrap();
        let model = DielectricModel::drude(1.0, 1.0).unwrap();
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                let a = rng.random_range(0..2) as f64;
                let b = rng.random_range(0..2) as f64;
                let jitter = rng.random_range(0.0..0.1);
                let xor = if (a == 1.0) != (b == 1.0) { 10.0 } else { 1.0 };
                Sample {
                    id: i as u64,
                    model: model.clone(),
                    spectrum: SpectrumSample::new(grid.clone(), vec![xor], vec![xor + 1.0])
                        .unwrap(),
                    curve: ForceCurve::new(
                        vec![1.0, 2.0],
                        vec![-(1.0 + a + jitter), -(1.0 + b + jitter)],
                        CurveKind::Pressure,
                    )
                    .unwrap(),
                }
            })
            .collect();
        TrainingSet::from_samples(
            &samples,
            &[1.0, 2.0],
            CurveKind::Pressure,
            &grid,
            "xor".into(),
        )
        .unwrap()
    }

    fn base() -> Hyperparams {
        Hyperparams {
            n_trees: 5,
            n_ensembles: 1,
            max_features_fraction: 1.0,
            min_samples_leaf: 1,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn single_point_grid() {
        let train = xor_training_set(40);
        let result = grid_search(&train, &HyperGrid::single(&base()), &base(), 3, None, 1).unwrap();
        assert_eq!(result.best, base());
        assert_eq!(result.table.len(), 1);
        assert_eq!(result.table[0].fold_r2.len(), 3);
    }

    #[test]
    fn unlimited_depth_wins_on_xor() {
        let train = xor_training_set(80);
        let grid = HyperGrid {
            max_depth: vec![Some(1), None],
            ..HyperGrid::single(&base())
        };
        let result = grid_search(&train, &grid, &base(), 4, None, 2).unwrap();
        assert_eq!(result.best.max_depth, None);
        assert!(result.table[1].mean_r2 > 0.8);
        assert!(result.table[0].mean_r2 < 0.5);
        let again = grid_search(&train, &grid, &base(), 4, None, 2).unwrap();
        assert_eq!(result.table, again.table);
    }

    #[test]
    fn ties_prefer_fewer_trees() {
        let train = xor_training_set(40);
        let grid = HyperGrid {
            n_trees: vec![3, 1],
            ..HyperGrid::single(&Hyperparams {
                bootstrap: false,
                ..base()
            })
        };
        let b = Hyperparams {
            bootstrap: false,
            ..base()
        };
        let result = grid_search(&train, &grid, &b, 2, None, 0).unwrap();
        // without bootstrap and with all features every tree is identical
        assert_eq!(result.table[0].mean_r2, result.table[1].mean_r2);
        assert_eq!(result.best.n_trees, 1);
    }

    #[test]
    fn holdout_mode() {
        let train = xor_training_set(40);
        assert!(grid_search(&train, &HyperGrid::single(&base()), &base(), 1, None, 0).is_err());
        let r = grid_search(
            &train,
            &HyperGrid::single(&base()),
            &base(),
            1,
            Some(0.25),
            0,
        )
        .unwrap();
        assert_eq!(r.table[0].fold_r2.len(), 1);
    }
}
