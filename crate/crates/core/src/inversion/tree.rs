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

//! Multi-output CART regression trees.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Hyperparams, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// The leaf's training rows occupy `leaf_rows[offset..offset + count]`,
    /// repeats included; its value is their mean target vector.
    Leaf { offset: usize, count: usize },
}

/// Flat node array; node 0 is the root. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub leaf_rows: Vec<u32>,
}

impl Tree {
    /// A single leaf averaging the given target rows.
    pub fn leaf(rows: Vec<u32>) -> Self {
        Self {
            nodes: vec![Node::Leaf {
                offset: 0,
                count: rows.len(),
            }],
            leaf_rows: rows,
        }
    }

    pub fn leaf_for(&self, x: &[f64]) -> &[u32] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { offset, count } => return &self.leaf_rows[*offset..offset + count],
            }
        }
    }

    /// Mean target vector of the leaf reached by `x`.
    pub fn predict(&self, x: &[f64], targets: &Matrix) -> Vec<f64> {
        leaf_mean(self.leaf_for(x), targets)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Structural checks used after deserialization.
    pub fn validate(&self, n_features: usize, n_targets: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::input("tree has no nodes"));
        }
        for node in &self.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features
                        || !threshold.is_finite()
                        || *left >= self.nodes.len()
                        || *right >= self.nodes.len()
                    {
                        return Err(Error::input("malformed split node"));
                    }
                }
                Node::Leaf { offset, count } => {
                    if *count == 0 || offset + count > self.leaf_rows.len() {
                        return Err(Error::input("malformed leaf node"));
                    }
                }
            }
        }
        if self.leaf_rows.iter().any(|&r| r as usize >= n_targets) {
            return Err(Error::input("leaf references a missing training row"));
        }
        Ok(())
    }
}

pub(crate) fn leaf_mean(rows: &[u32], targets: &Matrix) -> Vec<f64> {
    let mut acc = vec![0.0; targets.cols()];
    for &r in rows {
        for (a, v) in acc.iter_mut().zip(targets.row(r as usize)) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// Fits a tree on the rows listed in `rows` (repeats allowed, as produced by
/// bootstrap resampling).
///
/// Splits maximize the reduction of the summed per-output squared error. At
/// every node ⌈max_features_fraction·p⌉ features are drawn without
/// replacement; ties go to the lowest feature index, then lowest threshold.
pub fn fit_tree(
    x: &Matrix,
    y: &Matrix,
    rows: &[usize],
    hyper: &Hyperparams,
    rng: &mut impl Rng,
) -> Result<Tree> {
    if rows.is_empty() || x.rows() == 0 {
        return Err(Error::input("cannot fit a tree on zero rows"));
    }
    if x.rows() != y.rows() {
        return Err(Error::input(format!(
            "feature rows ({}) and target rows ({}) differ",
            x.rows(),
            y.rows()
        )));
    }
    if x.data().iter().chain(y.data()).any(|v| !v.is_finite()) {
        return Err(Error::input("tree inputs must be finite"));
    }
    hyper.validate()?;
    let columns: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
    let mut builder = Builder {
        columns: &columns,
        y,
        hyper,
        n_candidates: hyper.features_per_split(x.cols()),
        nodes: Vec::new(),
        leaf_rows: Vec::new(),
        sort_buf: Vec::with_capacity(rows.len()),
        left_sum: vec![0.0; y.cols()],
    };
    let mut rows = rows.to_vec();
    builder.grow(&mut rows, 0, rng);
    Ok(Tree {
        nodes: builder.nodes,
        leaf_rows: builder.leaf_rows,
    })
}

struct Builder<'a> {
    columns: &'a [Vec<f64>],
    y: &'a Matrix,
    hyper: &'a Hyperparams,
    n_candidates: usize,
    nodes: Vec<Node>,
    leaf_rows: Vec<u32>,
    sort_buf: Vec<usize>,
    left_sum: Vec<f64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize, rng: &mut impl Rng) -> usize {
        let index = self.nodes.len();
        let n_out = self.y.cols();
        let mut total = vec![0.0; n_out];
        let mut sum_sq = 0.0;
        for &r in rows.iter() {
            for (t, v) in total.iter_mut().zip(self.y.row(r)) {
                *t += v;
                sum_sq += v * v;
            }
        }
        let n = rows.len() as f64;
        let parent_score: f64 = total.iter().map(|s| s * s).sum::<f64>() / n;
        let impurity = sum_sq - parent_score;

        let can_split = self.hyper.max_depth.is_none_or(|m| depth < m)
            && rows.len() >= 2 * self.hyper.min_samples_leaf
            && impurity > 1e-14 * sum_sq.max(f64::MIN_POSITIVE);
        let best = if can_split {
            self.best_split(rows, &total, rng)
                .filter(|b| b.score - parent_score >= -1e-12 * impurity.max(f64::MIN_POSITIVE))
        } else {
            None
        };

        let Some(best) = best else {
            self.nodes.push(Node::Leaf {
                offset: self.leaf_rows.len(),
                count: rows.len(),
            });
            self.leaf_rows.extend(rows.iter().map(|&r| r as u32));
            return index;
        };

        self.nodes.push(Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: 0,
            right: 0,
        });
        let column = &self.columns[best.feature];
        let (mut left_rows, mut right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| column[r] <= best.threshold);
        let left = self.grow(&mut left_rows, depth + 1, rng);
        let right = self.grow(&mut right_rows, depth + 1, rng);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[index]
        {
            *l = left;
            *r = right;
        }
        index
    }

    fn best_split(
        &mut self,
        rows: &[usize],
        total: &[f64],
        rng: &mut impl Rng,
    ) -> Option<BestSplit> {
        let n_features = self.columns.len();
        let mut features = rand::seq::index::sample(rng, n_features, self.n_candidates).into_vec();
        features.sort_unstable();
        let n = rows.len();
        let min_leaf = self.hyper.min_samples_leaf;
        let mut best: Option<BestSplit> = None;
        for &f in &features {
            let column = &self.columns[f];
            self.sort_buf.clear();
            self.sort_buf.extend_from_slice(rows);
            self.sort_buf
                .sort_by(|&a, &b| column[a].total_cmp(&column[b]).then(a.cmp(&b)));
            if column[self.sort_buf[0]] == column[self.sort_buf[n - 1]] {
                continue;
            }
            self.left_sum.iter_mut().for_each(|v| *v = 0.0);
            for pos in 0..n - 1 {
                let r = self.sort_buf[pos];
                for (s, v) in self.left_sum.iter_mut().zip(self.y.row(r)) {
                    *s += v;
                }
                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let (lo, hi) = (column[r], column[self.sort_buf[pos + 1]]);
                if lo == hi {
                    continue;
                }
                let (nl, nr) = (n_left as f64, n_right as f64);
                let score: f64 = self
                    .left_sum
                    .iter()
                    .zip(total)
                    .map(|(&l, &t)| {
                        let rr = t - l;
                        l * l / nl + rr * rr / nr
                    })
                    .sum();
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: midpoint(lo, hi),
                        score,
                    });
                }
            }
        }
        best
    }
}

// a ≤ mid < b
fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + 0.5 * (b - a);
    if mid < b && mid >= a {
        mid
    } else {
        a
    }
}
