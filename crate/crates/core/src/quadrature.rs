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

//! Quadrature rules and special functions used by the force and
//! continuation integrals.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of an interpolatory quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule on [-1, 1], computed by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp.is_finite() {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Laguerre rule for ∫₀^∞ e^{-t} g(t) dt.
///
/// Built with the Golub–Welsch construction: nodes are the eigenvalues of the
/// Jacobi matrix of the Laguerre recurrence and weights are the squared first
/// components of its normalized eigenvectors. Weights far in the tail underflow
/// to zero, which is harmless for the integrands used here.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Laguerre rule needs at least one node");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0
        } else if i + 1 == j || j + 1 == i {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let eigen = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eigen.eigenvectors[(0, k)];
            (eigen.eigenvalues[k], v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Integrate `f` over [a, b] with a fixed-order Gauss–Legendre rule.
pub fn fixed_gauss_legendre(rule: &Rule, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive bisection driven by a fixed Gauss–Legendre panel rule.
///
/// A panel is accepted when the single-panel estimate agrees with the sum of its
/// two halves to within `max(abs_tol, rel_tol·|estimate|)`.
pub struct AdaptiveGaussLegendre {
    rule: Rule,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl AdaptiveGaussLegendre {
    pub fn new(order: usize, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rule: gauss_legendre(order),
            rel_tol,
            abs_tol,
            max_depth: 30,
        }
    }

    /// Returns the integral estimate and whether every panel met the tolerance.
    pub fn integrate(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, bool) {
        if a == b {
            return (0.0, true);
        }
        let whole = fixed_gauss_legendre(&self.rule, a, b, &mut *f);
        self.refine(a, b, whole, 0, f)
    }

    fn refine(
        &self,
        a: f64,
        b: f64,
        whole: f64,
        depth: u32,
        f: &mut impl FnMut(f64) -> f64,
    ) -> (f64, bool) {
        let mid = 0.5 * (a + b);
        let left = fixed_gauss_legendre(&self.rule, a, mid, &mut *f);
        let right = fixed_gauss_legendre(&self.rule, mid, b, &mut *f);
        let halves = left + right;
        if (whole - halves).abs() <= self.abs_tol.max(self.rel_tol * halves.abs()) {
            return (halves, true);
        }
        if depth >= self.max_depth {
            return (halves, false);
        }
        let (l, ok_l) = self.refine(a, mid, left, depth + 1, f);
        let (r, ok_r) = self.refine(mid, b, right, depth + 1, f);
        (l + r, ok_l && ok_r)
    }
}

/// Apéry's constant ζ(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

/// Trilogarithm Li₃(x) for x ∈ [0, 1].
///
/// Direct power series below 1/2; above, the expansion about x = 1 in
/// μ = ln x, which converges for |μ| < 2π.
pub fn trilog(x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "trilog argument {x} outside [0, 1]"
    );
    if x == 1.0 {
        return ZETA3;
    }
    if x <= 0.5 {
        let mut sum = 0.0_f64;
        let mut power = x;
        let mut k = 1.0_f64;
        while power > 1e-18 * sum {
            sum += power / (k * k * k);
            power *= x;
            k += 1.0;
        }
        return sum;
    }
    let mu = x.ln();
    // ζ(3 - k) for k = 0, 1, 3, 4, ... ; the k = 2 slot carries the log term.
    const ZETA_SHIFTED: [(i32, f64); 8] = [
        (0, ZETA3),
        (1, std::f64::consts::PI * std::f64::consts::PI / 6.0),
        (3, -0.5),
        (4, -1.0 / 12.0),
        (6, 1.0 / 120.0),
        (8, -1.0 / 252.0),
        (10, 1.0 / 240.0),
        (12, -1.0 / 132.0),
    ];
    let mut sum = 0.5 * mu * mu * (1.5 - (-mu).ln());
    for &(k, zeta) in &ZETA_SHIFTED {
        let factorial: f64 = (1..=k).map(f64::from).product();
        sum += zeta * mu.powi(k) / factorial;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // degree 15 is the highest exact degree for 8 nodes
        let exact = 2.0 / 15.0;
        let approx = fixed_gauss_legendre(&rule, -1.0, 1.0, |x| x.powi(14));
        assert!((approx - exact).abs() < 1e-14);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments() {
        // ∫ e^{-t} t^k dt = k!
        let rule = gauss_laguerre(60);
        for k in 0..10 {
            let factorial: f64 = (1..=k).map(|i| i as f64).product();
            let approx: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| w * t.powi(k))
                .sum();
            assert!(
                (approx / factorial - 1.0).abs() < 1e-10,
                "moment {k}: {approx}"
            );
        }
    }

    #[test]
    fn laguerre_large_rule_is_sane() {
        let rule = gauss_laguerre(240);
        assert!(rule.weights.iter().all(|w| w.is_finite() && *w >= 0.0));
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let quad = AdaptiveGaussLegendre::new(8, 1e-10, 0.0);
        let w = 1e-3;
        let (value, ok) = quad.integrate(-1.0, 1.0, &mut |x: f64| w / (x * x + w * w));
        assert!(ok);
        let exact = 2.0 * (1.0 / w).atan();
        assert!((value / exact - 1.0).abs() < 1e-9);
    }

    fn trilog_series(x: f64, terms: usize) -> f64 {
        (1..=terms)
            .map(|k| x.powi(k as i32) / (k as f64).powi(3))
            .sum()
    }

    #[test]
    fn trilog_matches_brute_series() {
        for &x in &[0.0, 0.1, 0.5, 0.6, 0.8, 0.95] {
            let brute = trilog_series(x, 20_000);
            assert!((trilog(x) - brute).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn trilog_near_one() {
        assert_eq!(trilog(1.0), ZETA3);
        let x = 1.0 - 2e-10;
        assert!((trilog(x) - ZETA3).abs() < 1e-8);
        // derivative Li₂(1)/1 = π²/6 sets the slope at x = 1
        let h = 1e-6;
        let slope = (trilog(1.0) - trilog(1.0 - h)) / h;
        assert!((slope - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-3);
    }
}
