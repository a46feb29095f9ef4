//! Index sets T in R^n: Gaussian width, radius, and exact suprema of
//! |  ||Mx||_2 - target ||x||_2  | over T.
//!
//! Supported sets keep every supremum exactly computable: finite point
//! lists (max over points), and the s-sparse unit sphere (top-s selection
//! for widths, support enumeration with per-support singular values for
//! deviations).

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rng::trial_rng;

#[derive(Debug, Clone, Serialize)]
pub enum SetSpec {
    /// Explicit point list; the supremum is a maximum.
    FinitePoints(Vec<Vec<f64>>),
    /// s-sparse vectors on the unit sphere of R^n.
    SparseSphere { n: usize, s: usize },
    /// One point (a finite list of size one).
    Singleton(Vec<f64>),
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("set has no points or inconsistent dimensions")]
    InvalidSet,
    #[error("{supports} supports of size {s} exceed the enumeration cap {cap}")]
    EnumerationTooLarge { supports: u128, s: usize, cap: u128 },
    #[error("matrix has {got} columns but the set lives in R^{expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// Enumeration cap for sparse-support suprema.
pub const SUPPORT_CAP: u128 = 100_000;

impl SetSpec {
    pub fn singleton(x: Vec<f64>) -> Self {
        SetSpec::Singleton(x)
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            SetSpec::FinitePoints(pts) => pts.first().map_or(0, |p| p.len()),
            SetSpec::SparseSphere { n, .. } => *n,
            SetSpec::Singleton(x) => x.len(),
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            SetSpec::FinitePoints(pts) => {
                let d = pts.first().ok_or(GeometryError::InvalidSet)?.len();
                if d == 0 || pts.iter().any(|p| p.len() != d) {
                    return Err(GeometryError::InvalidSet);
                }
                Ok(())
            }
            SetSpec::SparseSphere { n, s } => {
                if *s >= 1 && s <= n {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidSet)
                }
            }
            SetSpec::Singleton(x) => {
                if x.is_empty() {
                    Err(GeometryError::InvalidSet)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn points(&self) -> Option<Vec<&[f64]>> {
        match self {
            SetSpec::FinitePoints(pts) => Some(pts.iter().map(|p| p.as_slice()).collect()),
            SetSpec::Singleton(x) => Some(vec![x.as_slice()]),
            SetSpec::SparseSphere { .. } => None,
        }
    }

    /// Exact per-draw supremum of <g, y> over the set.
    fn sup_inner(&self, g: &[f64]) -> f64 {
        match self.points() {
            Some(pts) => pts
                .iter()
                .map(|p| p.iter().zip(g).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
            None => {
                let SetSpec::SparseSphere { s, .. } = self else { unreachable!() };
                // sup over s-sparse unit vectors is the norm of the top-s
                // magnitudes of g
                let mut sq: Vec<f64> = g.iter().map(|x| x * x).collect();
                let s = *s;
                if s < sq.len() {
                    sq.select_nth_unstable_by(s - 1, |a, b| b.total_cmp(a));
                }
                sq[..s].iter().sum::<f64>().sqrt()
            }
        }
    }
}

/// Monte-Carlo Gaussian width estimate with a normal-approximation CI.
#[derive(Debug, Clone, Serialize)]
pub struct WidthEstimate {
    pub estimate: f64,
    /// 95% normal-approximation interval.
    pub ci: (f64, f64),
    pub std_error: f64,
    pub trials: usize,
}

/// E sup_{y in T} <g, y> by averaging exact per-draw suprema.
pub fn gaussian_width(t: &SetSpec, trials: usize, seed: u64) -> Result<WidthEstimate, GeometryError> {
    t.validate()?;
    assert!(trials >= 1000, "need at least 1e3 draws");
    let n = t.ambient_dim();
    let sups: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            t.sup_inner(&g)
        })
        .collect();
    let mean = sups.iter().sum::<f64>() / trials as f64;
    let var = sups.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (trials as f64 - 1.0);
    let se = (var / trials as f64).sqrt();
    let z = 1.959964;
    Ok(WidthEstimate { estimate: mean, ci: (mean - z * se, mean + z * se), std_error: se, trials })
}

/// sup of Euclidean norms over the set; exact.
pub fn radius(t: &SetSpec) -> f64 {
    match t.points() {
        Some(pts) => pts
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
        None => 1.0,
    }
}

/// n choose k without overflow surprises at the scales used here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out
}

/// Exact sup over T of | ||Mx||_2 - target ||x||_2 |.
///
/// Finite sets take a maximum over points. For the s-sparse sphere, each
/// support S contributes max(sigma_max(M_S) - target, target - sigma_min(M_S))
/// through the extreme singular values of the s-column restriction; supports
/// are enumerated up to [`SUPPORT_CAP`].
pub fn exact_sup_deviation(m: &DMatrix<f64>, t: &SetSpec, target: f64) -> Result<f64, GeometryError> {
    t.validate()?;
    if m.ncols() != t.ambient_dim() {
        return Err(GeometryError::DimensionMismatch { got: m.ncols(), expected: t.ambient_dim() });
    }
    match t {
        SetSpec::FinitePoints(_) | SetSpec::Singleton(_) => {
            let mut worst = 0.0f64;
            for p in t.points().expect("finite") {
                let x = DVector::from_column_slice(p);
                let dev = ((m * &x).norm() - target * x.norm()).abs();
                worst = worst.max(dev);
            }
            Ok(worst)
        }
        SetSpec::SparseSphere { n, s } => {
            let count = binomial(*n, *s);
            if count > SUPPORT_CAP {
                return Err(GeometryError::EnumerationTooLarge {
                    supports: count,
                    s: *s,
                    cap: SUPPORT_CAP,
                });
            }
            let (lo, hi) = support_singular_range(m, *n, *s);
            Ok((hi - target).max(target - lo).max(0.0))
        }
    }
}

/// Extreme singular values over all s-column restrictions of M.
pub fn support_singular_range(m: &DMatrix<f64>, n: usize, s: usize) -> (f64, f64) {
    let mut sig_lo = f64::INFINITY;
    let mut sig_hi: f64 = 0.0;
    let mut cols = DMatrix::<f64>::zeros(m.nrows(), s);
    for support in (0..n).combinations(s) {
        for (j, &col) in support.iter().enumerate() {
            cols.set_column(j, &m.column(col));
        }
        let gram = cols.transpose() * &cols;
        let eig = gram.symmetric_eigenvalues();
        let max = eig.iter().copied().fold(0.0f64, f64::max).max(0.0);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
        sig_hi = sig_hi.max(max.sqrt());
        sig_lo = sig_lo.min(min.sqrt());
    }
    (sig_lo, sig_hi)
}

/// Exact mean of the chi distribution with n degrees of freedom,
/// E ||g||_2 = sqrt(2) Gamma((n+1)/2) / Gamma(n/2); the half-integer gamma
/// ratio is evaluated by recursion.
pub fn chi_mean(n: usize) -> f64 {
    // gamma((n+1)/2) / gamma(n/2) via ln-gamma recursion on half-integers
    let ln_gamma_half = |mut twice: usize| -> f64 {
        // Gamma(twice/2): twice/2 in {1/2, 1, 3/2, ...}
        let mut acc = 0.0f64;
        while twice > 2 {
            twice -= 2;
            acc += (twice as f64 / 2.0).ln();
        }
        if twice == 1 {
            acc + 0.5 * std::f64::consts::PI.ln()
        } else {
            acc
        }
    };
    2.0f64.sqrt() * (ln_gamma_half(n + 1) - ln_gamma_half(n)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn chi_mean_values() {
        // n = 1: E|g| = sqrt(2/pi); n = 2: sqrt(pi/2); n = 4: 3/2 sqrt(pi/2) / ...
        assert_relative_eq!(chi_mean(1), (2.0 / std::f64::consts::PI).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(chi_mean(2), (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(chi_mean(4), 1.879971, max_relative = 1e-6);
    }

    #[test]
    fn width_of_singleton_is_zero() {
        let t = SetSpec::singleton(vec![3.0, -4.0]);
        let w = gaussian_width(&t, 20_000, 1).unwrap();
        assert!(w.ci.0 <= 0.0 && 0.0 <= w.ci.1, "{w:?}");
    }

    #[test]
    fn width_of_full_sphere_matches_chi_mean() {
        let n = 4;
        let t = SetSpec::SparseSphere { n, s: n };
        let w = gaussian_width(&t, 200_000, 2).unwrap();
        let exact = chi_mean(n);
        assert!(
            (w.estimate - exact).abs() < 4.0 * w.std_error + 1e-3,
            "estimate {} vs exact {exact}",
            w.estimate
        );
    }

    #[test]
    fn sparse_width_obeys_log_bound() {
        // w^2 <= 4 s log(en/s)
        let t = SetSpec::SparseSphere { n: 100, s: 5 };
        let w = gaussian_width(&t, 50_000, 3).unwrap();
        let cap = 4.0 * 5.0 * (std::f64::consts::E * 100.0 / 5.0).ln();
        assert!(w.estimate * w.estimate <= cap, "{} vs {cap}", w.estimate * w.estimate);
    }

    #[test]
    fn radius_cases() {
        assert_relative_eq!(radius(&SetSpec::SparseSphere { n: 8, s: 2 }), 1.0);
        let t = SetSpec::FinitePoints(vec![vec![3.0, 4.0], vec![0.0, 1.0]]);
        assert_relative_eq!(radius(&t), 5.0);
    }

    #[test]
    fn width_dominates_radius_over_sqrt_2pi_when_zero_in_set() {
        let t = SetSpec::FinitePoints(vec![vec![0.0, 0.0], vec![3.0, 4.0]]);
        let w = gaussian_width(&t, 50_000, 4).unwrap();
        let floor = radius(&t) / (2.0 * std::f64::consts::PI).sqrt();
        assert!(w.estimate + 3.0 * w.std_error >= floor);
    }

    #[test]
    fn deviation_of_exact_isometry_is_zero() {
        let m = DMatrix::<f64>::identity(4, 4) * 2.5;
        let t = SetSpec::SparseSphere { n: 4, s: 2 };
        let dev = exact_sup_deviation(&m, &t, 2.5).unwrap();
        assert!(dev.abs() < 1e-12);
    }

    #[test]
    fn deviation_of_diagonal_counter_example() {
        // M = diag(2, 0), target 1, 1-sparse sphere: max(|2-1|, |0-1|) = 1
        let m = DMatrix::from_diagonal(&nalgebra::dvector![2.0, 0.0]);
        let t = SetSpec::SparseSphere { n: 2, s: 1 };
        assert_relative_eq!(exact_sup_deviation(&m, &t, 1.0).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let m = DMatrix::<f64>::identity(4, 40);
        let t = SetSpec::SparseSphere { n: 40, s: 10 };
        assert!(matches!(
            exact_sup_deviation(&m, &t, 1.0),
            Err(GeometryError::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn sparse_deviation_dominates_random_search() {
        // random s-sparse unit vectors can only lower-bound the exact sup
        let mut rng = trial_rng(11, 0);
        let m = crate::ensembles::sample_matrix_with_rng(
            &crate::ensembles::EnsembleSpec::gaussian(6, 4),
            &mut rng,
        );
        let t = SetSpec::SparseSphere { n: 4, s: 2 };
        let target = 2.0;
        let exact = exact_sup_deviation(&m, &t, target).unwrap();
        let mut best = 0.0f64;
        for _ in 0..100_000 {
            let i = rng.random_range(0..4usize);
            let mut j = rng.random_range(0..4usize);
            while j == i {
                j = rng.random_range(0..4usize);
            }
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let norm = (a * a + b * b).sqrt();
            let mut x = DVector::zeros(4);
            x[i] = a / norm;
            x[j] = b / norm;
            best = best.max(((&m * &x).norm() - target).abs());
        }
        assert!(exact >= best - 1e-9, "exact {exact} vs sampled {best}");
        assert!(exact - best <= 0.05, "random search should come close: {exact} vs {best}");
    }

    #[test]
    fn width_scales_linearly() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-0.5, 0.5]];
        let t1 = SetSpec::FinitePoints(pts.clone());
        let t2 = SetSpec::FinitePoints(
            pts.iter().map(|p| p.iter().map(|x| 3.0 * x).collect()).collect(),
        );
        let w1 = gaussian_width(&t1, 30_000, 5).unwrap();
        let w2 = gaussian_width(&t2, 30_000, 5).unwrap();
        // same seed: per-draw suprema scale exactly, so the ratio is exact
        assert_relative_eq!(w2.estimate, 3.0 * w1.estimate, max_relative = 1e-12);
        assert_relative_eq!(radius(&t2), 3.0 * radius(&t1), max_relative = 1e-12);
    }

    #[test]
    fn width_is_translation_invariant() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 2.0]];
        let shifted: Vec<Vec<f64>> =
            pts.iter().map(|p| vec![p[0] + 5.0, p[1] - 2.0]).collect();
        let w1 = gaussian_width(&SetSpec::FinitePoints(pts), 100_000, 6).unwrap();
        let w2 = gaussian_width(&SetSpec::FinitePoints(shifted), 100_000, 7).unwrap();
        let gap = (w1.estimate - w2.estimate).abs();
        let combined = 2.0 * (w1.std_error + w2.std_error);
        assert!(gap <= combined + 0.02, "gap {gap} vs {combined}");
    }

    #[test]
    fn width_is_monotone_under_inclusion() {
        let small = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let mut big = small.clone();
        big.push(vec![2.0, 2.0]);
        let ws = gaussian_width(&SetSpec::FinitePoints(small), 30_000, 8).unwrap();
        let wb = gaussian_width(&SetSpec::FinitePoints(big), 30_000, 8).unwrap();
        // same seed: per-draw sup over the superset dominates pointwise
        assert!(wb.estimate >= ws.estimate);
    }
}
