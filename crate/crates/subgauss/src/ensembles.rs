//! Isotropic sub-Gaussian random matrix ensembles and fixed multipliers.
//!
//! An ensemble is an m x n matrix with i.i.d. entries from a scalar law;
//! unit entry variance makes the rows isotropic. Every sampler is a pure
//! function of (spec, seed), so trial loops parallelize without affecting
//! results.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::orlicz::DistributionSpec;
use crate::rng::trial_rng;

/// An m x n random matrix model built from one entry law.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSpec {
    pub rows: usize,
    pub cols: usize,
    pub entry_law: DistributionSpec,
    pub mean_zero: bool,
    /// Sub-Gaussian parameter: an upper bound for the psi_2 norm of every
    /// unit-direction row marginal.
    pub k: f64,
    pub label: String,
}

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble: {0}")]
    Invalid(String),
}

/// Any zero-mean unit-variance law with mgf E e^{lambda X} <= e^{lambda^2/2}
/// has all its normalized-sum marginals dominated by the standard Gaussian,
/// so sqrt(8/3) bounds the psi_2 norm of every unit-direction marginal.
const GAUSSIAN_PSI2: f64 = 1.632_993_161_855_452_3; // sqrt(8/3)

impl EnsembleSpec {
    pub fn new(rows: usize, cols: usize, entry_law: DistributionSpec, k: f64) -> Result<Self, EnsembleError> {
        entry_law.validate().map_err(|e| EnsembleError::Invalid(e.to_string()))?;
        if rows == 0 || cols == 0 {
            return Err(EnsembleError::Invalid("empty shape".into()));
        }
        let label = format!("{}x{} {}", rows, cols, entry_law.label());
        let mean_zero = entry_law.is_mean_zero();
        Ok(EnsembleSpec { rows, cols, entry_law, mean_zero, k, label })
    }

    /// Standard Gaussian entries; K = sqrt(8/3).
    pub fn gaussian(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, DistributionSpec::Gaussian { sigma: 1.0 }, GAUSSIAN_PSI2).unwrap()
    }

    /// Rademacher entries. Marginals approach the Gaussian in spread
    /// directions, so K is the Gaussian value, not the single-entry norm.
    pub fn rademacher(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, DistributionSpec::Rademacher, GAUSSIAN_PSI2).unwrap()
    }

    /// Standardized Bernoulli entries; K solves K^2 log K = 1/(p(1-p)).
    pub fn standardized_bernoulli(rows: usize, cols: usize, p: f64) -> Result<Self, EnsembleError> {
        let k = k_for_standardized_bernoulli(p);
        Self::new(rows, cols, DistributionSpec::StandardizedBernoulli { p }, k)
    }

    /// Scaled Bernoulli entries with Rademacher signs (mean zero); K given.
    pub fn scaled_bernoulli(rows: usize, cols: usize, k: f64) -> Result<Self, EnsembleError> {
        Self::new(rows, cols, DistributionSpec::ScaledBernoulli { k }, k)
    }

    /// Sparse ternary entries +-1/sqrt(q); only an empirical K is available
    /// in general, so the nominal value is the larger of the Gaussian bound
    /// and the single-entry norm.
    pub fn sparse_ternary(rows: usize, cols: usize, q: f64) -> Result<Self, EnsembleError> {
        let entry = 1.0 / (q * (1.0 + 1.0 / q).ln()).sqrt();
        Self::new(rows, cols, DistributionSpec::SparseTernary { q }, entry.max(GAUSSIAN_PSI2))
    }

    /// Raw 0-1 Bernoulli entries (not mean zero, not isotropic); used by the
    /// null-space pipeline before standardization.
    pub fn bernoulli01(rows: usize, cols: usize, p: f64) -> Result<Self, EnsembleError> {
        let k = 1.0 / (1.0 + 1.0 / p).ln().sqrt();
        Self::new(rows, cols, DistributionSpec::BernoulliZeroOne { p }, k)
    }
}

/// Deterministic sample: entries are drawn row-major from the stream of
/// (spec, seed). Identical inputs give bit-identical matrices.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> DMatrix<f64> {
    let mut rng = trial_rng(seed, 0);
    sample_matrix_with_rng(spec, &mut rng)
}

/// Entry sampler on a caller-provided stream (used by per-trial substreams).
pub fn sample_matrix_with_rng<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(spec.rows, spec.cols);
    for i in 0..spec.rows {
        for j in 0..spec.cols {
            out[(i, j)] = spec.entry_law.sample(rng);
        }
    }
    out
}

/// The unique K > 1 with K^2 log K = 1/(p(1-p)), by bisection to relative
/// tolerance 1e-12. Upper-bounds the psi_2 norm of the standardized
/// Bernoulli entry.
pub fn k_for_standardized_bernoulli(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let target = 1.0 / (p * (1.0 - p));
    let f = |k: f64| k * k * k.ln();
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    while f(hi) < target {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Row second-moment diagnostics against the identity.
#[derive(Debug, Clone, Serialize)]
pub struct IsotropyReport {
    pub trials: usize,
    /// Frobenius distance between the averaged outer product and I_n.
    pub frobenius_error: f64,
    /// CLT-scale tolerance 5 n / sqrt(trials).
    pub tolerance: f64,
    /// Largest per-entry |z|-score of the averaged outer product.
    pub max_abs_z: f64,
    pub passes: bool,
}

/// Average rows' outer products over `trials` fresh rows and compare with
/// the identity. Entry z-scores use per-entry sample standard deviations.
pub fn isotropy_report(spec: &EnsembleSpec, trials: usize, seed: u64) -> IsotropyReport {
    assert!(trials >= 100);
    let n = spec.cols;
    let mut mean = vec![0.0f64; n * n];
    let mut mean_sq = vec![0.0f64; n * n];
    let mut row = vec![0.0f64; n];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        for x in row.iter_mut() {
            *x = spec.entry_law.sample(&mut rng);
        }
        for i in 0..n {
            for j in 0..n {
                let v = row[i] * row[j];
                mean[i * n + j] += v;
                mean_sq[i * n + j] += v * v;
            }
        }
    }
    let tf = trials as f64;
    let mut fro = 0.0;
    let mut max_z: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let m = mean[i * n + j] / tf;
            let var = (mean_sq[i * n + j] / tf - m * m).max(0.0);
            let target = if i == j { 1.0 } else { 0.0 };
            fro += (m - target) * (m - target);
            let se = (var / tf).sqrt();
            if se > 0.0 {
                max_z = max_z.max((m - target).abs() / se);
            }
        }
    }
    let fro = fro.sqrt();
    let tolerance = 5.0 * n as f64 / tf.sqrt();
    IsotropyReport {
        trials,
        frobenius_error: fro,
        tolerance,
        max_abs_z: max_z,
        passes: fro <= tolerance && max_z <= 6.0,
    }
}

/// Fixed left multiplier B with derived norms.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierSpec {
    pub rows: usize,
    pub cols: usize,
    kind: MultiplierKind,
    frobenius_norm: f64,
    operator_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
enum MultiplierKind {
    Identity,
    Diagonal(Vec<f64>),
    /// Orthogonal projection onto the complement of the all-ones direction.
    OrthoProjection,
    Dense(#[serde(skip)] DMatrix<f64>),
}

impl MultiplierSpec {
    pub fn identity(m: usize) -> Self {
        MultiplierSpec {
            rows: m,
            cols: m,
            kind: MultiplierKind::Identity,
            frobenius_norm: (m as f64).sqrt(),
            operator_norm: 1.0,
        }
    }

    pub fn diagonal(entries: Vec<f64>) -> Result<Self, EnsembleError> {
        let op = entries.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        if op == 0.0 {
            return Err(EnsembleError::Invalid("zero multiplier".into()));
        }
        let fro = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
        let m = entries.len();
        Ok(MultiplierSpec {
            rows: m,
            cols: m,
            kind: MultiplierKind::Diagonal(entries),
            frobenius_norm: fro,
            operator_norm: op,
        })
    }

    /// P = I - (1/m) 1 1^T, the projector used to center 0-1 matrices.
    pub fn ortho_projection(m: usize) -> Result<Self, EnsembleError> {
        if m < 2 {
            return Err(EnsembleError::Invalid("projection needs m >= 2".into()));
        }
        Ok(MultiplierSpec {
            rows: m,
            cols: m,
            kind: MultiplierKind::OrthoProjection,
            frobenius_norm: ((m - 1) as f64).sqrt(),
            operator_norm: 1.0,
        })
    }

    pub fn dense(mat: DMatrix<f64>) -> Result<Self, EnsembleError> {
        let fro = mat.norm();
        if fro == 0.0 {
            return Err(EnsembleError::Invalid("zero multiplier".into()));
        }
        let op = mat.clone().svd(false, false).singular_values.max();
        Ok(MultiplierSpec {
            rows: mat.nrows(),
            cols: mat.ncols(),
            kind: MultiplierKind::Dense(mat),
            frobenius_norm: fro,
            operator_norm: op,
        })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, EnsembleError> {
        Self::dense(self.to_matrix() * factor)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm
    }

    pub fn operator_norm(&self) -> f64 {
        self.operator_norm
    }

    /// ||B||_F^2 / ||B||^2, always in [1, min(l, m)].
    pub fn stable_rank(&self) -> f64 {
        let sr = self.frobenius_norm * self.frobenius_norm / (self.operator_norm * self.operator_norm);
        sr.clamp(1.0, self.rows.min(self.cols) as f64)
    }

    /// True when the general-B mean-zero requirement can be dropped.
    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, MultiplierKind::Identity | MultiplierKind::Diagonal(_))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        match &self.kind {
            MultiplierKind::Identity => DMatrix::identity(self.rows, self.cols),
            MultiplierKind::Diagonal(d) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d))
            }
            MultiplierKind::OrthoProjection => {
                let m = self.rows;
                let mut p = DMatrix::identity(m, m);
                for i in 0..m {
                    for j in 0..m {
                        p[(i, j)] -= 1.0 / m as f64;
                    }
                }
                p
            }
            MultiplierKind::Dense(mat) => mat.clone(),
        }
    }

    /// B * A without materializing B when a cheap form exists.
    pub fn apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.kind {
            MultiplierKind::Identity => a.clone(),
            MultiplierKind::Diagonal(d) => {
                let mut out = a.clone();
                for (i, &di) in d.iter().enumerate() {
                    for j in 0..a.ncols() {
                        out[(i, j)] *= di;
                    }
                }
                out
            }
            MultiplierKind::OrthoProjection => {
                // subtract column means: P A = A - (1/m) 1 (1^T A)
                let m = a.nrows() as f64;
                let mut out = a.clone();
                for j in 0..a.ncols() {
                    let mean = a.column(j).sum() / m;
                    for i in 0..a.nrows() {
                        out[(i, j)] -= mean;
                    }
                }
                out
            }
            MultiplierKind::Dense(mat) => mat * a,
        }
    }
}
