//! Seeded Monte-Carlo verification of the tail bounds and set-concentration
//! guarantees.
//!
//! Every batch is a pure function of (spec, master seed, trial index):
//! trials run on substreams, results are collected in trial order and
//! reduced sequentially, so outputs are bit-identical at any worker count.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{jl_dimension, TailBound};
use crate::ensembles::{sample_matrix_with_rng, EnsembleSpec, MultiplierSpec};
use crate::geometry::{binomial, exact_sup_deviation, GeometryError, SetSpec, SUPPORT_CAP};
use crate::orlicz::{psi_norm_from_samples, DistributionSpec, OrliczError, PsiNorm};
use crate::rng::{derive_seed, salt, trial_rng};

#[derive(Debug, Error)]
pub enum McError {
    #[error("a non-diagonal multiplier requires a mean-zero ensemble")]
    MeanZeroRequired,
    #[error("scaling fit needs at least two distinct K values >= 4")]
    DegenerateFit,
    #[error("m_rule(K={k}) = {m} is below K^2 log K = {floor:.1}")]
    SampleRuleTooSmall { k: f64, m: usize, floor: f64 },
    #[error("probe hypothesis violated: {0}")]
    HypothesisUnmet(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
}

/// Empirical survival at one grid point with a Wilson interval.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalPoint {
    pub t: f64,
    pub estimate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// Wilson score interval for k successes out of n at confidence z.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One batch of per-trial statistics with its empirical survival function.
#[derive(Debug, Clone, Serialize)]
pub struct TrialBatch {
    pub label: String,
    pub master_seed: u64,
    pub trials: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub survival: Vec<SurvivalPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi2: Option<PsiNorm>,
    pub meta: serde_json::Value,
}

impl TrialBatch {
    /// Build a batch from raw per-trial values. The survival function is
    /// evaluated on `grid` with 95% Wilson intervals; a psi_2 estimate is
    /// attached when at least 10^4 values are available and `with_psi2`.
    pub fn assemble(
        label: impl Into<String>,
        master_seed: u64,
        values: Vec<f64>,
        grid: &[f64],
        with_psi2: bool,
        meta: serde_json::Value,
    ) -> Result<Self, McError> {
        let trials = values.len();
        let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        sorted.sort_by(f64::total_cmp);
        let survival = grid
            .iter()
            .map(|&t| {
                let count = (trials - sorted.partition_point(|&v| v < t)) as u64;
                let (lo, hi) = wilson_interval(count, trials as u64, 1.959964);
                SurvivalPoint { t, estimate: count as f64 / trials as f64, wilson_lo: lo, wilson_hi: hi }
            })
            .collect();
        let psi2 = if with_psi2 && trials >= 10_000 {
            Some(psi_norm_from_samples(&values, 2.0, 1e-7, derive_seed(master_seed, salt::BOOTSTRAP))?)
        } else {
            None
        };
        Ok(TrialBatch { label: label.into(), master_seed, trials, values, psi2, survival, meta })
    }

    /// CSV with columns `t,survival,wilson_lo,wilson_hi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,survival,wilson_lo,wilson_hi\n");
        for p in &self.survival {
            s.push_str(&format!("{},{},{},{}\n", p.t, p.estimate, p.wilson_lo, p.wilson_hi));
        }
        s
    }
}

/// 64 log-spaced grid points spanning [0.1 median, 10 (V/S switch)].
pub fn survival_grid(median: f64, switch_point: f64) -> Vec<f64> {
    let lo = (0.1 * median).max(1e-3 * switch_point).max(1e-12);
    let hi = (10.0 * switch_point).max(lo * 10.0);
    (0..64).map(|i| lo * (hi / lo).powf(i as f64 / 63.0)).collect()
}

/// Median of a batch's |values|.
pub fn median_abs(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Domination verdict of an empirical survival function against a bound.
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    /// Grid points where the bound was at least `min_bound`.
    pub checked_points: usize,
    /// (t, wilson upper, bound value) for every violated point.
    pub violations: Vec<(f64, f64, f64)>,
    pub holds: bool,
}

/// Check `wilson_hi <= bound(t)` at every grid point where the bound value
/// is at least `min_bound` (typically 10/trials).
pub fn domination_check(batch: &TrialBatch, bound: &TailBound, min_bound: f64) -> DominationReport {
    let mut checked = 0;
    let mut violations = Vec::new();
    for p in &batch.survival {
        let b = bound.eval(p.t);
        if b < min_bound {
            continue;
        }
        checked += 1;
        if p.wilson_hi > b {
            violations.push((p.t, p.wilson_hi, b));
        }
    }
    DominationReport { checked_points: checked, violations: violations.clone(), holds: violations.is_empty() }
}

/// Weighted sum of centered squares: the statistic |sum_i a_i (X_i^2 - 1)|.
#[derive(Debug, Clone, Serialize)]
pub struct SumSpec {
    pub a: Vec<f64>,
    pub laws: Vec<DistributionSpec>,
}

impl SumSpec {
    /// All coefficients 1/sqrt(m), one law for every index.
    pub fn uniform(law: DistributionSpec, m: usize) -> Self {
        SumSpec { a: vec![1.0 / (m as f64).sqrt(); m], laws: vec![law; m] }
    }
}

/// Per-trial values of |sum a_i (X_i^2 - 1)|.
pub fn empirical_tail_values(spec: &SumSpec, trials: usize, seed: u64) -> Vec<f64> {
    assert_eq!(spec.a.len(), spec.laws.len());
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut sum = 0.0;
            for (ai, law) in spec.a.iter().zip(&spec.laws) {
                let x = law.sample(&mut rng);
                sum += ai * (x * x - 1.0);
            }
            sum.abs()
        })
        .collect()
}

/// Survival of the centered-square sum statistic on `t_grid`.
pub fn empirical_tail(
    spec: &SumSpec,
    trials: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<TrialBatch, McError> {
    let values = empirical_tail_values(spec, trials, seed);
    TrialBatch::assemble(
        "sum_tail",
        seed,
        values,
        t_grid,
        false,
        serde_json::json!({"m": spec.a.len(), "law": spec.laws.first().map(|l| l.label())}),
    )
}

/// Per-trial values of |X^T A X - tr A| for X with i.i.d. unit-variance
/// coordinates from `law`.
pub fn empirical_hw_values(
    a: &DMatrix<f64>,
    law: &DistributionSpec,
    trials: usize,
    seed: u64,
) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let expectation = a.diagonal().sum();
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let x: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            let mut quad = 0.0;
            for r in 0..n {
                let mut row = 0.0;
                for c in 0..n {
                    row += a[(r, c)] * x[c];
                }
                quad += x[r] * row;
            }
            (quad - expectation).abs()
        })
        .collect()
}

/// Survival of the quadratic-form statistic on `t_grid`.
pub fn empirical_hw_tail(
    a: &DMatrix<f64>,
    law: &DistributionSpec,
    trials: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<TrialBatch, McError> {
    let values = empirical_hw_values(a, law, trials, seed);
    TrialBatch::assemble(
        "quadratic_tail",
        seed,
        values,
        t_grid,
        false,
        serde_json::json!({"n": a.nrows(), "law": law.label()}),
    )
}

fn guard_mean_zero(ensemble: &EnsembleSpec, b: &MultiplierSpec) -> Result<(), McError> {
    if !b.is_diagonal() && !ensemble.mean_zero {
        return Err(McError::MeanZeroRequired);
    }
    Ok(())
}

fn check_enumeration(t: &SetSpec) -> Result<(), McError> {
    if let SetSpec::SparseSphere { n, s } = t {
        let count = binomial(*n, *s);
        if count > SUPPORT_CAP {
            return Err(GeometryError::EnumerationTooLarge { supports: count, s: *s, cap: SUPPORT_CAP }
                .into());
        }
    }
    Ok(())
}

/// Per-trial exact sup over T of | ||BAx||_2 - ||B||_F ||x||_2 |, with a
/// psi_2 estimate of the batch.
///
/// Non-diagonal multipliers require a mean-zero ensemble; diagonal ones do
/// not (the all-ones multiplier with a non-centered ensemble is the standard
/// counterexample).
pub fn deviation_batch(
    ensemble: &EnsembleSpec,
    b: &MultiplierSpec,
    t: &SetSpec,
    trials: usize,
    seed: u64,
) -> Result<TrialBatch, McError> {
    guard_mean_zero(ensemble, b)?;
    check_enumeration(t)?;
    t.validate().map_err(McError::from)?;
    assert_eq!(b.cols, ensemble.rows, "B columns must match ensemble rows");
    let target = b.frobenius_norm();
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let a = sample_matrix_with_rng(ensemble, &mut rng);
            let m = b.apply(&a);
            exact_sup_deviation(&m, t, target).expect("validated upfront")
        })
        .collect();
    let grid = {
        let med = median_abs(&values);
        survival_grid(med, (10.0 * med).max(1e-9))
    };
    TrialBatch::assemble(
        format!("deviation[{}]", ensemble.label),
        seed,
        values,
        &grid,
        trials >= 10_000,
        serde_json::json!({
            "ensemble": ensemble.label,
            "b_frobenius": b.frobenius_norm(),
            "b_operator": b.operator_norm(),
            "radius": crate::geometry::radius(t),
        }),
    )
}

/// psi_2 of the increment Z_x - Z_y of the deviation process
/// Z_x = ||BAx||_2 - ||B||_F ||x||_2.
pub fn increment_psi2(
    ensemble: &EnsembleSpec,
    b: &MultiplierSpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
    trials: usize,
    seed: u64,
) -> Result<PsiNorm, McError> {
    guard_mean_zero(ensemble, b)?;
    assert!((x - y).norm() > 0.0, "x and y must differ");
    let fro = b.frobenius_norm();
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let a = sample_matrix_with_rng(ensemble, &mut rng);
            let ba = b.apply(&a);
            let zx = (&ba * x).norm() - fro * x.norm();
            let zy = (&ba * y).norm() - fro * y.norm();
            zx - zy
        })
        .collect();
    Ok(psi_norm_from_samples(&values, 2.0, 1e-7, derive_seed(seed, salt::BOOTSTRAP))?)
}

/// Regression of deviation psi_2 against K sqrt(log K), with the K^2
/// regressor fitted alongside for comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub ks: Vec<f64>,
    pub ms: Vec<usize>,
    pub psi2: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_sum: f64,
    pub alt_slope: f64,
    pub alt_intercept: f64,
    pub alt_residual_sum: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| {
        let r = y - (intercept + slope * x);
        r * r
    }).sum();
    (slope, intercept, ssr)
}

/// Measure deviation psi_2 across a grid of scaled-Bernoulli parameters and
/// compare the K sqrt(log K) regressor against K^2.
pub fn scaling_fit(
    ks: &[f64],
    m_rule: &dyn Fn(f64) -> usize,
    b_rule: &dyn Fn(usize) -> MultiplierSpec,
    t: &SetSpec,
    trials: usize,
    seed: u64,
) -> Result<ScalingFit, McError> {
    let mut distinct = ks.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 || ks.iter().any(|&k| k < 4.0) {
        return Err(McError::DegenerateFit);
    }
    let n = t.ambient_dim();
    let mut ms = Vec::new();
    let mut psi = Vec::new();
    for (idx, &k) in ks.iter().enumerate() {
        let m = m_rule(k);
        let floor = k * k * k.ln();
        if (m as f64) < floor {
            return Err(McError::SampleRuleTooSmall { k, m, floor });
        }
        let ensemble = EnsembleSpec::scaled_bernoulli(m, n, k)
            .map_err(|e| McError::HypothesisUnmet(e.to_string()))?;
        let batch = deviation_batch(&ensemble, &b_rule(m), t, trials, derive_seed(seed, idx as u64))?;
        let p = batch.psi2.ok_or(McError::DegenerateFit)?;
        ms.push(m);
        psi.push(p.value);
    }
    let g1: Vec<f64> = ks.iter().map(|&k| k * k.ln().sqrt()).collect();
    let g2: Vec<f64> = ks.iter().map(|&k| k * k).collect();
    let (slope, intercept, residual_sum) = ols(&g1, &psi);
    let (alt_slope, alt_intercept, alt_residual_sum) = ols(&g2, &psi);
    Ok(ScalingFit {
        ks: ks.to_vec(),
        ms,
        psi2: psi,
        slope,
        intercept,
        residual_sum,
        alt_slope,
        alt_intercept,
        alt_residual_sum,
    })
}

/// Outcome of the lower-bound check at one (K, m).
#[derive(Debug, Clone, Serialize)]
pub struct TightnessReport {
    pub k: f64,
    pub m: usize,
    pub trials: usize,
    pub psi2: PsiNorm,
    /// 0.2 K sqrt(log K).
    pub threshold: f64,
    pub passes: bool,
}

/// Empirical psi_2 of ||X||_2 - sqrt(m) for X with m i.i.d. scaled-Bernoulli
/// coordinates; passes when the CI lower end clears 0.2 K sqrt(log K).
pub fn tightness_check(k: f64, m: usize, trials: usize, seed: u64) -> Result<TightnessReport, McError> {
    if k < 4.0 {
        return Err(McError::HypothesisUnmet(format!("K = {k} must be >= 4")));
    }
    let floor = k * k * k.ln();
    if (m as f64) < floor {
        return Err(McError::SampleRuleTooSmall { k, m, floor });
    }
    let law = DistributionSpec::ScaledBernoulli { k };
    let sqrt_m = (m as f64).sqrt();
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut ss = 0.0;
            for _ in 0..m {
                let v = law.sample(&mut rng);
                ss += v * v;
            }
            ss.sqrt() - sqrt_m
        })
        .collect();
    let psi2 = psi_norm_from_samples(&values, 2.0, 1e-7, derive_seed(seed, salt::BOOTSTRAP))?;
    let threshold = 0.2 * k * k.ln().sqrt();
    let passes = psi2.ci_lower() >= threshold;
    Ok(TightnessReport { k, m, trials, psi2, threshold, passes })
}

/// All-pairs distortion probe for random embeddings.
#[derive(Debug, Clone, Serialize)]
pub struct JlProbeReport {
    pub n_points: usize,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub k: f64,
    pub c: f64,
    /// Embedding dimension from the union-bounded rule.
    pub m: usize,
    pub seeds: usize,
    /// Fraction of seeds where every pair satisfied the bracket.
    pub all_pairs_fraction: f64,
    /// Pair-level failure rate across all seeds.
    pub pair_failure_rate: f64,
    pub holds: bool,
}

/// For each seed draw one embedding matrix and test the two-sided distortion
/// bracket on every point pair. The embedding dimension comes from the
/// dimension rule at per-pair failure budget delta / (number of pairs).
pub fn jl_probe(
    points: &[Vec<f64>],
    law: &DistributionSpec,
    k: f64,
    eps: f64,
    delta: f64,
    c: f64,
    seeds: usize,
    master_seed: u64,
) -> JlProbeReport {
    let n_points = points.len();
    let dim = points.first().map_or(0, |p| p.len());
    let n_pairs = n_points * (n_points - 1) / 2;
    let m = jl_dimension(k, eps, delta / n_pairs as f64, c);
    let p_mat = DMatrix::from_fn(dim, n_points, |i, j| points[j][i]);
    let mut pair_dist = Vec::with_capacity(n_pairs);
    for i in 0..n_points {
        for j in (i + 1)..n_points {
            let d: f64 = (0..dim).map(|r| {
                let diff = points[i][r] - points[j][r];
                diff * diff
            }).sum::<f64>().sqrt();
            pair_dist.push((i, j, d));
        }
    }
    let ensemble = EnsembleSpec::new(m, dim, law.clone(), k).expect("valid law");
    let results: Vec<(bool, u64)> = (0..seeds as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = trial_rng(master_seed, s);
            let a = sample_matrix_with_rng(&ensemble, &mut rng);
            let sketched = &a * &p_mat;
            let scale = 1.0 / (m as f64).sqrt();
            let mut failures = 0u64;
            for &(i, j, d) in &pair_dist {
                if d == 0.0 {
                    continue;
                }
                let sd = (sketched.column(i) - sketched.column(j)).norm() * scale;
                if sd < (1.0 - eps) * d || sd > (1.0 + eps) * d {
                    failures += 1;
                }
            }
            (failures == 0, failures)
        })
        .collect();
    let all_ok = results.iter().filter(|(ok, _)| *ok).count();
    let total_failures: u64 = results.iter().map(|(_, f)| f).sum();
    let all_pairs_fraction = all_ok as f64 / seeds as f64;
    JlProbeReport {
        n_points,
        dim,
        eps,
        delta,
        k,
        c,
        m,
        seeds,
        all_pairs_fraction,
        pair_failure_rate: total_failures as f64 / (seeds as f64 * n_pairs as f64),
        holds: all_pairs_fraction >= 1.0 - delta,
    }
}

/// Embedding-failure frequency at a sparse regime where no linear map can
/// embed: entries A_ij^2 ~ (1/(mp)) Bernoulli(p) with mp <= 1/2.
#[derive(Debug, Clone, Serialize)]
pub struct JlOptimalityReport {
    pub p: f64,
    pub m: usize,
    pub eps: f64,
    pub trials: usize,
    /// Empirical P(| ||A e_1||_2 - 1 | >= eps).
    pub empirical_failure: f64,
    /// Exact P(first column is all zero) = (1-p)^m.
    pub zero_column_probability: f64,
    /// 1 - (1-p)^m, the exact floor from the nonzero-count side.
    pub bernoulli_floor: f64,
    /// 1 - e^{-1/4} ~ 0.2212.
    pub proof_floor: f64,
    pub holds: bool,
}

pub fn jl_optimality_probe(
    p: f64,
    m: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<JlOptimalityReport, McError> {
    if !(p > 0.0 && p < 0.25) {
        return Err(McError::HypothesisUnmet(format!("p = {p} outside (0, 1/4)")));
    }
    let mp = m as f64 * p;
    if mp > 0.5 {
        return Err(McError::HypothesisUnmet(format!("mp = {mp} must be <= 1/2")));
    }
    if !(eps > 0.0 && eps < 0.2000001) {
        return Err(McError::HypothesisUnmet(format!("eps = {eps} outside (0, 1/5]")));
    }
    let failures: u64 = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut count = 0u64;
            for _ in 0..m {
                if rand::Rng::random::<f64>(&mut rng) < p {
                    count += 1;
                }
            }
            let norm = ((count as f64) / mp).sqrt();
            u64::from((norm - 1.0).abs() >= eps)
        })
        .sum();
    let empirical_failure = failures as f64 / trials as f64;
    let zero_column_probability = (1.0 - p).powi(m as i32);
    let proof_floor = 1.0 - (-0.25f64).exp();
    Ok(JlOptimalityReport {
        p,
        m,
        eps,
        trials,
        empirical_failure,
        zero_column_probability,
        bernoulli_floor: 1.0 - zero_column_probability,
        proof_floor,
        holds: empirical_failure >= proof_floor && empirical_failure >= 0.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::new_bernstein_bound;
    use approx::assert_relative_eq;

    #[test]
    fn wilson_interval_basics() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn rademacher_squares_are_degenerate() {
        // X^2 = 1 identically, so the centered sum vanishes
        let spec = SumSpec::uniform(DistributionSpec::Rademacher, 10);
        let batch = empirical_tail(&spec, 1000, &[0.1, 1.0], 3).unwrap();
        for p in &batch.survival {
            assert_eq!(p.estimate, 0.0);
        }
    }

    #[test]
    fn zero_coefficient_sum_is_degenerate() {
        let spec = SumSpec { a: vec![0.0], laws: vec![DistributionSpec::Gaussian { sigma: 1.0 }] };
        let values = empirical_tail_values(&spec, 100, 5);
        assert!(values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diagonal_quadratic_matches_weighted_sum() {
        // X^T diag(a) X - tr = sum a_i (X_i^2 - 1): same trials, same stream
        let a = vec![0.3, -0.9, 2.0, 0.5];
        let law = DistributionSpec::Gaussian { sigma: 1.0 };
        let spec = SumSpec { a: a.clone(), laws: vec![law.clone(); 4] };
        let sums = empirical_tail_values(&spec, 500, 77);
        let diag = DMatrix::from_diagonal(&DVector::from_column_slice(&a));
        let quads = empirical_hw_values(&diag, &law, 500, 77);
        for (s, q) in sums.iter().zip(&quads) {
            assert_relative_eq!(s, q, epsilon = 1e-10);
        }
    }

    #[test]
    fn chi_square_oracle_for_identity_gaussian() {
        // A = I_4, Gaussian X: statistic is |chi^2_4 - 4| and
        // P(chi^2_4 >= x) = e^{-x/2} (1 + x/2); at t = 2 sqrt(8) only the
        // upper branch contributes
        let n = 4;
        let a = DMatrix::<f64>::identity(n, n);
        let t0 = 2.0 * (2.0 * n as f64).sqrt();
        let trials = 200_000;
        let batch =
            empirical_hw_tail(&a, &DistributionSpec::Gaussian { sigma: 1.0 }, trials, &[t0], 21)
                .unwrap();
        let x = n as f64 + t0;
        let exact = (-x / 2.0).exp() * (1.0 + x / 2.0);
        let p = &batch.survival[0];
        assert!(
            p.wilson_lo <= exact && exact <= p.wilson_hi + 0.002,
            "exact {exact} outside ({}, {})",
            p.wilson_lo,
            p.wilson_hi
        );
    }

    #[test]
    fn rank_one_rademacher_matches_enumeration() {
        // off-diagonal rank-1 u v^T with Rademacher X in R^3: the statistic
        // |<X,u><v,X> - <u,v>| takes finitely many equiprobable values
        let u = DVector::from_column_slice(&[1.0, 2.0, -1.0]);
        let v = DVector::from_column_slice(&[0.5, -1.0, 1.5]);
        let mut a = &u * v.transpose();
        for i in 0..3 {
            a[(i, i)] = 0.0;
        }
        let expectation = a.diagonal().sum();
        let mut exact_values = Vec::new();
        for bits in 0..8u32 {
            let x = DVector::from_fn(3, |i, _| if bits >> i & 1 == 1 { 1.0 } else { -1.0 });
            let quad: f64 = (x.transpose() * &a * &x)[(0, 0)];
            exact_values.push((quad - expectation).abs());
        }
        exact_values.sort_by(f64::total_cmp);
        let t0 = exact_values[4] - 1e-9; // between atoms
        let exact_surv = exact_values.iter().filter(|&&v| v >= t0).count() as f64 / 8.0;
        let batch =
            empirical_hw_tail(&a, &DistributionSpec::Rademacher, 100_000, &[t0], 31).unwrap();
        let p = &batch.survival[0];
        assert!(
            p.wilson_lo <= exact_surv && exact_surv <= p.wilson_hi,
            "exact {exact_surv} outside ({}, {})",
            p.wilson_lo,
            p.wilson_hi
        );
    }

    #[test]
    fn deviation_median_is_small_for_gaussian_singleton() {
        // | ||g||_2 - sqrt(m) | has median below 1 for m >= 16
        let m = 16;
        let ens = EnsembleSpec::gaussian(m, 1);
        let b = MultiplierSpec::identity(m);
        let t = SetSpec::singleton(vec![1.0]);
        let batch = deviation_batch(&ens, &b, &t, 4000, 13).unwrap();
        assert!(median_abs(&batch.values) <= 1.0);
    }

    #[test]
    fn deviation_scales_exactly_with_multiplier() {
        let m = 8;
        let ens = EnsembleSpec::gaussian(m, 2);
        let t = SetSpec::SparseSphere { n: 2, s: 1 };
        let b1 = MultiplierSpec::identity(m);
        let b2 = MultiplierSpec::diagonal(vec![2.0; m]).unwrap();
        let d1 = deviation_batch(&ens, &b1, &t, 200, 17).unwrap();
        let d2 = deviation_batch(&ens, &b2, &t, 200, 17).unwrap();
        for (v1, v2) in d1.values.iter().zip(&d2.values) {
            assert_relative_eq!(2.0 * v1, *v2, max_relative = 1e-12);
        }
    }

    #[test]
    fn mean_zero_guard() {
        let ens = EnsembleSpec::bernoulli01(6, 2, 0.3).unwrap();
        let t = SetSpec::SparseSphere { n: 2, s: 1 };
        let proj = MultiplierSpec::ortho_projection(6).unwrap();
        assert!(matches!(
            deviation_batch(&ens, &proj, &t, 100, 1),
            Err(McError::MeanZeroRequired)
        ));
        // diagonal multipliers accept non-centered ensembles
        let eye = MultiplierSpec::identity(6);
        assert!(deviation_batch(&ens, &eye, &t, 100, 1).is_ok());
    }

    #[test]
    fn increment_vanishes_for_reflected_points() {
        // Rademacher entries, B = I: ||A(-x)|| = ||Ax|| so Z_x - Z_{-x} = 0
        let ens = EnsembleSpec::rademacher(8, 3);
        let b = MultiplierSpec::identity(8);
        let x = DVector::from_column_slice(&[0.6, -0.8, 0.0]);
        let y = -&x;
        let est = increment_psi2(&ens, &b, &x, &y, 20_000, 3).unwrap();
        assert!(est.degenerate, "increment should be identically zero: {est:?}");
    }

    #[test]
    fn increment_homogeneity() {
        // Z_{2x} = 2 Z_x exactly, so psi2(Z_2x - Z_x) = psi2(Z_x)
        let ens = EnsembleSpec::gaussian(12, 2);
        let b = MultiplierSpec::identity(12);
        let x = DVector::from_column_slice(&[1.0, 0.5]);
        let two_x = 2.0 * &x;
        let inc = increment_psi2(&ens, &b, &two_x, &x, 20_000, 9).unwrap();
        // direct psi2 of Z_x on the same trials
        let fro = b.frobenius_norm();
        let values: Vec<f64> = (0..20_000u64)
            .map(|i| {
                let mut rng = trial_rng(9, i);
                let a = sample_matrix_with_rng(&ens, &mut rng);
                (&a * &x).norm() - fro * x.norm()
            })
            .collect();
        let direct = psi_norm_from_samples(&values, 2.0, 1e-7, derive_seed(9, salt::BOOTSTRAP)).unwrap();
        assert_relative_eq!(inc.value, direct.value, max_relative = 1e-6);
    }

    #[test]
    fn increment_ratio_stays_below_frozen_constant() {
        use rand_distr::{Distribution, StandardNormal};
        let m = 32;
        let nd = 6;
        let ens = EnsembleSpec::gaussian(m, nd);
        let b = MultiplierSpec::identity(m);
        let klk = ens.k * ens.k.ln().sqrt();
        let cap = crate::constants::INCREMENT_C * klk * b.operator_norm();
        let mut rng = trial_rng(41, 0);
        for pair in 0..20u64 {
            let x = DVector::from_fn(nd, |_, _| StandardNormal.sample(&mut rng)).normalize();
            let y = DVector::from_fn(nd, |_, _| StandardNormal.sample(&mut rng)).normalize();
            let est = increment_psi2(&ens, &b, &x, &y, 20_000, 900 + pair).unwrap();
            let ratio = est.value / (&x - &y).norm();
            assert!(ratio <= cap, "pair {pair}: ratio {ratio} vs cap {cap}");
        }
    }

    #[test]
    fn scaling_fit_rejects_degenerate_grids() {
        let t = SetSpec::singleton(vec![1.0]);
        let b_rule = |m: usize| MultiplierSpec::identity(m);
        let m_rule = |k: f64| (k * k * k.ln()).ceil() as usize;
        assert!(matches!(
            scaling_fit(&[4.0], &m_rule, &b_rule, &t, 100, 1),
            Err(McError::DegenerateFit)
        ));
        assert!(matches!(
            scaling_fit(&[4.0, 4.0], &m_rule, &b_rule, &t, 100, 1),
            Err(McError::DegenerateFit)
        ));
        assert!(matches!(
            scaling_fit(&[4.0, 2.0], &m_rule, &b_rule, &t, 100, 1),
            Err(McError::DegenerateFit)
        ));
        let small_m = |_k: f64| 3usize;
        assert!(matches!(
            scaling_fit(&[4.0, 6.0], &small_m, &b_rule, &t, 100, 1),
            Err(McError::SampleRuleTooSmall { .. })
        ));
    }

    #[test]
    fn tightness_holds_at_k4_desk_scale() {
        let k: f64 = 4.0;
        let m = (k * k * k.ln()).ceil() as usize;
        let rep = tightness_check(k, m, 100_000, 23).unwrap();
        assert!(rep.passes, "{rep:?}");
        // oversampling m keeps the one-sided hypothesis satisfied
        let rep = tightness_check(k, 10 * m, 100_000, 24).unwrap();
        assert!(rep.passes, "{rep:?}");
    }

    #[test]
    fn domination_against_loose_bernstein() {
        let law = DistributionSpec::ScaledBernoulli { k: 4.0 };
        let m = 50;
        let spec = SumSpec::uniform(law, m);
        let bound = new_bernstein_bound(&spec.a, &vec![4.0; m], None).unwrap();
        let values = empirical_tail_values(&spec, 50_000, 8);
        let grid = survival_grid(median_abs(&values), bound.switch_point());
        let batch = TrialBatch::assemble("t", 8, values, &grid, false, serde_json::Value::Null).unwrap();
        let rep = domination_check(&batch, &bound, 10.0 / 50_000.0);
        assert!(rep.holds, "violations: {:?}", rep.violations);
        assert!(rep.checked_points > 0);
    }

    #[test]
    fn jl_optimality_probe_exact_case() {
        let rep = jl_optimality_probe(0.1, 4, 0.2, 50_000, 19).unwrap();
        assert_relative_eq!(rep.zero_column_probability, 0.6561, max_relative = 1e-9);
        assert!(rep.bernoulli_floor >= 0.2);
        // at mp <= 1/2 and eps <= 1/5 every draw fails the bracket
        assert!(rep.empirical_failure >= rep.proof_floor);
        assert!(rep.holds);
        assert!(jl_optimality_probe(0.3, 4, 0.2, 100, 1).is_err());
        assert!(jl_optimality_probe(0.1, 100, 0.2, 100, 1).is_err());
    }

    #[test]
    fn batch_survival_is_nonincreasing() {
        let spec = SumSpec::uniform(DistributionSpec::Gaussian { sigma: 1.0 }, 10);
        let values = empirical_tail_values(&spec, 20_000, 4);
        let grid = survival_grid(median_abs(&values), 5.0);
        let batch = TrialBatch::assemble("t", 4, values, &grid, false, serde_json::Value::Null).unwrap();
        let mut prev = 1.0f64;
        for p in &batch.survival {
            assert!(p.estimate <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&p.estimate));
            prev = p.estimate;
        }
    }

    #[test]
    fn trial_values_are_thread_count_independent() {
        let spec = SumSpec::uniform(DistributionSpec::Gaussian { sigma: 1.0 }, 10);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let v1 = one.install(|| empirical_tail_values(&spec, 5000, 42));
        let v8 = eight.install(|| empirical_tail_values(&spec, 5000, 42));
        assert_eq!(v1, v8);
    }
}
