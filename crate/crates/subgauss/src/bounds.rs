//! Closed-form tail bounds and sample-size formulas.
//!
//! All tail bounds here share the two-regime shape
//!
//! ```text
//! t -> min(1, 2 exp(-c min(t^2 / V, t / S)))
//! ```
//!
//! with a variance proxy V and a linear scale S. The sharpened Bernstein
//! bound for sums of sub-exponential variables with bounded first absolute
//! moment uses V = sum a_i^2 K_i^2 log K_i; the classical one uses
//! V = K^4 ||a||_2^2. The sharpened Hanson-Wright bound for quadratic forms
//! of unit-variance sub-Gaussian coordinates uses V = ||A||_F^2 K^2 log K.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const LN2: f64 = std::f64::consts::LN_2;
const E: f64 = std::f64::consts::E;

/// Where a bound's absolute constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Pinned by following the proof's explicit constants.
    ProofTraced,
    /// Calibrated empirically once and frozen.
    Fitted,
    /// Supplied by the caller.
    User,
}

/// Parametric two-regime tail bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailBound {
    /// Variance proxy V (quadratic regime denominator).
    pub variance_proxy: f64,
    /// Linear scale S (linear regime denominator).
    pub linear_scale: f64,
    /// Absolute constant c in the exponent.
    pub c: f64,
    pub provenance: Provenance,
}

impl TailBound {
    /// min(1, 2 exp(-c min(t^2/V, t/S))).
    pub fn eval(&self, t: f64) -> f64 {
        let q = (t * t / self.variance_proxy).min(t / self.linear_scale);
        (2.0 * (-self.c * q).exp()).min(1.0)
    }

    /// t below which the quadratic regime is active.
    pub fn switch_point(&self) -> f64 {
        self.variance_proxy / self.linear_scale
    }
}

/// One row of a bound-vs-bound (or bound-vs-data) comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub t: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partner_bound: Option<f64>,
}

/// A named bound evaluated on a grid, optionally next to a partner.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: serde_json::Value,
    pub variance_proxy: f64,
    pub linear_scale: f64,
    pub c: f64,
    pub grid: Vec<GridRow>,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        inputs: serde_json::Value,
        bound: &TailBound,
        partner: Option<&TailBound>,
        ts: &[f64],
    ) -> Self {
        let grid = ts
            .iter()
            .map(|&t| GridRow { t, bound: bound.eval(t), partner_bound: partner.map(|p| p.eval(t)) })
            .collect();
        BoundReport {
            name: name.into(),
            inputs,
            variance_proxy: bound.variance_proxy,
            linear_scale: bound.linear_scale,
            c: bound.c,
            grid,
        }
    }

    /// CSV with columns `t,bound,partner_bound`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,bound,partner_bound\n");
        for row in &self.grid {
            match row.partner_bound {
                Some(p) => s.push_str(&format!("{},{},{}\n", row.t, row.bound, p)),
                None => s.push_str(&format!("{},{},\n", row.t, row.bound)),
            }
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("K_{index} = {value} is below the admissible floor 6/5")]
    BadK { index: usize, value: f64 },
    #[error("coefficient vector must be non-zero")]
    ZeroVector,
    #[error("matrix must be non-zero")]
    ZeroMatrix,
    #[error("coefficient/K length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("moment ordering violated: need 0 < alpha1 <= alpha2 <= K, got ({0}, {1}, K={2})")]
    BadMoments(f64, f64, f64),
    #[error("delta = {0} outside (0, 1/2)")]
    BadDelta(f64),
    #[error("K = {0} below sqrt(1/log 2)")]
    KBelowFloor(f64),
    #[error("binomial-tail hypotheses violated: {0}")]
    OutOfRange(String),
}

/// The proof-traced constant for the sharpened Bernstein bound:
/// c = min(1/(4 C0), c0/2) with C1 = 6, C0 = (C1 e)^2 and c0 = 1/(2 C1 e).
/// Numerically about 9.40e-4.
pub fn new_bernstein_c() -> f64 {
    let c1 = 6.0;
    let c0_big = (c1 * E) * (c1 * E);
    let c0_small = 1.0 / (2.0 * c1 * E);
    (1.0 / (4.0 * c0_big)).min(c0_small / 2.0)
}

/// Conservative constant when the first-absolute-moment bound is a general
/// `alpha` instead of 2: c = 1/(4 e^2 (6 + alpha)^2).
pub fn new_bernstein_c_for_first_moment(alpha: f64) -> f64 {
    1.0 / (4.0 * E * E * (6.0 + alpha) * (6.0 + alpha))
}

/// Sharpened Bernstein bound for |sum a_i Y_i| with E|Y_i| <= 2 and
/// ||Y_i||_{psi_1} <= K_i^2, K_i >= 6/5:
/// V = sum a_i^2 K_i^2 log K_i, S = ||a||_inf K^2 log K with K = max K_i.
pub fn new_bernstein_bound(a: &[f64], ks: &[f64], c: Option<f64>) -> Result<TailBound, BoundError> {
    if a.iter().all(|&x| x == 0.0) {
        return Err(BoundError::ZeroVector);
    }
    if a.len() != ks.len() {
        return Err(BoundError::LengthMismatch(a.len(), ks.len()));
    }
    for (i, &k) in ks.iter().enumerate() {
        if k < 1.2 {
            return Err(BoundError::BadK { index: i, value: k });
        }
    }
    let mut v = 0.0;
    for (&ai, &ki) in a.iter().zip(ks) {
        v += (ai * ai) * (ki * ki * ki.ln());
    }
    let k_max = ks.iter().copied().fold(f64::MIN, f64::max);
    let a_inf = a.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    let s = a_inf * (k_max * k_max * k_max.ln());
    let (c, provenance) = match c {
        Some(c) => (c, Provenance::User),
        None => (new_bernstein_c(), Provenance::ProofTraced),
    };
    Ok(TailBound { variance_proxy: v, linear_scale: s, c, provenance })
}

/// Classical Bernstein bound for sub-exponential sums:
/// V = K^4 ||a||_2^2, S = K^2 ||a||_inf. The constant defaults to the
/// sharpened bound's proof-traced value so the two are comparable at equal c.
pub fn standard_bernstein_bound(a: &[f64], k: f64, c: Option<f64>) -> Result<TailBound, BoundError> {
    if a.iter().all(|&x| x == 0.0) {
        return Err(BoundError::ZeroVector);
    }
    let a2: f64 = a.iter().map(|x| x * x).sum();
    let a_inf = a.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    let (c, provenance) = match c {
        Some(c) => (c, Provenance::User),
        None => (new_bernstein_c(), Provenance::ProofTraced),
    };
    Ok(TailBound {
        variance_proxy: k.powi(4) * a2,
        linear_scale: k * k * a_inf,
        c,
        provenance,
    })
}

/// Sharpened Hanson-Wright bound for |X^T A X - E X^T A X| with independent
/// unit-variance coordinates of psi_2 norm <= K:
/// V = ||A||_F^2 K^2 log K, S = ||A|| K^2 log K.
///
/// The absolute constant is unnamed in the statement; the default is the
/// frozen fitted value from [`crate::constants`]. For diagonal A the (V, S)
/// pair reproduces [`new_bernstein_bound`] on a = diag(A) bit-for-bit (same
/// arithmetic ordering).
pub fn new_hanson_wright_bound(
    a: &DMatrix<f64>,
    k: f64,
    c: Option<f64>,
) -> Result<TailBound, BoundError> {
    if a.iter().all(|&x| x == 0.0) {
        return Err(BoundError::ZeroMatrix);
    }
    if k < (1.0 / LN2).sqrt() {
        return Err(BoundError::KBelowFloor(k));
    }
    let w = k * k * k.ln();
    let (c, provenance) = match c {
        Some(c) => (c, Provenance::User),
        None => (crate::constants::HW_C, Provenance::Fitted),
    };
    if is_diagonal(a) {
        // diagonal fast path keeps the Bernstein arithmetic ordering exactly
        let mut v = 0.0;
        let mut max_abs = 0.0f64;
        for i in 0..a.nrows().min(a.ncols()) {
            let d = a[(i, i)];
            v += (d * d) * w;
            max_abs = max_abs.max(d.abs());
        }
        return Ok(TailBound { variance_proxy: v, linear_scale: max_abs * w, c, provenance });
    }
    let fro_sq: f64 = a.iter().map(|x| x * x).sum();
    let op = a.clone().svd(false, false).singular_values.max();
    Ok(TailBound { variance_proxy: fro_sq * w, linear_scale: op * w, c, provenance })
}

/// Hanson-Wright without the unit-variance requirement. With
/// alpha1 = min_i (E X_i^2)^{1/2}, alpha2 = max_i (E X_i^2)^{1/2} and
/// gamma = alpha2/alpha1:
/// V = ||A||_F^2 alpha2^2 gamma^2 K^2 log(K/alpha1),
/// S = ||A|| gamma^2 K^2 log(K/alpha1).
pub fn hanson_wright_nonunit(
    a: &DMatrix<f64>,
    k: f64,
    alpha1: f64,
    alpha2: f64,
    c: Option<f64>,
) -> Result<TailBound, BoundError> {
    if !(alpha1 > 0.0 && alpha1 <= alpha2 && alpha2 <= k) {
        return Err(BoundError::BadMoments(alpha1, alpha2, k));
    }
    if a.iter().all(|&x| x == 0.0) {
        return Err(BoundError::ZeroMatrix);
    }
    let gamma = alpha2 / alpha1;
    let w = gamma * gamma * k * k * (k / alpha1).ln();
    let fro_sq: f64 = a.iter().map(|x| x * x).sum();
    let op = a.clone().svd(false, false).singular_values.max();
    let (c, provenance) = match c {
        Some(c) => (c, Provenance::User),
        None => (crate::constants::HW_C, Provenance::Fitted),
    };
    Ok(TailBound {
        variance_proxy: fro_sq * (alpha2 * alpha2) * w,
        linear_scale: op * w,
        c,
        provenance,
    })
}

fn is_diagonal(a: &DMatrix<f64>) -> bool {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j && a[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Moment bound for mean-zero sub-exponential Y with E|Y| <= 2 and
/// ||Y||_{psi_1} <= K^2, K >= 6/5:  E|Y|^p <= 6^p p^p (K^2 log K)^{p-1}.
pub fn moment_bound(p: f64, k: f64) -> f64 {
    assert!(p >= 1.0 && k >= 1.2);
    6.0f64.powf(p) * p.powf(p) * (k * k * k.ln()).powf(p - 1.0)
}

/// Same bound when the first-moment constraint is E|Y| <= alpha instead
/// of 2; the lemma's constant degrades to 6 + alpha.
pub fn moment_bound_for_first_moment(p: f64, k: f64, alpha: f64) -> f64 {
    assert!(p >= 1.0 && k >= 1.2 && alpha > 0.0);
    (6.0 + alpha).powf(p) * p.powf(p) * (k * k * k.ln()).powf(p - 1.0)
}

/// Embedding dimension for a distortion-epsilon, failure-delta guarantee:
/// ceil(C K^2 log K eps^-2 log(1/delta)).
pub fn jl_dimension(k: f64, eps: f64, delta: f64, c: f64) -> usize {
    assert!(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0);
    (c * k * k * k.ln() * eps.powi(-2) * (1.0 / delta).ln()).ceil() as usize
}

/// Sample count for the 0-1 matrix null-space-property guarantee:
/// ceil(C rho^-2 (1/(p(1-p))) (s log(en/s) + u^2)).
pub fn nsp_dimension(rho: f64, p: f64, s: usize, n: usize, u: f64, c: f64) -> usize {
    assert!(rho > 0.0 && rho < 1.0 && p > 0.0 && p < 1.0 && s >= 1 && s <= n);
    let complexity = s as f64 * (E * n as f64 / s as f64).ln() + u * u;
    (c * rho.powi(-2) / (p * (1.0 - p)) * complexity).ceil() as usize
}

/// Sketch size for a delta-optimal least-squares guarantee:
/// ceil(c0 K^2 log K w^2 / delta^2).
pub fn sketch_dimension(k: f64, width_sq: f64, delta: f64, c0: f64) -> usize {
    assert!(delta > 0.0 && delta < 1.0 && width_sq >= 0.0);
    (c0 * k * k * k.ln() * width_sq / (delta * delta)).ceil() as usize
}

/// Map a restricted-isometry constant delta in (0, 1/2) to robust
/// null-space-property parameters:
/// rho' = delta / (sqrt(1-delta^2) - delta/4) < 2 delta and
/// tau' = sqrt(1+delta) / (sqrt(1-delta^2) - delta/4) < 2.
pub fn rip_to_rnsp(delta: f64) -> Result<(f64, f64), BoundError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(BoundError::BadDelta(delta));
    }
    let denom = (1.0 - delta * delta).sqrt() - delta / 4.0;
    let rho = delta / denom;
    let tau = (1.0 + delta).sqrt() / denom;
    debug_assert!(rho < 2.0 * delta && tau < 2.0);
    Ok((rho, tau))
}

/// Kullback-Leibler divergence between Bernoulli(x) and Bernoulli(y).
pub fn kl_bernoulli(x: f64, y: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x) && y > 0.0 && y < 1.0);
    let s = if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    let t = if x == 1.0 { 0.0 } else { (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln() };
    s + t
}

/// Lower bound on P(Binomial(m, p) >= k - 1) for real k in (mp+1, m/2),
/// valid when p < 1/4 and mp >= 1:
/// (8k(1 - k/m))^{-1/2} exp(-m D(k/m || p)).
pub fn binom_tail_lower(m: u64, p: f64, k: f64) -> Result<f64, BoundError> {
    let mf = m as f64;
    if !(p < 0.25) {
        return Err(BoundError::OutOfRange(format!("p = {p} must be < 1/4")));
    }
    if mf * p < 1.0 {
        return Err(BoundError::OutOfRange(format!("mp = {} must be >= 1", mf * p)));
    }
    if !(k > mf * p + 1.0 && k < mf / 2.0) {
        return Err(BoundError::OutOfRange(format!(
            "k = {k} outside (mp+1, m/2) = ({}, {})",
            mf * p + 1.0,
            mf / 2.0
        )));
    }
    let front = 1.0 / (8.0 * k * (1.0 - k / mf)).sqrt();
    Ok(front * (-mf * kl_bernoulli(k / mf, p)).exp())
}

/// Exact P(Binomial(m, p) >= k) by log-space summation of the pmf.
pub fn binom_tail_exact(m: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > m {
        return 0.0;
    }
    // ln factorials up to m
    let mut lnfac = vec![0.0f64; (m + 1) as usize];
    for i in 1..=m as usize {
        lnfac[i] = lnfac[i - 1] + (i as f64).ln();
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let terms: Vec<f64> = (k..=m)
        .map(|j| {
            lnfac[m as usize] - lnfac[j as usize] - lnfac[(m - j) as usize]
                + j as f64 * lp
                + (m - j) as f64 * lq
        })
        .collect();
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - mx).exp()).sum();
    (mx + sum.ln()).exp()
}

/// Outcome of the scalar-inequality grid checks.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarInequalityReport {
    /// (name, max slack over the grid, argmax); slack > 0 is a violation.
    pub checks: Vec<(String, f64, f64)>,
    pub holds: bool,
}

/// Verify on dense grids the four elementary inequalities the bound proofs
/// rest on:
/// (a) e^x <= x + cosh(2x) on [-50, 50];
/// (b) (1-x)^{-1/2} <= e^x on [0, 1/2);
/// (c) min(1, a e^{-x}) <= 2 exp(-x log2/log a) for a in {2,4,8}, x in [-10, 50];
/// (d) (1-x) (2/(x(1-x)))^{x^2/2} <= 1 on (0, 1).
///
/// Returns each check's worst slack (LHS - RHS, log-domain for (d)); all
/// must stay <= 1e-12.
pub fn scalar_inequality_check(grid_density: usize) -> ScalarInequalityReport {
    assert!(grid_density >= 1000);
    let n = grid_density;
    let mut checks = Vec::new();

    let mut scan = |name: &str, lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        let mut worst = f64::NEG_INFINITY;
        let mut arg = lo;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let slack = f(x);
            if slack > worst {
                worst = slack;
                arg = x;
            }
        }
        checks.push((name.to_string(), worst, arg));
    };

    scan("exp_vs_cosh", -50.0, 50.0, &|x: f64| x.exp() - (x + (2.0 * x).cosh()));
    scan("inv_sqrt_vs_exp", 0.0, 0.5 - 1e-9, &|x: f64| (1.0 - x).powf(-0.5) - x.exp());
    for alpha in [2.0f64, 4.0, 8.0] {
        scan(&format!("clamped_exp_alpha{alpha}"), -10.0, 50.0, &move |x: f64| {
            (alpha * (-x).exp()).min(1.0) - 2.0 * (-x * LN2 / alpha.ln()).exp()
        });
    }
    // (d) in log domain: log(1-x) + (x^2/2) log(2/(x(1-x))) <= 0
    scan("bernoulli_mgf_product", 1e-9, 1.0 - 1e-9, &|x: f64| {
        (1.0 - x).ln() + 0.5 * x * x * (2.0f64.ln() - x.ln() - (1.0 - x).ln())
    });

    let holds = checks.iter().all(|&(_, worst, _)| worst <= 1e-12);
    ScalarInequalityReport { checks, holds }
}
