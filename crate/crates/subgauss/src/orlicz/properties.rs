//! Numeric checks of the standard psi_alpha-norm calculus rules.
//!
//! Each check instantiates one rule on sampled or closed-form laws and
//! reports whether it held and by what margin:
//!
//! * tail domination: P(|X| >= t) <= 2 exp(-t^a / K^a) with K the norm,
//! * the converse with constant sqrt(3),
//! * `||X^2||_{psi_1} = ||X||_{psi_2}^2`,
//! * `||XY||_{psi_1} <= ||X||_{psi_2} ||Y||_{psi_2}`,
//! * moment growth `E|X|^p <= (4 p^{1/a} ||X||_{psi_a})^p`,
//! * centering `||X - EX||_{psi_a} <= 7 ||X||_{psi_a}`,
//! * monotonicity in alpha `||X||_{psi_a} <= 3 ||X||_{psi_b}` for b >= a.

use serde::Serialize;

use super::{psi_norm_from_mgf, psi_norm_from_samples, DistributionSpec, OrliczError};
use crate::rng::trial_rng;

/// Result of one property check. `margin` is the worst remaining slack,
/// normalized so that any negative value is a violation.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub holds: bool,
    pub margin: f64,
    pub detail: String,
}

impl PropertyOutcome {
    fn new(name: impl Into<String>, margin: f64, detail: String) -> Self {
        PropertyOutcome { name: name.into(), holds: margin >= 0.0, margin, detail }
    }
}

/// Additive-relative slack for estimate-vs-exact comparisons: equality cases
/// (e.g. Rademacher products) land exactly on the bound up to root tolerance.
const REL_SLACK: f64 = 1e-6;

fn draws(d: &DistributionSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, 0);
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

/// Exact psi_alpha via closed form or mgf root.
fn psi_exact(d: &DistributionSpec, alpha: f64) -> Result<f64, OrliczError> {
    Ok(super::psi_norm_exact(d, alpha)?.value)
}

/// Tail domination by the norm: at every grid point t with empirical
/// survival >= 10/n, survival <= 2 exp(-(t/K)^alpha) for K the estimated
/// psi_alpha of the same sample.
pub fn tail_domination(xs: &[f64], alpha: f64, seed: u64) -> Result<PropertyOutcome, OrliczError> {
    let est = psi_norm_from_samples(xs, alpha, 1e-8, seed)?;
    let k = est.value;
    let mut mags: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    let lo = mags[n / 2].max(1e-6 * k);
    let hi = mags[n - 1];
    let mut worst = f64::INFINITY;
    let mut worst_t = lo;
    for i in 0..48 {
        let t = lo * (hi / lo).powf(i as f64 / 47.0);
        let surv = (n - mags.partition_point(|&v| v < t)) as f64 / n as f64;
        if surv < 10.0 / n as f64 {
            continue;
        }
        let bound = 2.0 * (-(t / k).powf(alpha)).exp();
        let margin = bound * (1.0 + REL_SLACK) - surv;
        if margin < worst {
            worst = margin;
            worst_t = t;
        }
    }
    Ok(PropertyOutcome::new(
        "tail_domination",
        worst,
        format!("alpha={alpha}, K={k:.4}, worst slack {worst:.3e} at t={worst_t:.4}"),
    ))
}

/// Converse: the smallest K making the empirical tail Gaussian-dominated
/// bounds the norm up to sqrt(3).
pub fn norm_from_tail(xs: &[f64], alpha: f64, seed: u64) -> Result<PropertyOutcome, OrliczError> {
    let est = psi_norm_from_samples(xs, alpha, 1e-8, seed)?;
    let mut mags: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    // smallest K with survival(t) <= 2 exp(-(t/K)^alpha) for all t: it
    // suffices to enforce the inequality at the jump points of the
    // empirical survival function
    let mut k_tail = 0.0f64;
    let mut i = 0;
    while i < n {
        let v = mags[i];
        let j = mags.partition_point(|&m| m < v);
        let surv = (n - j) as f64 / n as f64;
        if v > 0.0 && surv > 0.0 {
            k_tail = k_tail.max(v / (2.0 / surv).ln().powf(1.0 / alpha));
        }
        i = mags.partition_point(|&m| m <= v);
    }
    let bound = 3.0f64.sqrt() * k_tail;
    let margin = bound * (1.0 + REL_SLACK) - est.value;
    Ok(PropertyOutcome::new(
        "norm_from_tail",
        margin,
        format!("estimate {:.4} vs sqrt(3) * {k_tail:.4} = {bound:.4}", est.value),
    ))
}

/// `||X^2||_{psi_1} = ||X||_{psi_2}^2`, exact through closed-form mgfs.
pub fn square_identity(d: &DistributionSpec) -> Result<PropertyOutcome, OrliczError> {
    let mgf2 = d
        .mgf_of_power(2.0)
        .ok_or_else(|| OrliczError::UnsupportedPair(d.label(), 2.0))?;
    let psi2 = psi_norm_from_mgf(&*mgf2, 2.0, 1e-10)?.value;
    // E exp(X^2 / t) is the alpha=2 mgf evaluated at sqrt(t)
    let psi1_sq = psi_norm_from_mgf(|t: f64| mgf2(t.sqrt()), 1.0, 1e-10)?.value;
    let rel = (psi1_sq - psi2 * psi2).abs() / (psi2 * psi2);
    Ok(PropertyOutcome::new(
        "square_identity",
        1e-6 - rel,
        format!("{}: psi1(X^2)={psi1_sq:.8} vs psi2(X)^2={:.8}", d.label(), psi2 * psi2),
    ))
}

/// `||XY||_{psi_1} <= ||X||_{psi_2} ||Y||_{psi_2}` on independent samples.
pub fn product_bound(
    dx: &DistributionSpec,
    dy: &DistributionSpec,
    n: usize,
    seed: u64,
) -> Result<PropertyOutcome, OrliczError> {
    let xs = draws(dx, n, seed);
    let ys = draws(dy, n, seed.wrapping_add(1));
    let prod: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x * y).collect();
    let est = psi_norm_from_samples(&prod, 1.0, 1e-8, seed)?;
    let bound = psi_exact(dx, 2.0)? * psi_exact(dy, 2.0)?;
    let margin = bound * (1.0 + REL_SLACK) + est.ci_half_width() - est.value;
    Ok(PropertyOutcome::new(
        "product_bound",
        margin,
        format!("{} x {}: psi1 estimate {:.4} vs bound {bound:.4}", dx.label(), dy.label(), est.value),
    ))
}

/// Moment growth: E|X|^p <= (4 p^{1/alpha} psi_alpha)^p for p in 1..=4.
pub fn moment_growth(
    d: &DistributionSpec,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<PropertyOutcome, OrliczError> {
    let xs = draws(d, n, seed);
    let psi = psi_exact(d, alpha)?;
    let mut worst = f64::INFINITY;
    let mut detail = format!("{}:", d.label());
    for p in 1..=4 {
        let p = p as f64;
        let moment = xs.iter().map(|x| x.abs().powf(p)).sum::<f64>() / n as f64;
        let bound = (4.0 * p.powf(1.0 / alpha) * psi).powf(p);
        worst = worst.min((bound - moment) / bound);
        detail.push_str(&format!(" p={p}: {moment:.3}<= {bound:.3};"));
    }
    Ok(PropertyOutcome::new("moment_growth", worst, detail))
}

/// Centering: psi_alpha(X - EX) <= 7 psi_alpha(X).
pub fn centering_bound(
    d: &DistributionSpec,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<PropertyOutcome, OrliczError> {
    let mean = d.mean();
    let centered: Vec<f64> = draws(d, n, seed).into_iter().map(|x| x - mean).collect();
    let est = psi_norm_from_samples(&centered, alpha, 1e-8, seed)?;
    let bound = 7.0 * psi_exact(d, alpha)?;
    let margin = bound + est.ci_half_width() - est.value;
    Ok(PropertyOutcome::new(
        "centering_bound",
        margin,
        format!("{}: psi_{alpha}(X-EX) estimate {:.4} vs 7*psi = {bound:.4}", d.label(), est.value),
    ))
}

/// Monotonicity in alpha: psi_alpha(X) <= 3 psi_beta(X) for beta >= alpha.
pub fn alpha_monotonicity(
    d: &DistributionSpec,
    alpha: f64,
    beta: f64,
    n: usize,
    seed: u64,
) -> Result<PropertyOutcome, OrliczError> {
    assert!(beta >= alpha);
    let lower = match d.mgf_of_power(alpha) {
        Some(mgf) => psi_norm_from_mgf(&*mgf, alpha, 1e-10)?.value,
        None => psi_norm_from_samples(&draws(d, n, seed), alpha, 1e-8, seed)?.value,
    };
    let upper = psi_exact(d, beta)?;
    let bound = 3.0 * upper;
    let margin = bound * (1.0 + REL_SLACK) + 0.02 * upper - lower;
    Ok(PropertyOutcome::new(
        "alpha_monotonicity",
        margin,
        format!("{}: psi_{alpha} = {lower:.4} vs 3*psi_{beta} = {bound:.4}", d.label()),
    ))
}

/// Run the whole suite on a default palette of laws.
pub fn run_suite(n: usize, seed: u64) -> Result<Vec<PropertyOutcome>, OrliczError> {
    use DistributionSpec::*;
    let gauss = Gaussian { sigma: 1.0 };
    let rad = Rademacher;
    let bern = BernoulliZeroOne { p: 0.3 };
    let scaled = ScaledBernoulli { k: 4.0 };
    let mut out = Vec::new();
    for (i, law) in [gauss.clone(), rad.clone(), scaled.clone()].iter().enumerate() {
        out.push(tail_domination(&draws(law, n, seed + i as u64), 2.0, seed)?);
        out.push(norm_from_tail(&draws(law, n, seed + 10 + i as u64), 2.0, seed)?);
    }
    for law in [gauss.clone(), rad.clone(), bern.clone(), scaled.clone()] {
        out.push(square_identity(&law)?);
    }
    out.push(product_bound(&gauss, &rad, n, seed + 20)?);
    out.push(product_bound(&rad, &rad, n, seed + 21)?);
    out.push(product_bound(&gauss, &gauss, n, seed + 22)?);
    for law in [gauss.clone(), rad.clone(), scaled.clone()] {
        out.push(moment_growth(&law, 2.0, n, seed + 30)?);
    }
    out.push(centering_bound(&bern, 2.0, n, seed + 40)?);
    out.push(centering_bound(&Exponential { lambda: 1.0 }, 1.0, n, seed + 41)?);
    out.push(alpha_monotonicity(&gauss, 1.0, 2.0, n, seed + 50)?);
    out.push(alpha_monotonicity(&rad, 1.0, 2.0, n, seed + 51)?);
    Ok(out)
}
