//! psi_alpha (Orlicz) norm calculus.
//!
//! The psi_alpha norm of a random variable X is
//!
//! ```text
//! ||X||_{psi_alpha} = inf { t > 0 : E exp(|X|^alpha / t^alpha) <= 2 }
//! ```
//!
//! alpha = 2 is the sub-Gaussian norm, alpha = 1 the sub-exponential norm.
//! Three evaluation routes are provided: closed forms for named laws, a
//! bracketing root-finder on a (closed-form or empirical) moment generating
//! function, and a sample-based estimator with a bootstrap confidence
//! interval.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{derive_seed, salt, trial_rng};

pub mod properties;

/// Root-finding caps: psi values are searched for in [T_MIN, T_MAX].
const T_MIN: f64 = 1e-8;
const T_MAX: f64 = 1e8;

/// Scalar entry law with parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Normal(0, sigma^2).
    Gaussian { sigma: f64 },
    /// +-1 with probability 1/2 each.
    Rademacher,
    /// {0, 1} with P(1) = p.
    BernoulliZeroOne { p: f64 },
    /// (Bernoulli(p) - p) / sqrt(p(1-p)): mean zero, unit variance.
    StandardizedBernoulli { p: f64 },
    /// X^2 / (K^2 log K) ~ Bernoulli(1/(K^2 log K)), Rademacher signs.
    /// Mean zero, unit variance; requires K >= 4.
    ScaledBernoulli { k: f64 },
    /// +-1/sqrt(q) with probability q/2 each, 0 otherwise. Unit variance.
    SparseTernary { q: f64 },
    /// Exponential with rate lambda (mean 1/lambda).
    Exponential { lambda: f64 },
    /// Uniform on [-M, M].
    BoundedUniform { bound: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), OrliczError> {
        use DistributionSpec::*;
        let ok = match *self {
            Gaussian { sigma } => sigma > 0.0,
            Rademacher => true,
            BernoulliZeroOne { p } | StandardizedBernoulli { p } => p > 0.0 && p < 1.0,
            ScaledBernoulli { k } => k >= 4.0,
            SparseTernary { q } => q > 0.0 && q <= 1.0,
            Exponential { lambda } => lambda > 0.0,
            BoundedUniform { bound } => bound > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(OrliczError::InvalidParameter(format!("{self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        use DistributionSpec::*;
        match *self {
            BernoulliZeroOne { p } => p,
            Exponential { lambda } => 1.0 / lambda,
            _ => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        use DistributionSpec::*;
        match *self {
            Gaussian { sigma } => sigma * sigma,
            Rademacher | StandardizedBernoulli { .. } | ScaledBernoulli { .. } | SparseTernary { .. } => 1.0,
            BernoulliZeroOne { p } => p * (1.0 - p),
            Exponential { lambda } => 1.0 / (lambda * lambda),
            BoundedUniform { bound } => bound * bound / 3.0,
        }
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean() == 0.0
    }

    pub fn label(&self) -> String {
        use DistributionSpec::*;
        match *self {
            Gaussian { sigma } => format!("gaussian(sigma={sigma})"),
            Rademacher => "rademacher".into(),
            BernoulliZeroOne { p } => format!("bernoulli01(p={p})"),
            StandardizedBernoulli { p } => format!("std_bernoulli(p={p})"),
            ScaledBernoulli { k } => format!("scaled_bernoulli(K={k})"),
            SparseTernary { q } => format!("sparse_ternary(q={q})"),
            Exponential { lambda } => format!("exponential(lambda={lambda})"),
            BoundedUniform { bound } => format!("bounded_uniform(M={bound})"),
        }
    }

    /// Draw one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use DistributionSpec::*;
        match *self {
            Gaussian { sigma } => Normal::new(0.0, sigma).expect("validated").sample(rng),
            Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            BernoulliZeroOne { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            StandardizedBernoulli { p } => {
                let q = 1.0 - p;
                if rng.random::<f64>() < p {
                    (q / p).sqrt()
                } else {
                    -(p / q).sqrt()
                }
            }
            ScaledBernoulli { k } => {
                let l2 = k * k * k.ln();
                if rng.random::<f64>() < 1.0 / l2 {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * l2.sqrt()
                } else {
                    0.0
                }
            }
            SparseTernary { q } => {
                if rng.random::<f64>() < q {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign / q.sqrt()
                } else {
                    0.0
                }
            }
            Exponential { lambda } => Exp::new(lambda).expect("validated").sample(rng),
            BoundedUniform { bound } => rng.random_range(-bound..bound),
        }
    }

    /// Closed form for t -> E exp(|X|^alpha / t^alpha), when one exists.
    ///
    /// Returns f64::INFINITY where the expectation diverges.
    pub fn mgf_of_power(&self, alpha: f64) -> Option<Box<dyn Fn(f64) -> f64 + Sync + Send>> {
        use DistributionSpec::*;
        match (self.clone(), alpha) {
            (Gaussian { sigma }, a) if a == 2.0 => Some(Box::new(move |t: f64| {
                let r = 2.0 * sigma * sigma / (t * t);
                if r < 1.0 {
                    (1.0 - r).powf(-0.5)
                } else {
                    f64::INFINITY
                }
            })),
            (Rademacher, a) => Some(Box::new(move |t: f64| (t.powf(-a)).exp())),
            (BernoulliZeroOne { p }, a) => {
                Some(Box::new(move |t: f64| (1.0 - p) + p * (t.powf(-a)).exp()))
            }
            (StandardizedBernoulli { p }, a) if a == 2.0 => {
                let q = 1.0 - p;
                Some(Box::new(move |t: f64| {
                    p * ((q / p) / (t * t)).exp() + q * ((p / q) / (t * t)).exp()
                }))
            }
            (ScaledBernoulli { k }, a) if a == 2.0 => {
                let l2 = k * k * k.ln();
                Some(Box::new(move |t: f64| {
                    let p = 1.0 / l2;
                    p * (l2 / (t * t)).exp() + (1.0 - p)
                }))
            }
            (SparseTernary { q }, a) if a == 2.0 => Some(Box::new(move |t: f64| {
                (1.0 - q) + q * ((1.0 / q) / (t * t)).exp()
            })),
            (Exponential { lambda }, a) if a == 1.0 => Some(Box::new(move |t: f64| {
                if 1.0 / t < lambda {
                    lambda / (lambda - 1.0 / t)
                } else {
                    f64::INFINITY
                }
            })),
            _ => None,
        }
    }
}

/// How a [`PsiNorm`] value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMethod {
    Analytic,
    MgfRoot,
    SampleRoot,
}

/// A psi_alpha norm value with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiNorm {
    pub alpha: f64,
    pub value: f64,
    pub method: PsiMethod,
    /// Bootstrap percentile interval (sample-root only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<(f64, f64)>,
    /// True for laws where only an upper bound is known in closed form.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub upper_bound_only: bool,
    /// True when the bracket collapsed at the lower cap (norm is ~0).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl PsiNorm {
    fn exact(alpha: f64, value: f64, method: PsiMethod) -> Self {
        PsiNorm { alpha, value, method, ci: None, upper_bound_only: false, degenerate: false }
    }

    /// Half-width of the bootstrap interval; 0 when absent.
    pub fn ci_half_width(&self) -> f64 {
        self.ci.map_or(0.0, |(lo, hi)| 0.5 * (hi - lo))
    }

    /// Lower end of the bootstrap interval; the point value when absent.
    pub fn ci_lower(&self) -> f64 {
        self.ci.map_or(self.value, |(lo, _)| lo)
    }
}

#[derive(Debug, Error)]
pub enum OrliczError {
    #[error("no closed form for {0} at alpha = {1}")]
    UnsupportedPair(String, f64),
    #[error("mgf stays above 2 for every t up to {cap:e}: tail is heavier than psi_{alpha}")]
    NoFiniteMgf { alpha: f64, cap: f64 },
    #[error("need at least {floor} samples, got {got}")]
    TooFewSamples { floor: usize, got: usize },
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
    #[error("sample variance {0:.4} is not within 5% of 1")]
    NotUnitVariance(f64),
}

/// Exact psi_alpha value for (law, alpha) pairs with a closed form.
///
/// Supported: Gaussian/Rademacher/Bernoulli(0-1) at alpha = 2, Exponential at
/// alpha = 1, and bounded-uniform at alpha = 2 (upper bound M/sqrt(log 2),
/// flagged as such).
pub fn psi_norm_analytic(d: &DistributionSpec, alpha: f64) -> Result<PsiNorm, OrliczError> {
    use DistributionSpec::*;
    d.validate()?;
    let ln2 = std::f64::consts::LN_2;
    match (d, alpha) {
        (Gaussian { sigma }, a) if a == 2.0 => {
            Ok(PsiNorm::exact(a, (8.0f64 / 3.0).sqrt() * sigma, PsiMethod::Analytic))
        }
        (Rademacher, a) if a == 2.0 => Ok(PsiNorm::exact(a, 1.0 / ln2.sqrt(), PsiMethod::Analytic)),
        (BernoulliZeroOne { p }, a) if a == 2.0 => {
            Ok(PsiNorm::exact(a, 1.0 / (1.0 + 1.0 / p).ln().sqrt(), PsiMethod::Analytic))
        }
        (Exponential { lambda }, a) if a == 1.0 => {
            Ok(PsiNorm::exact(a, 2.0 / lambda, PsiMethod::Analytic))
        }
        (BoundedUniform { bound }, a) if a == 2.0 => Ok(PsiNorm {
            alpha: a,
            value: bound / ln2.sqrt(),
            method: PsiMethod::Analytic,
            ci: None,
            upper_bound_only: true,
            degenerate: false,
        }),
        _ => Err(OrliczError::UnsupportedPair(d.label(), alpha)),
    }
}

/// Root of E exp(|X|^alpha / t^alpha) = 2 by bracketing bisection.
///
/// `mgf_of_power(t)` must be nonincreasing in t (true by definition). The
/// bracket starts at [1e-8, 1] and the upper end doubles until the value
/// drops to 2 or the cap 1e8 is hit, which signals a heavier-than-psi_alpha
/// tail.
pub fn psi_norm_from_mgf(
    mgf_of_power: impl Fn(f64) -> f64,
    alpha: f64,
    tol: f64,
) -> Result<PsiNorm, OrliczError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut hi = 1.0f64;
    if mgf_of_power(hi) > 2.0 {
        loop {
            hi *= 2.0;
            if hi > T_MAX {
                return Err(OrliczError::NoFiniteMgf { alpha, cap: T_MAX });
            }
            if mgf_of_power(hi) <= 2.0 {
                break;
            }
        }
    } else if mgf_of_power(T_MIN) <= 2.0 {
        // Bracket collapses at the lower cap: the norm is indistinguishable
        // from zero (e.g. X = 0 a.s.).
        return Ok(PsiNorm {
            alpha,
            value: 0.0,
            method: PsiMethod::MgfRoot,
            ci: None,
            upper_bound_only: false,
            degenerate: true,
        });
    }
    let mut lo = (hi / 2.0).max(T_MIN);
    if mgf_of_power(lo) <= 2.0 {
        lo = T_MIN;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mgf_of_power(mid) <= 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(PsiNorm::exact(alpha, 0.5 * (lo + hi), PsiMethod::MgfRoot))
}

/// Configuration for the sample-based estimator.
#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    /// Percentile-bootstrap resamples.
    pub resamples: usize,
    /// Two-sided confidence level.
    pub level: f64,
    /// Minimum admissible sample count.
    pub min_samples: usize,
    /// Seed for the resampling streams.
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn with_seed(seed: u64) -> Self {
        BootstrapConfig { resamples: 200, level: 0.90, min_samples: 10_000, seed }
    }
}

/// Sample-based psi_alpha estimate: the expectation in the definition is
/// replaced by the sample mean, and the same root is solved. Ships a
/// percentile-bootstrap CI (default 200 resamples at 90%).
pub fn psi_norm_from_samples(
    xs: &[f64],
    alpha: f64,
    tol: f64,
    seed: u64,
) -> Result<PsiNorm, OrliczError> {
    psi_norm_from_samples_with(xs, alpha, tol, &BootstrapConfig::with_seed(seed))
}

pub fn psi_norm_from_samples_with(
    xs: &[f64],
    alpha: f64,
    tol: f64,
    cfg: &BootstrapConfig,
) -> Result<PsiNorm, OrliczError> {
    if xs.len() < cfg.min_samples {
        return Err(OrliczError::TooFewSamples { floor: cfg.min_samples, got: xs.len() });
    }
    let powers: Vec<f64> = xs.iter().map(|x| x.abs().powf(alpha)).collect();
    let n = powers.len();

    // Laws with few distinct magnitudes admit an exact compressed
    // representation; the bootstrap then resamples category counts instead
    // of raw indices (identical in distribution, much cheaper).
    let compressed = compress(&powers);

    let point = match &compressed {
        Some(groups) => solve_root_u(&weighted_eval(groups), alpha, tol),
        None => solve_root_u(&dense_eval(&powers), alpha, tol),
    };
    let value = match point {
        RootOutcome::Degenerate => {
            return Ok(PsiNorm {
                alpha,
                value: 0.0,
                method: PsiMethod::SampleRoot,
                ci: None,
                upper_bound_only: false,
                degenerate: true,
            });
        }
        RootOutcome::TooHeavy => return Err(OrliczError::NoFiniteMgf { alpha, cap: T_MAX }),
        RootOutcome::Root(t) => t,
    };

    let boot_seed = derive_seed(cfg.seed, salt::BOOTSTRAP);
    let mut roots: Vec<f64> = (0..cfg.resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = trial_rng(boot_seed, b);
            let outcome = match &compressed {
                Some(groups) => {
                    let resampled = resample_counts(groups, n as u64, &mut rng);
                    let eval = weighted_eval(&resampled);
                    solve_root_u(&eval, alpha, tol.max(1e-6))
                }
                None => {
                    let resampled: Vec<f64> =
                        (0..n).map(|_| powers[rng.random_range(0..n)]).collect();
                    let eval = dense_eval(&resampled);
                    solve_root_u(&eval, alpha, tol.max(1e-6))
                }
            };
            match outcome {
                RootOutcome::Root(t) => t,
                RootOutcome::Degenerate => 0.0,
                RootOutcome::TooHeavy => f64::INFINITY,
            }
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    let q = |p: f64| -> f64 {
        let idx = ((roots.len() as f64 - 1.0) * p).round() as usize;
        roots[idx]
    };
    let half = 0.5 * (1.0 - cfg.level);
    let (lo, hi) = (q(half).min(value), q(1.0 - half).max(value));

    Ok(PsiNorm {
        alpha,
        value,
        method: PsiMethod::SampleRoot,
        ci: Some((lo, hi)),
        upper_bound_only: false,
        degenerate: false,
    })
}

/// Exact psi_alpha through the closed form when one exists, else through
/// the closed-form mgf root. Errors when neither route applies.
pub fn psi_norm_exact(d: &DistributionSpec, alpha: f64) -> Result<PsiNorm, OrliczError> {
    match psi_norm_analytic(d, alpha) {
        Ok(p) if !p.upper_bound_only => Ok(p),
        _ => {
            let mgf = d
                .mgf_of_power(alpha)
                .ok_or_else(|| OrliczError::UnsupportedPair(d.label(), alpha))?;
            psi_norm_from_mgf(&*mgf, alpha, 1e-10)
        }
    }
}

/// True iff the estimated psi_2 of a unit-variance sample clears the
/// universal floor sqrt(1/log 2) ~ 1.201, minus the CI half-width.
///
/// Every unit-second-moment random variable satisfies psi_2 >= sqrt(1/log 2),
/// with equality at X = 1 a.s., so this is a basic sanity check for data that
/// claims to be isotropic.
pub fn k_lower_bound_check(samples: &[f64], seed: u64) -> Result<bool, OrliczError> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        + mean * mean;
    // second moment, not central variance: isotropy is about E X^2 = 1
    if (var - 1.0).abs() > 0.05 {
        return Err(OrliczError::NotUnitVariance(var));
    }
    let est = psi_norm_from_samples(samples, 2.0, 1e-8, seed)?;
    let floor = (1.0 / std::f64::consts::LN_2).sqrt();
    // root-solver slack keeps the exact equality case (X = 1 a.s.) stable
    Ok(est.value >= floor - est.ci_half_width() - 1e-6 * floor)
}

// ---------------------------------------------------------------------------
// Root solver in u = t^{-alpha} space.
//
// g(u) = log mean exp(u * s_i) is increasing and convex in u, so a bracketed
// Newton iteration from the right converges fast and safely. Solving
// g(u) = log 2 and mapping back through t = u^{-1/alpha} gives the psi root.
// ---------------------------------------------------------------------------

enum RootOutcome {
    Root(f64),
    /// Root below the lower t-cap: value is numerically zero.
    Degenerate,
    /// Root above the upper t-cap: tail too heavy.
    TooHeavy,
}

/// Evaluator returning (log mean exp(u s), d/du of the same).
type UEval<'a> = Box<dyn Fn(f64) -> (f64, f64) + 'a>;

fn dense_eval(powers: &[f64]) -> UEval<'_> {
    let max_s = powers.iter().copied().fold(0.0f64, f64::max);
    let n = powers.len() as f64;
    Box::new(move |u: f64| {
        let shift = u * max_s;
        let mut sum = 0.0;
        let mut dsum = 0.0;
        for &s in powers {
            let e = (u * s - shift).exp();
            sum += e;
            dsum += s * e;
        }
        ((sum / n).ln() + shift, dsum / sum)
    })
}

fn weighted_eval(groups: &[(f64, u64)]) -> UEval<'_> {
    // the shift must come from categories that are actually present, or a
    // resample that drops the extreme atom underflows to -inf
    let max_s = groups
        .iter()
        .filter(|&&(_, c)| c > 0)
        .map(|&(s, _)| s)
        .fold(0.0f64, f64::max);
    let n: u64 = groups.iter().map(|&(_, c)| c).sum();
    let n = n as f64;
    Box::new(move |u: f64| {
        let shift = u * max_s;
        let mut sum = 0.0;
        let mut dsum = 0.0;
        for &(s, c) in groups {
            if c == 0 {
                continue;
            }
            let e = c as f64 * (u * s - shift).exp();
            sum += e;
            dsum += s * e;
        }
        ((sum / n).ln() + shift, dsum / sum)
    })
}

fn solve_root_u(eval: &UEval<'_>, alpha: f64, tol: f64) -> RootOutcome {
    let target = std::f64::consts::LN_2;
    let u_max = T_MIN.powf(-alpha);
    let u_min = T_MAX.powf(-alpha);
    if eval(u_max).0 < target {
        return RootOutcome::Degenerate;
    }
    if eval(u_min).0 > target {
        return RootOutcome::TooHeavy;
    }
    // geometric scan for a bracket
    let mut ulo = u_min;
    let mut uhi = u_max;
    let mut u = 1.0f64.clamp(u_min, u_max);
    for _ in 0..128 {
        let (g, _) = eval(u);
        if g > target {
            uhi = u;
            let next = u / 16.0;
            if next <= ulo {
                break;
            }
            u = next;
        } else {
            ulo = u;
            let next = u * 16.0;
            if next >= uhi {
                break;
            }
            u = next;
        }
    }
    // bracketed Newton (from the convex side) with bisection fallback
    let mut u = uhi;
    for _ in 0..200 {
        let (g, dg) = eval(u);
        if g > target {
            uhi = uhi.min(u);
        } else {
            ulo = ulo.max(u);
        }
        let newton = u - (g - target) / dg;
        u = if newton > ulo && newton < uhi { newton } else { 0.5 * (ulo + uhi) };
        // relative tolerance in t-space is alpha x tighter in u-space
        if uhi - ulo <= alpha * tol * ulo {
            break;
        }
    }
    RootOutcome::Root((0.5 * (ulo + uhi)).powf(-1.0 / alpha))
}

/// Group exactly-equal magnitudes; None when too many distinct values.
fn compress(powers: &[f64]) -> Option<Vec<(f64, u64)>> {
    const MAX_DISTINCT: usize = 64;
    let mut sorted = powers.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<(f64, u64)> = Vec::new();
    for &s in &sorted {
        match groups.last_mut() {
            Some((v, c)) if *v == s => *c += 1,
            _ => {
                if groups.len() == MAX_DISTINCT {
                    return None;
                }
                groups.push((s, 1));
            }
        }
    }
    Some(groups)
}

/// Multinomial resample of category counts (total n, probabilities c_i/n).
fn resample_counts<R: Rng + ?Sized>(
    groups: &[(f64, u64)],
    n: u64,
    rng: &mut R,
) -> Vec<(f64, u64)> {
    let mut out = Vec::with_capacity(groups.len());
    let mut remaining = n;
    let mut prob_left = 1.0f64;
    for (i, &(s, c)) in groups.iter().enumerate() {
        if remaining == 0 {
            out.push((s, 0));
            continue;
        }
        let draw = if i + 1 == groups.len() {
            remaining
        } else {
            let p = ((c as f64 / n as f64) / prob_left).clamp(0.0, 1.0);
            prob_left -= c as f64 / n as f64;
            rand_distr::Binomial::new(remaining, p).expect("valid binomial").sample(rng)
        };
        out.push((s, draw));
        remaining -= draw;
    }
    out
}
