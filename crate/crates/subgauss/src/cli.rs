//! Command-line front end.
//!
//! Twelve subcommands, each a pure function of (key=value params, seed):
//! `psi`, `width`, `tail`, `hw`, `concentrate`, `scaling`, `tightness`,
//! `jl`, `sketch`, `nsp`, `binom`, `appendixc`. Unknown parameter keys are
//! rejected by name. Exit codes: 0 success, 1 usage error, 2 a verified
//! bound or check was violated.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::{
    binom_tail_exact, binom_tail_lower, kl_bernoulli, new_bernstein_bound,
    new_hanson_wright_bound, nsp_dimension, rip_to_rnsp, scalar_inequality_check, sketch_dimension,
    standard_bernstein_bound, TailBound,
};
use crate::constants::Constants;
use crate::ensembles::{sample_matrix_with_rng, EnsembleSpec, MultiplierSpec};
use crate::geometry::{chi_mean, gaussian_width, radius, SetSpec};
use crate::mc::{
    deviation_batch, domination_check, empirical_hw_values, empirical_tail_values, jl_probe,
    jl_optimality_probe, median_abs, scaling_fit, survival_grid, tightness_check, SumSpec,
    TrialBatch,
};
use crate::nullspace::{failure_probe, projected_rip, rnsp_certificate};
use crate::orlicz::{
    psi_norm_analytic, psi_norm_exact, psi_norm_from_samples, DistributionSpec, PsiMethod,
};
use crate::rng::{derive_seed, salt, trial_rng, DEFAULT_SEED};
use crate::sketch::{solve_original, solve_sketched, Constraint, SketchProblem};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// A fully-resolved run: one command, its parameters, and the I/O knobs.
#[derive(Debug)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub constants: Constants,
    pub no_timestamp: bool,
}

impl RunConfig {
    pub fn new(command: impl Into<String>) -> Self {
        RunConfig {
            command: command.into(),
            params: BTreeMap::new(),
            seed: DEFAULT_SEED,
            trials: None,
            out: None,
            format: OutputFormat::Json,
            constants: Constants::frozen(),
            no_timestamp: false,
        }
    }

    /// Merge `key=value` lines from a config file; explicit params win.
    pub fn load_config_file(&mut self, path: &PathBuf) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {} is not key=value: {raw:?}", lineno + 1))
            })?;
            self.params.entry(k.trim().to_string()).or_insert_with(|| v.trim().to_string());
        }
        Ok(())
    }
}

/// Result of one dispatched run.
pub struct RunResult {
    /// False when a verified bound was violated (exit code 2).
    pub passed: bool,
    pub report: Value,
    /// CSV rendering for `--format csv`.
    pub csv: String,
}

// ---------------------------------------------------------------------------
// parameter reading
// ---------------------------------------------------------------------------

struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn str_or(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("parameter {key}={v:?} is not a number"))),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("parameter {key}={v:?} is not an integer"))),
        }
    }

    /// Reject leftovers by name.
    fn finish(&mut self) -> Result<(), CliError> {
        if let Some(key) = self.map.keys().next() {
            return Err(CliError::Usage(format!("unknown parameter key {key:?}")));
        }
        Ok(())
    }
}

fn parse_law(p: &mut Params, key: &str, default: &str) -> Result<DistributionSpec, CliError> {
    let name = p.str_or(key, default);
    let law = match name.as_str() {
        "gaussian" => DistributionSpec::Gaussian { sigma: p.f64_or("sigma", 1.0)? },
        "rademacher" => DistributionSpec::Rademacher,
        "bernoulli01" => DistributionSpec::BernoulliZeroOne { p: p.f64_or("p", 0.5)? },
        "std_bernoulli" => DistributionSpec::StandardizedBernoulli { p: p.f64_or("p", 0.5)? },
        "scaled_bernoulli" => DistributionSpec::ScaledBernoulli { k: p.f64_or("k", 4.0)? },
        "sparse_ternary" => DistributionSpec::SparseTernary { q: p.f64_or("q", 0.5)? },
        "exponential" => DistributionSpec::Exponential { lambda: p.f64_or("lambda", 1.0)? },
        "bounded_uniform" => DistributionSpec::BoundedUniform { bound: p.f64_or("bound", 1.0)? },
        other => {
            return Err(CliError::Usage(format!(
                "{key}={other:?} is not a known law (gaussian, rademacher, bernoulli01, \
                 std_bernoulli, scaled_bernoulli, sparse_ternary, exponential, bounded_uniform)"
            )))
        }
    };
    law.validate().map_err(usage)?;
    Ok(law)
}

/// Nominal ensemble K for a unit-variance law (exact psi_2 of the entry for
/// heavy laws, the Gaussian marginal bound for bounded centered ones).
fn ensemble_for(law: &DistributionSpec, rows: usize, cols: usize) -> Result<EnsembleSpec, CliError> {
    match law {
        DistributionSpec::Gaussian { .. } => Ok(EnsembleSpec::gaussian(rows, cols)),
        DistributionSpec::Rademacher => Ok(EnsembleSpec::rademacher(rows, cols)),
        DistributionSpec::StandardizedBernoulli { p } => {
            EnsembleSpec::standardized_bernoulli(rows, cols, *p).map_err(usage)
        }
        DistributionSpec::ScaledBernoulli { k } => {
            EnsembleSpec::scaled_bernoulli(rows, cols, *k).map_err(usage)
        }
        DistributionSpec::SparseTernary { q } => {
            EnsembleSpec::sparse_ternary(rows, cols, *q).map_err(usage)
        }
        other => Err(CliError::Usage(format!(
            "{} is not a unit-variance ensemble law",
            other.label()
        ))),
    }
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

fn envelope(cfg: &RunConfig, trials: Option<usize>, result: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("command".into(), Value::String(cfg.command.clone()));
    let params: serde_json::Map<String, Value> = cfg
        .params
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    map.insert("params".into(), Value::Object(params));
    map.insert("seed".into(), json!(cfg.seed));
    if let Some(t) = trials {
        map.insert("trials".into(), json!(t));
    }
    if !cfg.no_timestamp {
        let ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        map.insert("timestamp_ms".into(), json!(ms as u64));
    }
    map.insert("result".into(), result);
    Value::Object(map)
}

/// Flat `key,value` CSV of a JSON object, keys in sorted order, nested
/// objects dotted.
fn flat_csv(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, inner) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, inner, rows);
                }
            }
            Value::Array(items) => {
                for (i, inner) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), inner, rows);
                }
            }
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

fn survival_csv(batch: &TrialBatch, bound: &TailBound, partner: Option<&TailBound>) -> String {
    let mut s = String::from("t,survival,wilson_hi,bound,partner_bound\n");
    for p in &batch.survival {
        let partner_v =
            partner.map_or(String::new(), |b| format!("{}", b.eval(p.t)));
        s.push_str(&format!(
            "{},{},{},{},{partner_v}\n",
            p.t,
            p.estimate,
            p.wilson_hi,
            bound.eval(p.t)
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

/// Run one subcommand. The returned report is deterministic for fixed
/// (params, seed) and thread-count independent.
pub fn dispatch(cfg: &RunConfig) -> Result<RunResult, CliError> {
    let mut p = Params { map: cfg.params.clone() };
    match cfg.command.as_str() {
        "psi" => cmd_psi(cfg, &mut p),
        "width" => cmd_width(cfg, &mut p),
        "tail" => cmd_tail(cfg, &mut p),
        "hw" => cmd_hw(cfg, &mut p),
        "concentrate" => cmd_concentrate(cfg, &mut p),
        "scaling" => cmd_scaling(cfg, &mut p),
        "tightness" => cmd_tightness(cfg, &mut p),
        "jl" => cmd_jl(cfg, &mut p),
        "sketch" => cmd_sketch(cfg, &mut p),
        "nsp" => cmd_nsp(cfg, &mut p),
        "binom" => cmd_binom(cfg, &mut p),
        "appendixc" => cmd_appendixc(cfg, &mut p),
        other => Err(CliError::Usage(format!(
            "unknown command {other:?} (expected one of psi, width, tail, hw, concentrate, \
             scaling, tightness, jl, sketch, nsp, binom, appendixc)"
        ))),
    }
}

fn cmd_psi(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let law = parse_law(p, "dist", "rademacher")?;
    let alpha = p.f64_or("alpha", 2.0)?;
    let tol = p.f64_or("tol", 1e-9)?;
    let method = p.str_or("method", "auto");
    let trials = cfg.trials.unwrap_or(100_000);
    p.finish()?;
    let norm = match method.as_str() {
        "analytic" => psi_norm_analytic(&law, alpha).map_err(usage)?,
        "mgf" => psi_norm_exact(&law, alpha).map_err(usage)?,
        "samples" => {
            let mut rng = trial_rng(cfg.seed, 0);
            let xs: Vec<f64> = (0..trials).map(|_| law.sample(&mut rng)).collect();
            psi_norm_from_samples(&xs, alpha, tol, derive_seed(cfg.seed, salt::BOOTSTRAP))
                .map_err(usage)?
        }
        "auto" => match psi_norm_analytic(&law, alpha) {
            Ok(n) => n,
            Err(_) => match psi_norm_exact(&law, alpha) {
                Ok(n) => n,
                Err(_) => {
                    let mut rng = trial_rng(cfg.seed, 0);
                    let xs: Vec<f64> = (0..trials).map(|_| law.sample(&mut rng)).collect();
                    psi_norm_from_samples(&xs, alpha, tol, derive_seed(cfg.seed, salt::BOOTSTRAP))
                        .map_err(usage)?
                }
            },
        },
        other => return Err(CliError::Usage(format!("method={other:?} is not one of analytic, mgf, samples, auto"))),
    };
    let used_samples = norm.method == PsiMethod::SampleRoot;
    let result = serde_json::to_value(&norm).expect("serializable");
    let report = envelope(cfg, used_samples.then_some(trials), result);
    let csv = flat_csv(&report);
    Ok(RunResult { passed: true, report, csv })
}

fn parse_set(p: &mut Params, seed: u64) -> Result<SetSpec, CliError> {
    let kind = p.str_or("set", "sparse");
    match kind.as_str() {
        "sparse" => {
            let n = p.usize_or("n", 100)?;
            let s = p.usize_or("s", 5)?;
            Ok(SetSpec::SparseSphere { n, s })
        }
        "csv" => {
            let file = p
                .take("file")
                .ok_or_else(|| CliError::Usage("set=csv requires file=<path>".into()))?;
            let pts = crate::io::read_points_csv(&PathBuf::from(file)).map_err(usage)?;
            Ok(SetSpec::FinitePoints(pts))
        }
        "simplex_corners" => {
            // canonical basis vectors of R^n: a small built-in finite set
            let n = p.usize_or("n", 8)?;
            let pts = (0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    v
                })
                .collect();
            Ok(SetSpec::FinitePoints(pts))
        }
        "gaussian_cloud" => {
            let n = p.usize_or("n", 8)?;
            let count = p.usize_or("points", 16)?;
            let mut rng = trial_rng(derive_seed(seed, salt::INSTANCE), 0);
            let pts = (0..count)
                .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect();
            Ok(SetSpec::FinitePoints(pts))
        }
        other => Err(CliError::Usage(format!(
            "set={other:?} is not one of sparse, csv, simplex_corners, gaussian_cloud"
        ))),
    }
}

fn cmd_width(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let set = parse_set(p, cfg.seed)?;
    let trials = cfg.trials.unwrap_or(10_000);
    p.finish()?;
    let w = gaussian_width(&set, trials, cfg.seed).map_err(usage)?;
    let result = json!({
        "estimate": w.estimate,
        "ci_lo": w.ci.0,
        "ci_hi": w.ci.1,
        "std_error": w.std_error,
        "radius": radius(&set),
        "ambient_dim": set.ambient_dim(),
    });
    let report = envelope(cfg, Some(trials), result);
    let csv = flat_csv(&report);
    Ok(RunResult { passed: true, report, csv })
}

fn cmd_tail(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let law = parse_law(p, "dist", "scaled_bernoulli")?;
    if law.variance() != 1.0 {
        return Err(CliError::Usage(format!(
            "{} does not have unit variance; the centered-square statistic needs it",
            law.label()
        )));
    }
    let m = p.usize_or("m", 50)?;
    let shape = p.str_or("a", "uniform");
    let c_override = p.take("c").map(|v| v.parse::<f64>()).transpose()
        .map_err(|_| CliError::Usage("parameter c must be a number".into()))?;
    p.finish()?;
    let trials = cfg.trials.unwrap_or(100_000);

    let a: Vec<f64> = match shape.as_str() {
        "uniform" => vec![1.0 / (m as f64).sqrt(); m],
        "e1" => {
            let mut a = vec![0.0; m];
            a[0] = 1.0;
            a
        }
        other => return Err(CliError::Usage(format!("a={other:?} is not one of uniform, e1"))),
    };
    let k_entry = psi_norm_exact(&law, 2.0).map_err(usage)?.value;
    let bound = new_bernstein_bound(&a, &vec![k_entry; m], c_override).map_err(usage)?;
    let partner = standard_bernstein_bound(&a, k_entry, Some(bound.c)).map_err(usage)?;
    let spec = SumSpec { a, laws: vec![law.clone(); m] };
    let values = empirical_tail_values(&spec, trials, cfg.seed);
    let grid = survival_grid(median_abs(&values), bound.switch_point());
    let batch = TrialBatch::assemble(
        "sum_tail",
        cfg.seed,
        values,
        &grid,
        false,
        json!({"law": law.label(), "m": m}),
    )
    .map_err(usage)?;
    let dom = domination_check(&batch, &bound, 10.0 / trials as f64);
    let result = json!({
        "law": law.label(),
        "m": m,
        "k_entry": k_entry,
        "variance_proxy": bound.variance_proxy,
        "linear_scale": bound.linear_scale,
        "c": bound.c,
        "provenance": bound.provenance,
        "holds": dom.holds,
        "checked_points": dom.checked_points,
        "violations": dom.violations,
        "standard_variance_proxy": partner.variance_proxy,
    });
    let csv = survival_csv(&batch, &bound, Some(&partner));
    let report = envelope(cfg, Some(trials), result);
    Ok(RunResult { passed: dom.holds, report, csv })
}

fn cmd_hw(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let law = parse_law(p, "dist", "gaussian")?;
    if law.variance() != 1.0 || !law.is_mean_zero() {
        return Err(CliError::Usage(format!(
            "{} is not mean zero with unit variance",
            law.label()
        )));
    }
    let n = p.usize_or("n", 16)?;
    let matrix = p.str_or("matrix", "identity");
    let c_override = p.take("c").map(|v| v.parse::<f64>()).transpose()
        .map_err(|_| CliError::Usage("parameter c must be a number".into()))?;
    p.finish()?;
    let trials = cfg.trials.unwrap_or(100_000);

    let a = match matrix.as_str() {
        "identity" => DMatrix::<f64>::identity(n, n),
        "dense" => {
            let mut rng = trial_rng(derive_seed(cfg.seed, salt::INSTANCE), 0);
            DMatrix::from_fn(n, n, |_, _| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g / n as f64
            })
        }
        other => return Err(CliError::Usage(format!("matrix={other:?} is not one of identity, dense"))),
    };
    let k = psi_norm_exact(&law, 2.0).map_err(usage)?.value;
    let mut bound =
        new_hanson_wright_bound(&a, k, Some(c_override.unwrap_or(cfg.constants.hw_c.value)))
            .map_err(usage)?;
    if c_override.is_none() {
        bound.provenance = cfg.constants.hw_c.provenance;
    }
    let values = empirical_hw_values(&a, &law, trials, cfg.seed);
    let grid = survival_grid(median_abs(&values), bound.switch_point());
    let batch = TrialBatch::assemble(
        "quadratic_tail",
        cfg.seed,
        values,
        &grid,
        false,
        json!({"law": law.label(), "n": n}),
    )
    .map_err(usage)?;
    let dom = domination_check(&batch, &bound, 10.0 / trials as f64);
    let result = json!({
        "law": law.label(),
        "n": n,
        "matrix": matrix,
        "k": k,
        "variance_proxy": bound.variance_proxy,
        "linear_scale": bound.linear_scale,
        "c": bound.c,
        "provenance": bound.provenance,
        "holds": dom.holds,
        "checked_points": dom.checked_points,
        "violations": dom.violations,
    });
    let csv = survival_csv(&batch, &bound, None);
    let report = envelope(cfg, Some(trials), result);
    Ok(RunResult { passed: dom.holds, report, csv })
}

fn cmd_concentrate(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let law = parse_law(p, "ensemble", "gaussian")?;
    let m = p.usize_or("m", 64)?;
    let set_kind = p.str_or("set", "sparse");
    let n = p.usize_or("n", 8)?;
    let s = p.usize_or("s", 2)?;
    let b_kind = p.str_or("b", "identity");
    let u = p.f64_or("u", (30.0f64).ln().sqrt())?;
    p.finish()?;
    let trials = cfg.trials.unwrap_or(1000);

    let t = match set_kind.as_str() {
        "sparse" => SetSpec::SparseSphere { n, s },
        "singleton" => {
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            SetSpec::singleton(x)
        }
        other => return Err(CliError::Usage(format!("set={other:?} is not one of sparse, singleton"))),
    };
    let ensemble = ensemble_for(&law, m, n)?;
    let b = match b_kind.as_str() {
        "identity" => MultiplierSpec::identity(m),
        "projection" => MultiplierSpec::ortho_projection(m).map_err(usage)?,
        "decaying" => {
            let d: Vec<f64> = (0..m).map(|i| 1.0 / (1.0 + i as f64).sqrt()).collect();
            MultiplierSpec::diagonal(d).map_err(usage)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "b={other:?} is not one of identity, projection, decaying"
            )))
        }
    };
    let batch = deviation_batch(&ensemble, &b, &t, trials, cfg.seed).map_err(usage)?;
    let w = gaussian_width(&t, 20_000, derive_seed(cfg.seed, salt::INSTANCE)).map_err(usage)?;
    let rad = radius(&t);
    let klk = ensemble.k * ensemble.k.ln().sqrt();
    let c_main = cfg.constants.main_c.value;
    let rhs_mean = c_main * klk * b.operator_norm() * (w.estimate + rad);
    let rhs_tail = c_main * klk * b.operator_norm() * (w.estimate + u * rad);
    let mean: f64 = batch.values.iter().sum::<f64>() / batch.values.len() as f64;
    let mut sorted = batch.values.clone();
    sorted.sort_by(f64::total_cmp);
    let quantile_level = 1.0 - 3.0 * (-u * u).exp();
    let tail_quantile = if quantile_level <= 0.0 {
        sorted[sorted.len() - 1]
    } else {
        sorted[((sorted.len() as f64 - 1.0) * quantile_level).floor() as usize]
    };
    let holds = mean <= rhs_mean && tail_quantile <= rhs_tail;
    let result = json!({
        "ensemble": ensemble.label,
        "k": ensemble.k,
        "b": b_kind,
        "width": w.estimate,
        "radius": rad,
        "stable_rank": b.stable_rank(),
        "mean_deviation": mean,
        "rhs_mean": rhs_mean,
        "tail_quantile_level": quantile_level,
        "tail_quantile": tail_quantile,
        "rhs_tail": rhs_tail,
        "psi2": batch.psi2,
        "c_main": c_main,
        "holds": holds,
    });
    let report = envelope(cfg, Some(trials), result);
    let csv = flat_csv(&report);
    Ok(RunResult { passed: holds, report, csv })
}

fn cmd_scaling(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let ks_str = p.str_or("ks", "4,6,8,12");
    let slope_lo = p.f64_or("slope_lo", 0.2)?;
    let slope_hi = p.f64_or("slope_hi", 3.0)?;
    p.finish()?;
    let trials = cfg.trials.unwrap_or(100_000);
    let ks: Result<Vec<f64>, _> = ks_str.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let ks = ks.map_err(|_| CliError::Usage(format!("ks={ks_str:?} is not a comma list of numbers")))?;
    let t = SetSpec::singleton(vec![1.0]);
    let fit = scaling_fit(
        &ks,
        &|k: f64| (k * k * k.ln()).ceil() as usize,
        &MultiplierSpec::identity,
        &t,
        trials,
        cfg.seed,
    )
    .map_err(usage)?;
    let holds = fit.residual_sum < fit.alt_residual_sum
        && fit.slope >= slope_lo
        && fit.slope <= slope_hi;
    let mut csv = String::from("k,m,psi2,fit,alt_fit\n");
    for i in 0..fit.ks.len() {
        let g1 = fit.ks[i] * fit.ks[i].ln().sqrt();
        let g2 = fit.ks[i] * fit.ks[i];
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fit.ks[i],
            fit.ms[i],
            fit.psi2[i],
            fit.intercept + fit.slope * g1,
            fit.alt_intercept + fit.alt_slope * g2
        ));
    }
    let result = json!({
        "fit": fit,
        "holds": holds,
        "slope_window": [slope_lo, slope_hi],
    });
    let report = envelope(cfg, Some(trials), result);
    Ok(RunResult { passed: holds, report, csv })
}

fn cmd_tightness(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let k = p.f64_or("k", 4.0)?;
    let m = p.usize_or("m", (k * k * k.ln()).ceil() as usize)?;
    p.finish()?;
    let trials = cfg.trials.unwrap_or(200_000);
    let rep = tightness_check(k, m, trials, cfg.seed).map_err(usage)?;
    let passed = rep.passes;
    let result = serde_json::to_value(&rep).expect("serializable");
    let report = envelope(cfg, Some(trials), result);
    let csv = flat_csv(&report);
    Ok(RunResult { passed, report, csv })
}

fn cmd_jl(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let mode = p.str_or("mode", "probe");
    match mode.as_str() {
        "probe" => {
            let law = parse_law(p, "dist", "rademacher")?;
            let n_points = p.usize_or("points", 100)?;
            let dim = p.usize_or("dim", 256)?;
            let eps = p.f64_or("eps", 0.2)?;
            let delta = p.f64_or("delta", 0.05)?;
            let c = p.f64_or("c", cfg.constants.jl_c.value)?;
            p.finish()?;
            let seeds = cfg.trials.unwrap_or(200);
            let ensemble = ensemble_for(&law, 1, 1)?;
            let mut rng = trial_rng(derive_seed(cfg.seed, salt::INSTANCE), 0);
            let points: Vec<Vec<f64>> = (0..n_points)
                .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect();
            let rep = jl_probe(&points, &law, ensemble.k, eps, delta, c, seeds, cfg.seed);
            let passed = rep.holds;
            let result = serde_json::to_value(&rep).expect("serializable");
            let report = envelope(cfg, Some(seeds), result);
            let csv = flat_csv(&report);
            Ok(RunResult { passed, report, csv })
        }
        "optimality" => {
            let pr = p.f64_or("p", 0.1)?;
            let m = p.usize_or("m", 4)?;
            let eps = p.f64_or("eps", 0.2)?;
            p.finish()?;
            let trials = cfg.trials.unwrap_or(100_000);
            let rep = jl_optimality_probe(pr, m, eps, trials, cfg.seed).map_err(usage)?;
            let passed = rep.holds;
            let result = serde_json::to_value(&rep).expect("serializable");
            let report = envelope(cfg, Some(trials), result);
            let csv = flat_csv(&report);
            Ok(RunResult { passed, report, csv })
        }
        other => Err(CliError::Usage(format!("mode={other:?} is not one of probe, optimality"))),
    }
}

fn cmd_sketch(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let n = p.usize_or("n", 400)?;
    let d = p.usize_or("d", 10)?;
    let delta = p.f64_or("delta", 0.1)?;
    let noise = p.f64_or("noise", 1.0)?;
    let constraint = match p.str_or("constraint", "unconstrained").as_str() {
        "unconstrained" => Constraint::Unconstrained,
        "orthant" => Constraint::NonnegativeOrthant,
        "l1ball" => Constraint::L1Ball { radius: p.f64_or("radius", 1.0)? },
        other => {
            return Err(CliError::Usage(format!(
                "constraint={other:?} is not one of unconstrained, orthant, l1ball"
            )))
        }
    };
    let k = (8.0f64 / 3.0).sqrt();
    let width_sq = chi_mean(d) * chi_mean(d);
    let m_default = sketch_dimension(k, width_sq, delta, cfg.constants.sketch_c0.value);
    let m = p.usize_or("m", m_default)?;
    p.finish()?;
    let seeds = cfg.trials.unwrap_or(200);

    // one fixed instance, many sketch draws
    let mut rng = trial_rng(derive_seed(cfg.seed, salt::INSTANCE), 0);
    let b = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let x0 = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let e = DVector::from_fn(n, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        noise * g
    });
    let y = &b * &x0 + e;
    let problem = SketchProblem {
        b,
        y,
        constraint,
        sketch_law: DistributionSpec::Gaussian { sigma: 1.0 },
        sketch_k: k,
        m,
    };
    let f_star = solve_original(&problem, 1e-10).map_err(usage)?.objective;

    let mut ok_delta = 0usize;
    let mut lemma_ok = true;
    let mut worst_ratio_gap = f64::NEG_INFINITY;
    let mut deltas = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let solve = solve_sketched(&problem, derive_seed(cfg.seed, s as u64), 1e-10)
            .map_err(usage)?;
        let cert = &solve.certificate;
        deltas.push(cert.delta_achieved);
        if cert.delta_achieved <= delta {
            ok_delta += 1;
        }
        if let Some(bound) = cert.ratio_bound {
            let gap = cert.f_hat - bound;
            worst_ratio_gap = worst_ratio_gap.max(gap);
            if gap > 1e-6 * bound.max(1.0) {
                lemma_ok = false;
            }
        }
    }
    deltas.sort_by(f64::total_cmp);
    let fraction = ok_delta as f64 / seeds as f64;
    let holds = lemma_ok && fraction >= 0.9;
    let result = json!({
        "n": n,
        "d": d,
        "m": m,
        "delta": delta,
        "f_star": f_star,
        "median_delta_achieved": deltas[deltas.len() / 2],
        "fraction_delta_ok": fraction,
        "ratio_bound_ok": lemma_ok,
        "worst_ratio_gap": worst_ratio_gap,
        "sketch_c0": cfg.constants.sketch_c0.value,
        "holds": holds,
    });
    let report = envelope(cfg, Some(seeds), result);
    let csv = flat_csv(&report);
    Ok(RunResult { passed: holds, report, csv })
}

fn cmd_nsp(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let mode = p.str_or("mode", "rip");
    match mode.as_str() {
        "rip" => {
            let n = p.usize_or("n", 12)?;
            let s = p.usize_or("s", 2)?;
            let prob = p.f64_or("p", 0.5)?;
            let rho = p.f64_or("rho", 0.5)?;
            let u = p.f64_or("u", (30.0f64).ln().sqrt())?;
            let c = p.f64_or("c", cfg.constants.nsp_c.value)?;
            let m_default = nsp_dimension(rho, prob, s, n, u, c);
            let m = p.usize_or("m", m_default)?;
            p.finish()?;
            let seeds = cfg.trials.unwrap_or(100);
            let spec = EnsembleSpec::bernoulli01(m, n, prob).map_err(usage)?;
            let mut ok = 0usize;
            let mut deltas = Vec::with_capacity(seeds);
            for sd in 0..seeds {
                let mut rng = trial_rng(cfg.seed, sd as u64);
                let a = sample_matrix_with_rng(&spec, &mut rng);
                let rep = projected_rip(&a, prob, s).map_err(usage)?;
                if rep.delta_achieved <= rho / 2.0 {
                    ok += 1;
                }
                deltas.push(rep.delta_achieved);
            }
            deltas.sort_by(f64::total_cmp);
            let fraction = ok as f64 / seeds as f64;
            let median_delta = deltas[deltas.len() / 2];
            // parameter transfer on a delta grid: rho' < 2 delta, tau' < 2
            let mut transfer_ok = true;
            for i in 1..50 {
                let delta = 0.5 * i as f64 / 50.0;
                let (rp, tp) = rip_to_rnsp(delta).map_err(usage)?;
                if !(rp < 2.0 * delta && tp < 2.0) {
                    transfer_ok = false;
                }
            }
            let cert = if median_delta < 0.5 {
                let rep = crate::nullspace::RipReport {
                    order: 2 * s,
                    delta_achieved: median_delta,
                    sigma_min: 1.0 - median_delta,
                    sigma_max: 1.0 + median_delta,
                    supports_enumerated: crate::geometry::binomial(n, 2 * s),
                    m,
                    n,
                    p: prob,
                };
                Some(rnsp_certificate(&rep, rho).map_err(usage)?)
            } else {
                None
            };
            let holds = fraction >= 0.9 && transfer_ok;
            let result = json!({
                "n": n,
                "s": s,
                "p": prob,
                "rho": rho,
                "m": m,
                "u": u,
                "c": c,
                "fraction_delta_ok": fraction,
                "median_delta": median_delta,
                "transfer_ok": transfer_ok,
                "certificate": cert,
                "holds": holds,
            });
            let report = envelope(cfg, Some(seeds), result);
            let csv = flat_csv(&report);
            Ok(RunResult { passed: holds, report, csv })
        }
        "failure" => {
            let m = p.usize_or("m", 4)?;
            let prob = p.f64_or("p", 0.1)?;
            p.finish()?;
            let trials = cfg.trials.unwrap_or(100_000);
            let rep = failure_probe(m, prob, trials, cfg.seed).map_err(usage)?;
            let passed = rep.holds;
            let result = serde_json::to_value(&rep).expect("serializable");
            let report = envelope(cfg, Some(trials), result);
            let csv = flat_csv(&report);
            Ok(RunResult { passed, report, csv })
        }
        other => Err(CliError::Usage(format!("mode={other:?} is not one of rip, failure"))),
    }
}

fn cmd_binom(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let m = p.usize_or("m", 50)? as u64;
    let prob = p.f64_or("p", 0.1)?;
    let k = p.f64_or("k", 10.0)?;
    p.finish()?;
    let bound = binom_tail_lower(m, prob, k).map_err(usage)?;
    let exact = binom_tail_exact(m, prob, (k - 1.0).ceil() as u64);
    let holds = exact >= bound;
    let result = json!({
        "m": m,
        "p": prob,
        "k": k,
        "kl": kl_bernoulli(k / m as f64, prob),
        "bound": bound,
        "exact_tail": exact,
        "holds": holds,
    });
    let report = envelope(cfg, None, result);
    let csv = flat_csv(&report);
    Ok(RunResult { passed: holds, report, csv })
}

fn cmd_appendixc(cfg: &RunConfig, p: &mut Params) -> Result<RunResult, CliError> {
    let grid = p.usize_or("grid", 100_000)?;
    p.finish()?;
    if grid < 1000 {
        return Err(CliError::Usage("grid must be at least 1000".into()));
    }
    let rep = scalar_inequality_check(grid);
    let passed = rep.holds;
    let mut csv = String::from("name,max_slack,argmax\n");
    for (name, slack, arg) in &rep.checks {
        csv.push_str(&format!("{name},{slack},{arg}\n"));
    }
    let result = serde_json::to_value(&rep).expect("serializable");
    let report = envelope(cfg, None, result);
    Ok(RunResult { passed, report, csv })
}
