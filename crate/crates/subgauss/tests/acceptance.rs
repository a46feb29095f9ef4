//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`).
//!
//! Every tolerance is pinned here; the fitted constants come frozen from
//! `subgauss::constants` and are never refit during these runs.

use nalgebra::DMatrix;

use subgauss::bounds::{
    binom_tail_exact, binom_tail_lower, new_bernstein_bound, new_hanson_wright_bound,
    nsp_dimension, rip_to_rnsp, scalar_inequality_check,
};
use subgauss::constants::Constants;
use subgauss::ensembles::{sample_matrix_with_rng, EnsembleSpec, MultiplierSpec};
use subgauss::geometry::{chi_mean, SetSpec};
use subgauss::mc::{
    domination_check, empirical_hw_values, empirical_tail_values, jl_optimality_probe, jl_probe,
    median_abs, scaling_fit, survival_grid, tightness_check, SumSpec, TrialBatch,
};
use subgauss::nullspace::{failure_probe, projected_rip};
use subgauss::orlicz::{
    psi_norm_analytic, psi_norm_from_mgf, psi_norm_from_samples, psi_norm_exact, properties,
    DistributionSpec,
};
use subgauss::rng::trial_rng;
use subgauss::sketch::{solve_sketched, Constraint, SketchProblem};

const SEED: u64 = 20240640;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:>2} {}: {name} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn draws(law: &DistributionSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, 0);
    (0..n).map(|_| law.sample(&mut rng)).collect()
}

#[test]
fn criterion_01_psi_norm_golden_values() {
    let cases = [
        (DistributionSpec::Gaussian { sigma: 1.0 }, 2.0, (8.0f64 / 3.0).sqrt()),
        (DistributionSpec::Rademacher, 2.0, 1.0 / std::f64::consts::LN_2.sqrt()),
        (DistributionSpec::Exponential { lambda: 2.0 }, 1.0, 1.0),
        (DistributionSpec::Exponential { lambda: 0.5 }, 1.0, 4.0),
    ];
    let mut worst = 0.0f64;
    for (law, alpha, expect) in &cases {
        let analytic = psi_norm_analytic(law, *alpha).unwrap().value;
        let mgf = law.mgf_of_power(*alpha).unwrap();
        let root = psi_norm_from_mgf(&*mgf, *alpha, 1e-9).unwrap().value;
        worst = worst
            .max((analytic - expect).abs() / expect)
            .max((root - expect).abs() / expect);
    }
    report(
        1,
        "psi-norm golden values via analytic and mgf-root paths",
        worst <= 1e-6,
        &format!("worst relative error {worst:.2e} (tolerance 1e-6)"),
    );
}

#[test]
fn criterion_02_unit_variance_floor() {
    let laws = [
        DistributionSpec::Gaussian { sigma: 1.0 },
        DistributionSpec::Rademacher,
        DistributionSpec::StandardizedBernoulli { p: 0.3 },
        DistributionSpec::ScaledBernoulli { k: 4.0 },
        DistributionSpec::SparseTernary { q: 0.5 },
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (i, law) in laws.iter().enumerate() {
        let xs = draws(law, 1_000_000, SEED + i as u64);
        let est = psi_norm_from_samples(&xs, 2.0, 1e-7, SEED + i as u64).unwrap();
        let ok = est.value >= 1.201 - est.ci_half_width();
        pass &= ok;
        details.push(format!("{} {:.4}", law.label(), est.value));
    }
    report(
        2,
        "estimated psi_2 >= 1.201 - CI half-width for 5 unit-variance laws at 1e6 samples",
        pass,
        &details.join(", "),
    );
}

#[test]
fn criterion_03_tightness_floor() {
    let mut pass = true;
    let mut details = Vec::new();
    for k in [4.0f64, 8.0, 12.0] {
        let m = (k * k * k.ln()).ceil() as usize;
        let rep = tightness_check(k, m, 1_000_000, SEED + k as u64).unwrap();
        pass &= rep.passes;
        details.push(format!(
            "K={k}: psi2 {:.3} (ci lower {:.3}) vs floor {:.3}",
            rep.psi2.value,
            rep.psi2.ci_lower(),
            rep.threshold
        ));
    }
    report(
        3,
        "psi_2(||X||_2 - sqrt(m)) >= 0.2 K sqrt(log K) at m = ceil(K^2 log K), 1e6 trials",
        pass,
        &details.join("; "),
    );
}

#[test]
fn criterion_04_scaling_law_model_comparison() {
    let ks = [4.0, 6.0, 8.0, 12.0];
    let t = SetSpec::singleton(vec![1.0]);
    let fit = scaling_fit(
        &ks,
        &|k: f64| (k * k * k.ln()).ceil() as usize,
        &MultiplierSpec::identity,
        &t,
        300_000,
        SEED,
    )
    .unwrap();
    let pass = fit.residual_sum < fit.alt_residual_sum && fit.slope >= 0.2 && fit.slope <= 3.0;
    report(
        4,
        "K sqrt(log K) regression beats K^2 on deviation psi_2 across K in {4,6,8,12}",
        pass,
        &format!(
            "residual {:.4} vs {:.4} (K^2), slope {:.3} in [0.2, 3.0]",
            fit.residual_sum, fit.alt_residual_sum, fit.slope
        ),
    );
}

#[test]
fn criterion_05_bound_domination() {
    let constants = Constants::frozen();
    let laws = [
        DistributionSpec::Gaussian { sigma: 1.0 },
        DistributionSpec::ScaledBernoulli { k: 4.0 },
        DistributionSpec::StandardizedBernoulli { p: 0.3 },
    ];
    let trials = 1_000_000usize;
    let min_bound = 10.0 / trials as f64;
    let mut pass = true;
    let mut details = Vec::new();

    for (i, law) in laws.iter().enumerate() {
        let k = psi_norm_exact(law, 2.0).unwrap().value;

        // statistic 1: weighted centered-square sum vs the sharpened
        // Bernstein bound with the proof-traced constant
        let m = 50;
        let spec = SumSpec::uniform(law.clone(), m);
        let bound = new_bernstein_bound(&spec.a, &vec![k; m], None).unwrap();
        let values = empirical_tail_values(&spec, trials, SEED + 10 + i as u64);
        if values.iter().any(|&v| v > 0.0) {
            let grid = survival_grid(median_abs(&values), bound.switch_point());
            let batch = TrialBatch::assemble("sum", SEED, values, &grid, false, serde_json::Value::Null)
                .unwrap();
            let dom = domination_check(&batch, &bound, min_bound);
            pass &= dom.holds;
            details.push(format!(
                "{} sum: {} pts {}",
                law.label(),
                dom.checked_points,
                if dom.holds { "ok" } else { "VIOLATED" }
            ));
        }

        // statistic 2: quadratic form vs the sharpened Hanson-Wright bound
        // with the frozen fitted constant
        let n = 16;
        let a = DMatrix::<f64>::identity(n, n);
        let bound = new_hanson_wright_bound(&a, k, Some(constants.hw_c.value)).unwrap();
        let values = empirical_hw_values(&a, law, trials, SEED + 20 + i as u64);
        let grid = survival_grid(median_abs(&values), bound.switch_point());
        let batch =
            TrialBatch::assemble("hw", SEED, values, &grid, false, serde_json::Value::Null).unwrap();
        let dom = domination_check(&batch, &bound, min_bound);
        pass &= dom.holds;
        details.push(format!(
            "{} quad: {} pts {}",
            law.label(),
            dom.checked_points,
            if dom.holds { "ok" } else { "VIOLATED" }
        ));
    }
    report(
        5,
        "Wilson-upper survival below analytic bounds (3 ensembles x 2 statistics, 1e6 trials)",
        pass,
        &details.join("; "),
    );
}

#[test]
fn criterion_06_diagonal_consistency() {
    let a = [0.7, -2.3, 0.001, 5.5, -0.4];
    let k = 2.9;
    let bern = new_bernstein_bound(&a, &[k; 5], None).unwrap();
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&a));
    let hw = new_hanson_wright_bound(&diag, k, None).unwrap();
    let pass = bern.variance_proxy.to_bits() == hw.variance_proxy.to_bits()
        && bern.linear_scale.to_bits() == hw.linear_scale.to_bits();
    report(
        6,
        "diagonal Hanson-Wright reproduces Bernstein (V, S) bitwise",
        pass,
        &format!("V = {:.6e}, S = {:.6e}", hw.variance_proxy, hw.linear_scale),
    );
}

#[test]
fn criterion_07_binomial_lower_bound() {
    let mut pass = true;
    let mut checked = 0;
    for (m, p) in [(50u64, 0.1f64), (200, 0.05)] {
        let lo = m as f64 * p + 1.0;
        let hi = m as f64 / 2.0;
        for i in 0..50 {
            let k = lo + (hi - lo) * (i as f64 + 0.5) / 50.0;
            let bound = binom_tail_lower(m, p, k).unwrap();
            let exact = binom_tail_exact(m, p, (k - 1.0).ceil() as u64);
            pass &= exact >= bound;
            checked += 1;
        }
    }
    report(
        7,
        "exact log-space binomial tail dominates the KL lower bound",
        pass,
        &format!("{checked} (m, p, k) triples checked"),
    );
}

#[test]
fn criterion_08_scalar_inequality_grids() {
    let rep = scalar_inequality_check(100_000);
    let worst = rep
        .checks
        .iter()
        .map(|&(_, slack, _)| slack)
        .fold(f64::NEG_INFINITY, f64::max);
    report(
        8,
        "four scalar inequalities hold on 1e5-point grids",
        rep.holds,
        &format!("worst slack {worst:.2e} (must be <= 1e-12)"),
    );
}

#[test]
fn criterion_09_psi_property_suite() {
    let outcomes = properties::run_suite(50_000, SEED).unwrap();
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.holds)
        .map(|o| format!("{}: {}", o.name, o.detail))
        .collect();
    report(
        9,
        "psi-norm calculus property suite (tail, sqrt(3), square, product, moments, centering, alpha)",
        failed.is_empty(),
        &format!("{} checks, failures: {:?}", outcomes.len(), failed),
    );
}

#[test]
fn criterion_10_jl_probe_and_optimality() {
    let constants = Constants::frozen();
    let mut rng = trial_rng(SEED + 40, 0);
    let points: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            (0..256)
                .map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng))
                .collect()
        })
        .collect();
    let k = EnsembleSpec::rademacher(1, 1).k;
    let probe = jl_probe(
        &points,
        &DistributionSpec::Rademacher,
        k,
        0.2,
        0.05,
        constants.jl_c.value,
        200,
        SEED + 41,
    );
    let probe_ok = probe.all_pairs_fraction >= 0.95;

    let opt = jl_optimality_probe(0.1, 4, 0.2, 100_000, SEED + 42).unwrap();
    let floor = 1.0 - (-0.25f64).exp();
    let opt_ok = opt.empirical_failure >= 0.2 && opt.empirical_failure >= floor;
    report(
        10,
        "all-pairs distortion at fitted dimension; sparse-regime failure floor",
        probe_ok && opt_ok,
        &format!(
            "bracket held in {:.1}% of 200 seeds at m = {}; failure rate {:.3} >= {:.3}",
            100.0 * probe.all_pairs_fraction,
            probe.m,
            opt.empirical_failure,
            floor
        ),
    );
}

#[test]
fn criterion_11_sketch_certificates() {
    let constants = Constants::frozen();
    let (n, d, delta) = (400usize, 10usize, 0.1f64);
    let k = (8.0f64 / 3.0).sqrt();
    let m = subgauss::bounds::sketch_dimension(
        k,
        chi_mean(d) * chi_mean(d),
        delta,
        constants.sketch_c0.value,
    );
    let mut rng = trial_rng(SEED + 50, 0);
    let b = DMatrix::from_fn(n, d, |_, _| {
        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
    });
    let x0 = nalgebra::DVector::from_fn(d, |_, _| {
        rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
    });
    let e = nalgebra::DVector::from_fn(n, |_, _| {
        let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
        g
    });
    let y = &b * &x0 + e;
    let problem = SketchProblem {
        b,
        y,
        constraint: Constraint::Unconstrained,
        sketch_law: DistributionSpec::Gaussian { sigma: 1.0 },
        sketch_k: k,
        m,
    };
    let seeds = 200;
    let mut lemma_ok = true;
    let mut delta_ok = 0usize;
    for s in 0..seeds {
        let solve = solve_sketched(&problem, SEED + 60 + s as u64, 1e-10).unwrap();
        let cert = solve.certificate;
        assert!(cert.certified, "unconstrained path must certify exactly");
        // solver tolerance 1e-8 as the certificate soundness slack
        if cert.f_hat > cert.ratio_bound.unwrap() + 1e-8 * cert.f_star.max(1.0) {
            lemma_ok = false;
        }
        if cert.delta_achieved <= delta {
            delta_ok += 1;
        }
    }
    let frac = delta_ok as f64 / seeds as f64;
    report(
        11,
        "ratio certificate on every sketch; delta-optimal in >= 90% of 200 seeds",
        lemma_ok && frac >= 0.9,
        &format!("m = {m}, certificate ok = {lemma_ok}, delta <= 0.1 fraction = {frac:.3}"),
    );
}

#[test]
fn criterion_12_nsp_certification() {
    let constants = Constants::frozen();
    let (n, s, rho) = (12usize, 2usize, 0.5f64);
    let u = 30.0f64.ln().sqrt();
    let mut pass = true;
    let mut details = Vec::new();
    for p in [0.3, 0.5] {
        let m = nsp_dimension(rho, p, s, n, u, constants.nsp_c.value);
        let spec = EnsembleSpec::bernoulli01(m, n, p).unwrap();
        let seeds = 100;
        let ok = (0..seeds)
            .filter(|&sd| {
                let mut rng = trial_rng(SEED + 70 + (p * 10.0) as u64, sd as u64);
                let a = sample_matrix_with_rng(&spec, &mut rng);
                projected_rip(&a, p, s).unwrap().delta_achieved <= rho / 2.0
            })
            .count();
        let frac = ok as f64 / seeds as f64;
        pass &= frac >= 0.9;
        details.push(format!("p={p}: m={m}, delta<=rho/2 in {frac:.2}"));
    }

    // parameter transfer over a delta grid
    let mut transfer_ok = true;
    for i in 1..100 {
        let delta = 0.5 * i as f64 / 100.0;
        let (rp, tp) = rip_to_rnsp(delta).unwrap();
        transfer_ok &= rp < 2.0 * delta && tp < 2.0;
    }
    pass &= transfer_ok;
    details.push(format!("transfer grid ok = {transfer_ok}"));

    // failure probe at m = 4, p = 0.1: frequency matches (0.9)^8 within 3 sigma
    let probe = failure_probe(4, 0.1, 100_000, SEED + 80).unwrap();
    let expected = 0.43046721;
    let within = (probe.frequency - expected).abs() <= 3.0 * probe.sigma;
    pass &= within && probe.holds;
    details.push(format!(
        "failure probe {:.4} vs {expected} (3sigma {:.4})",
        probe.frequency,
        3.0 * probe.sigma
    ));
    report(12, "projected isometry, parameter transfer, and failure probe", pass, &details.join("; "));
}

#[test]
fn criterion_13_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_subgauss");
    let runs: Vec<Vec<&str>> = vec![
        vec!["psi", "dist=rademacher", "alpha=2"],
        vec!["width", "set=sparse", "n=32", "s=4", "--trials", "2000"],
        vec!["tail", "dist=scaled_bernoulli", "k=4", "m=20", "--trials", "2000"],
        vec!["hw", "dist=gaussian", "n=8", "--trials", "2000"],
        vec!["concentrate", "ensemble=gaussian", "m=24", "n=6", "s=2", "--trials", "300"],
        vec!["scaling", "ks=4,6", "--trials", "10000"],
        vec!["tightness", "k=4", "--trials", "10000"],
        vec!["jl", "mode=optimality", "p=0.1", "m=4", "--trials", "5000"],
        vec!["sketch", "n=60", "d=4", "m=40", "noise=0.5", "--trials", "20"],
        vec!["nsp", "mode=failure", "m=4", "p=0.1", "--trials", "5000"],
        vec!["binom", "m=50", "p=0.1", "k=10"],
        vec!["appendixc", "grid=5000"],
    ];
    let mut pass = true;
    let mut bad = Vec::new();
    for args in &runs {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            for _rep in 0..2 {
                let out = std::process::Command::new(bin)
                    .args(args.iter())
                    .args(["--seed", "7", "--no-timestamp", "--threads", threads])
                    .output()
                    .expect("spawn subgauss");
                assert!(
                    out.status.code() == Some(0) || out.status.code() == Some(2),
                    "{args:?} exited with {:?}: {}",
                    out.status.code(),
                    String::from_utf8_lossy(&out.stderr)
                );
                outputs.push(out.stdout);
            }
        }
        if !outputs.windows(2).all(|w| w[0] == w[1]) {
            pass = false;
            bad.push(args[0]);
        }
    }
    report(
        13,
        "every subcommand is byte-identical across reruns and thread counts",
        pass,
        &format!("{} commands checked{}", runs.len(), if bad.is_empty() { String::new() } else { format!(", nondeterministic: {bad:?}") }),
    );
}
