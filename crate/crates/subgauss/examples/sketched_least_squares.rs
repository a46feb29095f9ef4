//! Sketch-and-solve least squares with optimality certificates.
//!
//! Solves min ||Bx - y||^2 for a 400x10 Gaussian design through an m x 400
//! Gaussian sketch, evaluates the achieved sub-optimality on the original
//! objective, and checks the deterministic certificate
//! f(x_hat) <= (1 + 2 Z2/Z1)^2 f(x*).
//!
//! Run: `cargo run --release --example sketched_least_squares`

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use subgauss::bounds::sketch_dimension;
use subgauss::constants::Constants;
use subgauss::geometry::chi_mean;
use subgauss::orlicz::DistributionSpec;
use subgauss::rng::trial_rng;
use subgauss::sketch::{solve_original, solve_sketched, Constraint, SketchProblem};

fn main() {
    let constants = Constants::frozen();
    let (n, d, delta) = (400usize, 10usize, 0.1f64);
    let k = (8.0f64 / 3.0).sqrt();
    let width_sq = chi_mean(d) * chi_mean(d);
    let m = sketch_dimension(k, width_sq, delta, constants.sketch_c0.value);

    let mut rng = trial_rng(51, 0);
    let b = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let x0 = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let e = DVector::from_fn(n, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        0.5 * g
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
    let f_star = solve_original(&problem, 1e-10).unwrap().objective;
    println!("instance: n = {n}, d = {d}; sketch size m = {m}; f* = {f_star:.4}\n");
    println!(
        "{:>5} {:>12} {:>10} {:>10} {:>14} {:>8}",
        "seed", "delta_hat", "Z1", "Z2", "cert bound ok", "<= 0.1"
    );
    let mut ok = 0;
    let seeds = 40;
    for s in 0..seeds {
        let solve = solve_sketched(&problem, 1000 + s, 1e-10).unwrap();
        let c = &solve.certificate;
        let bound_ok = c.f_hat <= c.ratio_bound.unwrap() * (1.0 + 1e-9);
        if c.delta_achieved <= delta {
            ok += 1;
        }
        if s < 8 {
            println!(
                "{:>5} {:>12.5} {:>10.4} {:>10.4} {:>14} {:>8}",
                s,
                c.delta_achieved,
                c.z1.unwrap(),
                c.z2.unwrap(),
                bound_ok,
                c.delta_achieved <= delta
            );
        }
    }
    println!("...\ndelta-optimal in {ok}/{seeds} sketches at the fitted sketch size");

    // constrained variant: nonnegative least squares via projected gradient
    let mut rng = trial_rng(52, 0);
    let b = DMatrix::from_fn(120, 6, |_, _| StandardNormal.sample(&mut rng));
    let x0 = DVector::from_fn(6, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let y = &b * &x0 + DVector::from_fn(120, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        0.2 * g
    });
    let problem = SketchProblem {
        b,
        y,
        constraint: Constraint::NonnegativeOrthant,
        sketch_law: DistributionSpec::Gaussian { sigma: 1.0 },
        sketch_k: k,
        m: 60,
    };
    let solve = solve_sketched(&problem, 9, 1e-10).unwrap();
    println!(
        "\nnonnegative instance: delta_hat = {:.4} (Z estimates sampled, certified = {})",
        solve.certificate.delta_achieved, solve.certificate.certified
    );
}
