//! Uniform deviation of ||BAx||_2 over a set: exact per-trial suprema
//! against the K sqrt(log K) ||B|| (w(T) + rad(T)) rate.
//!
//! Run: `cargo run --release --example set_concentration`

use subgauss::constants::Constants;
use subgauss::ensembles::{EnsembleSpec, MultiplierSpec};
use subgauss::geometry::{gaussian_width, radius, SetSpec};
use subgauss::mc::deviation_batch;

fn main() {
    let constants = Constants::frozen();
    let trials = 4000;
    let (m, n, s) = (64usize, 8usize, 2usize);
    let t = SetSpec::SparseSphere { n, s };
    let w = gaussian_width(&t, 100_000, 99).unwrap();
    println!(
        "T = 2-sparse unit sphere in R^{n}: width {:.4}, radius {}",
        w.estimate,
        radius(&t)
    );

    for (ens, b) in [
        (EnsembleSpec::gaussian(m, n), MultiplierSpec::identity(m)),
        (EnsembleSpec::scaled_bernoulli(m, n, 4.0).unwrap(), MultiplierSpec::identity(m)),
        (
            EnsembleSpec::rademacher(m, n),
            MultiplierSpec::diagonal((0..m).map(|i| 1.0 / (1.0 + i as f64).sqrt()).collect())
                .unwrap(),
        ),
    ] {
        let batch = deviation_batch(&ens, &b, &t, trials, 5).unwrap();
        let mean: f64 = batch.values.iter().sum::<f64>() / trials as f64;
        let rate = ens.k * ens.k.ln().sqrt() * b.operator_norm() * (w.estimate + radius(&t));
        println!(
            "{:<28} ||B|| = {:.3} sr(B) = {:>5.2}  mean sup-dev {:>7.4}  C*rate {:>7.4}  ratio {:.3}",
            ens.label,
            b.operator_norm(),
            b.stable_rank(),
            mean,
            constants.main_c.value * rate,
            mean / rate
        );
    }

    // the near-isometry view: sup | ||BAx|| / ||B||_F - ||x|| | shrinks as
    // the stable rank grows
    println!("\nnear-isometry error of (1/||B||_F) B A as rows grow:");
    for m in [16usize, 64, 256] {
        let ens = EnsembleSpec::gaussian(m, n);
        let b = MultiplierSpec::identity(m);
        let batch = deviation_batch(&ens, &b, &t, 1000, 6).unwrap();
        let mean: f64 = batch.values.iter().sum::<f64>() / 1000.0;
        println!(
            "  m = {m:>4}: mean sup-dev / ||B||_F = {:.4}",
            mean / b.frobenius_norm()
        );
    }
}
