//! Which rate explains the deviation psi_2 as the sub-Gaussian parameter
//! grows: K sqrt(log K) or K^2? Regress against both and compare residuals.
//!
//! Run: `cargo run --release --example scaling_law`

use subgauss::ensembles::MultiplierSpec;
use subgauss::geometry::SetSpec;
use subgauss::mc::scaling_fit;

fn main() {
    let ks = [4.0, 6.0, 8.0, 12.0];
    let trials = 200_000;
    let t = SetSpec::singleton(vec![1.0]);
    let fit = scaling_fit(
        &ks,
        &|k: f64| (k * k * k.ln()).ceil() as usize,
        &MultiplierSpec::identity,
        &t,
        trials,
        42,
    )
    .unwrap();

    println!("scaled-Bernoulli ensembles, T = {{e_1}}, B = I_m, m = ceil(K^2 log K)\n");
    println!(
        "{:>5} {:>6} {:>10} {:>14} {:>10}",
        "K", "m", "psi2", "K sqrt(logK)", "K^2"
    );
    for i in 0..fit.ks.len() {
        let k = fit.ks[i];
        println!(
            "{:>5} {:>6} {:>10.4} {:>14.4} {:>10.1}",
            k,
            fit.ms[i],
            fit.psi2[i],
            k * k.ln().sqrt(),
            k * k
        );
    }
    println!(
        "\nfit vs K sqrt(log K): slope {:.4}, intercept {:+.4}, residual sum {:.5}",
        fit.slope, fit.intercept, fit.residual_sum
    );
    println!(
        "fit vs K^2:           slope {:.4}, intercept {:+.4}, residual sum {:.5}",
        fit.alt_slope, fit.alt_intercept, fit.alt_residual_sum
    );
    println!(
        "\nthe K sqrt(log K) regressor {} (residual ratio {:.1}x)",
        if fit.residual_sum < fit.alt_residual_sum { "wins" } else { "loses" },
        fit.alt_residual_sum / fit.residual_sum
    );
}
