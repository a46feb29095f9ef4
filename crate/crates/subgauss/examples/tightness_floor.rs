//! The scaled-Bernoulli lower bound: psi_2( ||X||_2 - sqrt(m) ) stays above
//! 0.2 K sqrt(log K) whenever m >= K^2 log K, so the K sqrt(log K) rate in
//! the concentration bound cannot be improved.
//!
//! Run: `cargo run --release --example tightness_floor`

use subgauss::mc::tightness_check;

fn main() {
    let trials = 300_000;
    println!(
        "{:>5} {:>6} {:>12} {:>24} {:>12} {:>6}",
        "K", "m", "psi2", "90% CI", "0.2K<sqrt>logK", "pass"
    );
    for k in [4.0f64, 8.0, 12.0] {
        let m = (k * k * k.ln()).ceil() as usize;
        let rep = tightness_check(k, m, trials, 77).unwrap();
        let (lo, hi) = rep.psi2.ci.unwrap();
        println!(
            "{:>5} {:>6} {:>12.4} {:>11.4} .. {:<10.4} {:>12.4} {:>6}",
            k, m, rep.psi2.value, lo, hi, rep.threshold, rep.passes
        );
    }

    // oversampling keeps the hypothesis one-sided: m >> K^2 log K still passes
    let k = 4.0f64;
    let m = 10 * (k * k * k.ln()).ceil() as usize;
    let rep = tightness_check(k, m, trials, 78).unwrap();
    println!(
        "\noversampled m = {m}: psi2 {:.4} vs floor {:.4} -> pass = {}",
        rep.psi2.value, rep.threshold, rep.passes
    );
}
