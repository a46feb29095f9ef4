//! Null-space-property certification of 0-1 Bernoulli measurement matrices,
//! and the sparse-regime failure probe.
//!
//! Run: `cargo run --release --example nullspace_certificate`

use subgauss::bounds::nsp_dimension;
use subgauss::constants::Constants;
use subgauss::ensembles::{sample_matrix_with_rng, EnsembleSpec};
use subgauss::nullspace::{failure_probe, projected_rip, rnsp_certificate};
use subgauss::rng::trial_rng;

fn main() {
    let constants = Constants::frozen();
    let (n, s, rho) = (12usize, 2usize, 0.5f64);
    let u = 30.0f64.ln().sqrt();

    for p in [0.3, 0.5] {
        let m = nsp_dimension(rho, p, s, n, u, constants.nsp_c.value);
        let spec = EnsembleSpec::bernoulli01(m, n, p).unwrap();
        let seeds = 50;
        let mut ok = 0;
        let mut worst: f64 = 0.0;
        let mut last = None;
        for sd in 0..seeds {
            let mut rng = trial_rng(3, sd);
            let a = sample_matrix_with_rng(&spec, &mut rng);
            let rep = projected_rip(&a, p, s).unwrap();
            worst = worst.max(rep.delta_achieved);
            if rep.delta_achieved <= rho / 2.0 {
                ok += 1;
            }
            last = Some(rep);
        }
        let rep = last.unwrap();
        println!(
            "p = {p}: m = {m} rows for order-{s} certification over {} supports of size {}",
            rep.supports_enumerated, rep.order
        );
        println!(
            "  delta <= rho/2 = {} in {ok}/{seeds} draws (worst delta {worst:.4})",
            rho / 2.0
        );
        let cert = rnsp_certificate(&rep, rho).unwrap();
        println!(
            "  last draw: delta {:.4} -> rho' = {:.4} (< {rho}), tau' = {:.4} (< 2), tau = {:.4} -> holds = {}",
            rep.delta_achieved, cert.rho, cert.tau_prime, cert.tau, cert.holds
        );
    }

    // too few rows: with mp < 1/2 two all-zero columns appear with
    // probability > 1/4 and the property fails outright
    let rep = failure_probe(4, 0.1, 200_000, 8).unwrap();
    println!(
        "\nfailure probe m = 4, p = 0.1: frequency {:.4} vs exact (1-p)^(2m) = {:.5} (>= 1/4: {})",
        rep.frequency,
        rep.exact_probability,
        rep.frequency >= 0.25
    );
}
