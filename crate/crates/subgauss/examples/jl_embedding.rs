//! Distance-preserving random embeddings: the all-pairs distortion probe at
//! the fitted embedding dimension, and the sparse-regime impossibility
//! probe.
//!
//! Run: `cargo run --release --example jl_embedding`

use rand_distr::{Distribution, StandardNormal};
use subgauss::constants::Constants;
use subgauss::ensembles::EnsembleSpec;
use subgauss::mc::{jl_optimality_probe, jl_probe};
use subgauss::orlicz::DistributionSpec;
use subgauss::rng::trial_rng;

fn main() {
    let constants = Constants::frozen();
    let mut rng = trial_rng(31, 0);
    let points: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..256).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();

    for law in [DistributionSpec::Rademacher, DistributionSpec::SparseTernary { q: 0.25 }] {
        let k = match law {
            DistributionSpec::Rademacher => EnsembleSpec::rademacher(1, 1).k,
            DistributionSpec::SparseTernary { q } => EnsembleSpec::sparse_ternary(1, 1, q).unwrap().k,
            _ => unreachable!(),
        };
        let rep = jl_probe(&points, &law, k, 0.2, 0.05, constants.jl_c.value, 100, 5);
        println!(
            "{:<24} K = {k:.3}: m = {:>4} for 100 points in R^256 at eps = 0.2, delta = 0.05",
            law.label(),
            rep.m
        );
        println!(
            "  all-pairs bracket held in {:.1}% of embeddings (pair failure rate {:.2e}) -> {}",
            100.0 * rep.all_pairs_fraction,
            rep.pair_failure_rate,
            if rep.holds { "ok" } else { "FAILED" }
        );
    }

    // impossibility: with mp <= 1/2 the first basis vector cannot embed
    let rep = jl_optimality_probe(0.1, 4, 0.2, 200_000, 6).unwrap();
    println!(
        "\nsparse regime m = {}, p = {}: P(first column all zero) = {:.4}, \
         empirical embedding-failure rate {:.4} >= floor {:.4}",
        rep.m, rep.p, rep.zero_column_probability, rep.empirical_failure, rep.proof_floor
    );
}
