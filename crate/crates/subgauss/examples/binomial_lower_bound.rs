//! Lower bound on binomial upper tails through the Bernoulli
//! Kullback-Leibler divergence, against exact log-space summation.
//!
//! P(Bin(m, p) >= k - 1) >= (8 k (1 - k/m))^{-1/2} exp(-m D(k/m || p))
//! for real k in (mp + 1, m/2), p < 1/4, mp >= 1.
//!
//! Run: `cargo run --release --example binomial_lower_bound`

use subgauss::bounds::{binom_tail_exact, binom_tail_lower, kl_bernoulli};

fn main() {
    for (m, p) in [(50u64, 0.1f64), (200, 0.05)] {
        println!("m = {m}, p = {p}:");
        println!(
            "{:>8} {:>14} {:>14} {:>14} {:>8}",
            "k", "D(k/m||p)", "lower bound", "exact tail", "ok"
        );
        let lo = m as f64 * p + 1.0;
        let hi = m as f64 / 2.0;
        for i in 0..8 {
            let k = lo + (hi - lo) * (i as f64 + 0.5) / 8.0;
            let bound = binom_tail_lower(m, p, k).unwrap();
            let exact = binom_tail_exact(m, p, (k - 1.0).ceil() as u64);
            println!(
                "{:>8.3} {:>14.6} {:>14.6e} {:>14.6e} {:>8}",
                k,
                kl_bernoulli(k / m as f64, p),
                bound,
                exact,
                exact >= bound
            );
        }
        println!();
    }
}
