//! Gaussian widths of the supported set families, checked against closed
//! forms where they exist.
//!
//! Run: `cargo run --release --example gaussian_width`

use subgauss::geometry::{chi_mean, gaussian_width, radius, SetSpec};

fn main() {
    let trials = 200_000;

    // full sphere: w = E ||g||_2, the chi mean
    for n in [4usize, 16, 64] {
        let t = SetSpec::SparseSphere { n, s: n };
        let w = gaussian_width(&t, trials, 1).unwrap();
        println!(
            "sphere S^{:<3} width {:>8.4} +- {:.4}   exact chi mean {:>8.4}",
            n - 1,
            w.estimate,
            2.0 * w.std_error,
            chi_mean(n)
        );
    }

    // sparse spheres: w^2 <= 4 s log(en/s)
    for (n, s) in [(100usize, 5usize), (256, 8), (64, 2)] {
        let t = SetSpec::SparseSphere { n, s };
        let w = gaussian_width(&t, trials, 2).unwrap();
        let cap = 4.0 * s as f64 * (std::f64::consts::E * n as f64 / s as f64).ln();
        println!(
            "sparse sphere (n={n:>3}, s={s}) width^2 {:>8.3} <= 4 s log(en/s) = {cap:>8.3}, rad {}",
            w.estimate * w.estimate,
            radius(&t)
        );
    }

    // finite point clouds: singleton width is 0, scaling is exact per draw
    let single = SetSpec::singleton(vec![3.0, 4.0]);
    let w = gaussian_width(&single, trials, 3).unwrap();
    println!(
        "singleton width {:>8.4} (CI {:.4} .. {:.4}), rad {}",
        w.estimate, w.ci.0, w.ci.1, radius(&single)
    );
}
