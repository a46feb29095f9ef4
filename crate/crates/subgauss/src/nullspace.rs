//! Null-space-property certification for 0-1 Bernoulli matrices.
//!
//! Pipeline: standardize the 0-1 matrix to mean zero and unit variance,
//! project out the all-ones direction, scale by 1/sqrt(m-1), certify a
//! restricted isometry constant by exhaustive support enumeration, and map
//! it to robust null-space-property parameters. A probe for the sparse
//! failure regime (mp < 1/2) checks the matching impossibility result.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::rip_to_rnsp;
use crate::geometry::{binomial, support_singular_range, SUPPORT_CAP};
use crate::rng::trial_rng;

#[derive(Debug, Error)]
pub enum NullspaceError {
    #[error("p = {0} outside (0, 1)")]
    BadP(f64),
    #[error("{supports} supports of size {order} exceed the enumeration cap {cap}")]
    EnumerationTooLarge { supports: u128, order: usize, cap: u128 },
    #[error("restricted isometry constant {0:.4} is not below 1/2")]
    DeltaTooLarge(f64),
    #[error("probe needs mp < 1/2 or m(1-p) < 1/2, got m = {m}, p = {p}")]
    HypothesisUnmet { m: usize, p: f64 },
    #[error("matrix entries must be 0 or 1")]
    NotZeroOne,
}

/// Entrywise (A_ij - p) / sqrt(p (1-p)).
pub fn standardize(a01: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>, NullspaceError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(NullspaceError::BadP(p));
    }
    if a01.iter().any(|&x| x != 0.0 && x != 1.0) {
        return Err(NullspaceError::NotZeroOne);
    }
    let scale = 1.0 / (p * (1.0 - p)).sqrt();
    Ok(a01.map(|x| (x - p) * scale))
}

/// Restricted isometry certificate from exhaustive enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct RipReport {
    /// Enumerated sparsity order (2s for the order-s property).
    pub order: usize,
    /// max over supports of max(sigma_max - 1, 1 - sigma_min).
    pub delta_achieved: f64,
    /// Extreme singular values across all supports.
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub supports_enumerated: u128,
    pub m: usize,
    pub n: usize,
    pub p: f64,
}

/// Build M = (1/sqrt(m-1)) P Atilde with P the projector onto the
/// complement of the all-ones direction, and enumerate every support of
/// size 2s to certify a restricted isometry constant at order 2s.
pub fn projected_rip(a01: &DMatrix<f64>, p: f64, s: usize) -> Result<RipReport, NullspaceError> {
    let (m, n) = a01.shape();
    let order = 2 * s;
    let supports = binomial(n, order);
    if supports > SUPPORT_CAP {
        return Err(NullspaceError::EnumerationTooLarge { supports, order, cap: SUPPORT_CAP });
    }
    let tilde = standardize(a01, p)?;
    // P Atilde subtracts column means; divide by sqrt(m-1)
    let mut mat = tilde;
    let scale = 1.0 / ((m - 1) as f64).sqrt();
    for j in 0..n {
        let mean = mat.column(j).sum() / m as f64;
        for i in 0..m {
            mat[(i, j)] = (mat[(i, j)] - mean) * scale;
        }
    }
    let (sig_lo, sig_hi) = support_singular_range(&mat, n, order);
    let delta = (sig_hi - 1.0).max(1.0 - sig_lo).max(0.0);
    Ok(RipReport {
        order,
        delta_achieved: delta,
        sigma_min: sig_lo,
        sigma_max: sig_hi,
        supports_enumerated: supports,
        m,
        n,
        p,
    })
}

/// Robust null-space-property parameters derived from a restricted
/// isometry certificate.
#[derive(Debug, Clone, Serialize)]
pub struct RnspCertificate {
    /// rho' mapped from the isometry constant; < 2 delta.
    pub rho: f64,
    /// The projected matrix's own tau' < 2.
    pub tau_prime: f64,
    /// tau for the original 0-1 matrix: 2 / (sqrt(m-1) sqrt(p(1-p))).
    pub tau: f64,
    pub holds: bool,
}

/// Map delta to (rho', tau') and pass the property back to the original
/// matrix scale. `holds` records rho' < rho_target.
pub fn rnsp_certificate(report: &RipReport, rho_target: f64) -> Result<RnspCertificate, NullspaceError> {
    if report.delta_achieved >= 0.5 {
        return Err(NullspaceError::DeltaTooLarge(report.delta_achieved));
    }
    let (rho, tau_prime) = rip_to_rnsp(report.delta_achieved)
        .map_err(|_| NullspaceError::DeltaTooLarge(report.delta_achieved))?;
    let tau = 2.0 / (((report.m - 1) as f64).sqrt() * (report.p * (1.0 - report.p)).sqrt());
    Ok(RnspCertificate { rho, tau_prime, tau, holds: rho < rho_target })
}

/// Frequency report for the failure regime mp < 1/2 (or its complement).
#[derive(Debug, Clone, Serialize)]
pub struct FailureReport {
    pub m: usize,
    pub p: f64,
    pub trials: usize,
    /// Empirical frequency of the two-degenerate-columns event.
    pub frequency: f64,
    /// Exact event probability ((1-p)^{2m}, or p^{2m} on the complement path).
    pub exact_probability: f64,
    /// Binomial standard error of the frequency.
    pub sigma: f64,
    /// True when the complement matrix 1 - A was probed instead.
    pub used_complement: bool,
    /// frequency >= 1/4 - 3 sigma and |frequency - exact| <= 3 sigma.
    pub holds: bool,
}

/// Estimate the probability that the first two columns witness failure of
/// the order-2 null space property: both all-zero (sparse side) or both
/// all-one (dense side via B = 1 - A). On every occurrence the witness
/// v = e_1 - e_2 is checked literally: ||v_S||_2 = sqrt(2) while Av = 0.
pub fn failure_probe(m: usize, p: f64, trials: usize, seed: u64) -> Result<FailureReport, NullspaceError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(NullspaceError::BadP(p));
    }
    let mf = m as f64;
    let (used_complement, hit_value) = if mf * p < 0.5 {
        (false, 0.0f64)
    } else if mf * (1.0 - p) < 0.5 {
        (true, 1.0f64)
    } else {
        return Err(NullspaceError::HypothesisUnmet { m, p });
    };
    let hits: u64 = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            // only the first two columns matter for the witness
            let mut cols = [0.0f64; 2];
            let mut degenerate = true;
            let mut diff_norm_sq = 0.0;
            for _ in 0..m {
                for c in cols.iter_mut() {
                    *c = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
                }
                if cols[0] != hit_value || cols[1] != hit_value {
                    degenerate = false;
                }
                let d = cols[0] - cols[1];
                diff_norm_sq += d * d;
            }
            if degenerate {
                // witness v = (1, -1, 0, ...): A v = A_1 - A_2 = 0 exactly,
                // so the null-space inequality fails at ||v_S|| = sqrt(2)
                assert_eq!(diff_norm_sq, 0.0);
                1
            } else {
                0
            }
        })
        .sum();
    let frequency = hits as f64 / trials as f64;
    let exact_probability = if used_complement {
        p.powi(2 * m as i32)
    } else {
        (1.0 - p).powi(2 * m as i32)
    };
    let sigma = (exact_probability * (1.0 - exact_probability) / trials as f64).sqrt();
    let holds =
        frequency >= 0.25 - 3.0 * sigma && (frequency - exact_probability).abs() <= 3.0 * sigma;
    Ok(FailureReport { m, p, trials, frequency, exact_probability, sigma, used_complement, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EnsembleSpec, MultiplierSpec};
    use approx::assert_relative_eq;

    fn bernoulli_matrix(m: usize, n: usize, p: f64, seed: u64) -> DMatrix<f64> {
        sample_matrix(&EnsembleSpec::bernoulli01(m, n, p).unwrap(), seed)
    }

    #[test]
    fn standardize_half_maps_to_signs() {
        let a = bernoulli_matrix(20, 6, 0.5, 3);
        let s = standardize(&a, 0.5).unwrap();
        assert!(s.iter().all(|&x| (x.abs() - 1.0).abs() < 1e-12));
        let ones = DMatrix::from_element(4, 4, 1.0);
        let s = standardize(&ones, 0.5).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(standardize(&DMatrix::from_element(2, 2, 0.5), 0.5).is_err());
        assert!(standardize(&ones, 1.5).is_err());
    }

    #[test]
    fn standardized_entries_have_zero_mean() {
        let p = 0.3;
        let trials = 200;
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..trials {
            let a = bernoulli_matrix(50, 10, p, seed);
            let s = standardize(&a, p).unwrap();
            sum += s.iter().sum::<f64>();
            count += s.len();
        }
        let mean = sum / count as f64;
        let se = 1.0 / (count as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se, "mean {mean} vs se {se}");
    }

    #[test]
    fn single_support_when_order_equals_n() {
        let a = bernoulli_matrix(40, 4, 0.5, 9);
        let rep = projected_rip(&a, 0.5, 2).unwrap();
        assert_eq!(rep.order, 4);
        assert_eq!(rep.supports_enumerated, 1);
        assert!(rep.delta_achieved >= 0.0);
    }

    #[test]
    fn projector_annihilates_all_ones_exactly() {
        let p = MultiplierSpec::ortho_projection(7).unwrap();
        let ones = DMatrix::from_element(7, 3, 1.0);
        assert!(p.apply(&ones).iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn projection_contracts_norms() {
        let p = MultiplierSpec::ortho_projection(15).unwrap();
        let mut rng = trial_rng(77, 0);
        for _ in 0..1000 {
            let v = DMatrix::from_fn(15, 1, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            assert!(p.apply(&v).norm() <= v.norm() + 1e-12);
        }
    }

    #[test]
    fn rnsp_mapping_matches_arithmetic() {
        let rep = RipReport {
            order: 4,
            delta_achieved: 0.25,
            sigma_min: 0.75,
            sigma_max: 1.25,
            supports_enumerated: 1,
            m: 101,
            n: 12,
            p: 0.5,
        };
        let cert = rnsp_certificate(&rep, 0.5).unwrap();
        assert_relative_eq!(cert.rho, 0.2760, max_relative = 1e-3);
        assert!(cert.holds);
        // tau = 2 / (sqrt(100) * 0.5) = 0.4
        assert_relative_eq!(cert.tau, 0.4, max_relative = 1e-12);

        let too_big = RipReport { delta_achieved: 0.6, ..rep };
        assert!(matches!(rnsp_certificate(&too_big, 0.5), Err(NullspaceError::DeltaTooLarge(_))));
    }

    #[test]
    fn failure_probe_matches_exact_probability() {
        // (0.9)^8 = 0.43047 at m = 4, p = 0.1
        let rep = failure_probe(4, 0.1, 100_000, 5).unwrap();
        assert!(!rep.used_complement);
        assert_relative_eq!(rep.exact_probability, 0.43046721, max_relative = 1e-9);
        assert!(rep.holds, "{rep:?}");
        // m = 1, p = 0.4: (0.6)^2 = 0.36
        let rep = failure_probe(1, 0.4, 100_000, 6).unwrap();
        assert_relative_eq!(rep.exact_probability, 0.36, max_relative = 1e-9);
        assert!(rep.holds, "{rep:?}");
        // complement side: p = 0.9, m = 1 probes B = 1 - A
        let rep = failure_probe(1, 0.9, 100_000, 7).unwrap();
        assert!(rep.used_complement);
        assert_relative_eq!(rep.exact_probability, 0.81, max_relative = 1e-9);
        assert!(rep.holds, "{rep:?}");
        // hypothesis guard
        assert!(matches!(
            failure_probe(100, 0.5, 100, 1),
            Err(NullspaceError::HypothesisUnmet { .. })
        ));
    }

    #[test]
    fn enumeration_cap() {
        let a = bernoulli_matrix(10, 50, 0.5, 1);
        assert!(matches!(
            projected_rip(&a, 0.5, 6),
            Err(NullspaceError::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn rip_improves_with_more_rows() {
        // deterministic sanity: delta at m = 400 should beat m = 60
        let small = projected_rip(&bernoulli_matrix(60, 10, 0.5, 2), 0.5, 1).unwrap();
        let large = projected_rip(&bernoulli_matrix(400, 10, 0.5, 2), 0.5, 1).unwrap();
        assert!(large.delta_achieved < small.delta_achieved);
    }
}
