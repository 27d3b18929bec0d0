//! Thresholds and constants of the oscillatory-integral bounds.
//!
//! For `|theta' - a| <= c t^(-beta)` the integrals `∫_{x0}^x sin(theta)/t` and
//! `∫_{x0}^x cos(theta)/t` are bounded by `r(a, beta, c) / (a x0)^beta` once
//! `x0 > s(a, beta, c)`.

use std::f64::consts::{PI, TAU};

/// `s(beta, c) = (100 c + 10^4)^(1/beta)`, the threshold for unit frequency.
pub fn unit_threshold(beta: f64, c: f64) -> f64 {
    (100.0 * c + 1e4).powf(1.0 / beta)
}

/// `(30 c / beta + 10 pi) / x0^beta`, the bound for unit frequency.
pub fn unit_bound(beta: f64, c: f64, x0: f64) -> f64 {
    (30.0 * c / beta + 10.0 * PI) / x0.powf(beta)
}

/// `s(a, beta, c) = (100 c a^(beta - 1) + 10^4)^(1/beta) / a`.
pub fn osc_threshold(a: f64, beta: f64, c: f64) -> f64 {
    let a = a.abs();
    (100.0 * c * a.powf(beta - 1.0) + 1e4).powf(1.0 / beta) / a
}

/// `r(a, beta, c) = 30 c a^(beta - 1) / beta + 10 pi`.
pub fn osc_constant(a: f64, beta: f64, c: f64) -> f64 {
    30.0 * c * a.abs().powf(beta - 1.0) / beta + 10.0 * PI
}

/// `r(a, beta, c) / (a^beta x0^beta)`.
pub fn osc_bound(a: f64, beta: f64, c: f64, x0: f64) -> f64 {
    osc_constant(a, beta, c) / (a.abs().powf(beta) * x0.powf(beta))
}

/// Distance from `a` to the nearest multiple of `2 pi`.
pub fn lattice_distance(a: f64) -> f64 {
    let m = a.rem_euclid(TAU);
    m.min(TAU - m)
}

/// `r(alpha) = s(alpha, 2/3, 1) + 4 r(alpha, 2/3, 1) (alpha^(-4/3) + 3)^(1/2)`,
/// the threshold and constant for integrands with a 1-periodic weight.
pub fn periodic_constant(alpha: f64) -> f64 {
    let beta = 2.0 / 3.0;
    osc_threshold(alpha, beta, 1.0) + 4.0 * osc_constant(alpha, beta, 1.0) * (alpha.powf(-4.0 / 3.0) + 3.0).sqrt()
}

/// `‖Gamma‖_2 r(alpha) / x0^(2/3)`.
pub fn periodic_bound(gamma_l2: f64, alpha: f64, x0: f64) -> f64 {
    gamma_l2 * periodic_constant(alpha) / x0.powf(2.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_frequency_reduces_to_the_plain_case() {
        for (beta, c) in [(1.0, 1.0), (0.5, 2.0), (2.0 / 3.0, 0.3)] {
            assert!((osc_threshold(1.0, beta, c) - unit_threshold(beta, c)).abs() < 1e-9 * unit_threshold(beta, c));
            assert!((osc_bound(1.0, beta, c, 1e6) - unit_bound(beta, c, 1e6)).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_values() {
        assert!((unit_threshold(1.0, 1.0) - 10100.0).abs() < 1e-9);
        assert!((osc_constant(3.0, 1.0, 1.0) - (30.0 + 10.0 * PI)).abs() < 1e-12);
        // (100 * 3^-0.5 + 1e4)^2 / 3 for beta = 1/2, c = 1
        let expect = (100.0 / 3f64.sqrt() + 1e4).powi(2) / 3.0;
        assert!((osc_threshold(3.0, 0.5, 1.0) - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn lattice_distance_wraps() {
        assert!((lattice_distance(1.0) - 1.0).abs() < 1e-15);
        assert!((lattice_distance(TAU - 0.25) - 0.25).abs() < 1e-12);
        assert!((lattice_distance(-0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn periodic_constant_decreases_with_separation() {
        assert!(periodic_constant(0.5) > periodic_constant(1.0));
        assert!(periodic_constant(1.0) > periodic_constant(PI));
        assert!(periodic_constant(1.0).is_finite());
    }
}
