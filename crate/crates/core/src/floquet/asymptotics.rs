//! Explicit high-energy constants: the free anchor of each eigenvalue, its
//! deviation bound, and the band-index thresholds that gate the estimates.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

/// `sin(99k/100) sin((pi + 99k)/100)`, the factor shared by every threshold.
fn tilt(k: f64) -> f64 {
    (0.99 * k).sin() * ((PI + 99.0 * k) / 100.0).sin()
}

/// Free-model value of `sqrt(E)` for quasimomentum `k` in band `n`.
pub fn anchor(k: f64, n: usize) -> f64 {
    let m = n as f64;
    if n.is_multiple_of(2) {
        m * PI - k
    } else {
        (m - 1.0) * PI + k
    }
}

/// `(a, delta)`: the anchor and the bound on `|sqrt(E) - a|` for band `n`.
pub fn asymptotic_anchor(a_norm: f64, k: f64, n: usize) -> (f64, f64) {
    let delta = a_norm * E.powi(3) / (n as f64 * k.sin() * tilt(k));
    (anchor(k, n), delta)
}

/// Band index above which the anchor bound and the endpoint bounds are
/// guaranteed: `1 + A / ((k(pi-k)/1e4) sin k tilt(k))`.
pub fn eigenvalue_threshold(a_norm: f64, k: f64) -> f64 {
    1.0 + a_norm / (k * (PI - k) / 1e4 * k.sin() * tilt(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Band index above which the phase-rate bounds hold.
    pub l: f64,
    /// Smallness scale of the phase-rate bounds.
    pub big_delta: f64,
}

pub fn lk_thresholds(a_norm: f64, k: f64) -> Thresholds {
    let s3 = k.sin().powi(3) * tilt(k);
    Thresholds {
        l: 1.0 + a_norm / (k * (PI - k) / 1e4 * s3),
        big_delta: 40.0 * PI * a_norm * E.powi(3) / s3,
    }
}

/// Lower and upper bounds on `(-1)^(n+1) eta'` for `n > L(k)`.
pub fn eta_rate_bounds(a_norm: f64, k: f64, n: usize) -> (f64, f64) {
    let d = lk_thresholds(a_norm, k).big_delta;
    ((n as f64 - 1.0) * PI - d, n as f64 * PI + d)
}

/// Bound on `|eta''|` for `n > L(k)`.
pub fn eta_curvature_bound(a_norm: f64, k: f64, n: usize) -> f64 {
    n as f64 * PI * lk_thresholds(a_norm, k).big_delta
}
