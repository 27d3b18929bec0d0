//! Numerical audits of the high-energy bounds on `C`, `S`, the eigenvalue
//! anchors and the phase rate `eta'`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::asymptotics::{asymptotic_anchor, eigenvalue_threshold, eta_curvature_bound, eta_rate_bounds, lk_thresholds};
use super::bands::QuasiEigenvalue;
use super::frame::FloquetFrame;
use super::fundamental::fundamental_pair;
use super::potential::PeriodicPotential;
use crate::error::Result;

/// One inequality `lhs <= rhs`, evaluated at `x` when it is pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub x: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// Rounding allowance added to `rhs` before comparing.
    pub slack: f64,
    pub applicable: bool,
    pub holds: bool,
}

impl Check {
    pub fn new(name: &str, x: Option<f64>, lhs: f64, rhs: f64, slack: f64, applicable: bool) -> Self {
        Check { name: name.to_string(), x, lhs, rhs, slack, applicable, holds: lhs <= rhs + slack }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
    pub passes: bool,
}

impl AuditReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let passes = checks.iter().all(|c| !c.applicable || c.holds);
        AuditReport { checks, passes }
    }

    pub fn applicable(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.applicable)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.applicable().filter(|c| !c.holds)
    }

    /// Smallest `rhs - lhs` over the applicable checks.
    pub fn min_margin(&self) -> Option<f64> {
        self.applicable().map(Check::margin).min_by(|a, b| a.total_cmp(b))
    }
}

/// Checks `|C - cos rho x|`, `|C' + rho sin rho x|`, `|S - sin(rho x)/rho|` and
/// `|S' - cos rho x|` on `grid`, the anchor bound `|sqrt E - a| <= delta_n`,
/// and the two-sided endpoint bounds on `C`, `sqrt(E) S` and their squares.
/// Checks whose hypotheses fail are kept but marked not applicable.
pub fn audit_asymptotic_bounds(v0: &PeriodicPotential, qe: QuasiEigenvalue, grid: &[f64]) -> Result<AuditReport> {
    let a_norm = v0.l1_norm();
    let energy = qe.energy;
    let (k, n) = (qe.k, qe.n);
    let pair = fundamental_pair(v0, energy, 1.0)?;
    let rho = energy.abs().sqrt();
    let growth_hyp = rho > 1f64.max(2.0 * a_norm);
    let endpoint_hyp = (n as f64) > eigenvalue_threshold(a_norm, k);
    let (anchor, delta_n) = asymptotic_anchor(a_norm, k, n);
    let eps = 1e-9;
    let mut checks = Vec::new();

    for &x in grid {
        let [c, dc, s, ds] = pair.eval(x);
        // Free solutions for rho = sqrt(E) (real) or i sqrt(-E).
        let (cos_rx, rho_sin_rx, sin_rx_over_rho, env) = if energy >= 0.0 {
            let t = rho * x;
            let sinc = if rho > 0.0 { t.sin() / rho } else { x };
            (t.cos(), rho * t.sin(), sinc, 1.0)
        } else {
            let t = rho * x;
            (t.cosh(), -rho * t.sinh(), t.sinh() / rho, t.exp())
        };
        let r = 2.0 * a_norm * env;
        let scale = cos_rx.abs().max(1.0);
        checks.push(Check::new("C_growth", Some(x), (c - cos_rx).abs(), r / rho, eps * scale, growth_hyp));
        checks.push(Check::new("dC_growth", Some(x), (dc + rho_sin_rx).abs(), r, eps * scale * rho.max(1.0), growth_hyp));
        checks.push(Check::new("S_growth", Some(x), (s - sin_rx_over_rho).abs(), r / (rho * rho), eps * scale, growth_hyp));
        checks.push(Check::new("dS_growth", Some(x), (ds - cos_rx).abs(), r / rho, eps * scale, growth_hyp));

        if energy > 0.0 {
            let root = energy.sqrt();
            let (sn, cs) = (root * x).sin_cos();
            checks.push(Check::new("C_range", Some(x), c.abs(), 1.0 + delta_n, eps, endpoint_hyp));
            checks.push(Check::new("rootE_S_range", Some(x), (root * s).abs(), 1.0 + delta_n, eps, endpoint_hyp));
            checks.push(Check::new("C_sq", Some(x), (c * c - cs * cs).abs(), delta_n, eps, endpoint_hyp));
            checks.push(Check::new("E_S_sq", Some(x), (energy * s * s - sn * sn).abs(), delta_n, eps, endpoint_hyp));
        }
    }

    let m = pair.eval(1.0);
    let root = energy.max(0.0).sqrt();
    let parity = if n % 2 == 1 { 1.0 } else { -1.0 };
    checks.push(Check::new("anchor", None, (root - anchor).abs(), delta_n, eps * anchor.max(1.0), endpoint_hyp));
    checks.push(Check::new("C1", None, (m[0] - k.cos()).abs(), 2.0 * delta_n, eps, endpoint_hyp));
    checks.push(Check::new("C1_sq", None, (m[0] * m[0] - k.cos().powi(2)).abs(), 2.0 * delta_n, eps, endpoint_hyp));
    checks.push(Check::new("rootE_S1", None, (root * m[2] - parity * k.sin()).abs(), 2.0 * delta_n, eps, endpoint_hyp));
    checks.push(Check::new("E_S1_sq", None, (energy * m[2] * m[2] - k.sin().powi(2)).abs(), 2.0 * delta_n, eps, endpoint_hyp));
    Ok(AuditReport::new(checks))
}

/// Checks `(n-1)pi - delta(k) <= (-1)^(n+1) eta' <= n pi + delta(k)` and
/// `|eta''| <= n pi delta(k)` on `grid`; applicable when `n > L(k)`.
pub fn audit_eta_bounds(frame: &FloquetFrame, a_norm: f64, grid: &[f64]) -> AuditReport {
    let qe = frame.qe();
    let (k, n) = (qe.k, qe.n);
    let applicable = (n as f64) > lk_thresholds(a_norm, k).l;
    let (lo, hi) = eta_rate_bounds(a_norm, k, n);
    let curv = eta_curvature_bound(a_norm, k, n);
    let parity = if n % 2 == 1 { 1.0 } else { -1.0 };
    let rate_scale = n as f64 * PI;
    let mut checks = Vec::with_capacity(3 * grid.len());
    for &x in grid {
        let p = frame.point(x);
        let oriented = parity * p.eta_prime;
        checks.push(Check::new("eta_rate_lower", Some(x), lo, oriented, 1e-9 * rate_scale, applicable));
        checks.push(Check::new("eta_rate_upper", Some(x), oriented, hi, 1e-9 * rate_scale, applicable));
        checks.push(Check::new("eta_curvature", Some(x), p.eta_second.abs(), curv, 1e-8 * rate_scale * rate_scale, applicable));
    }
    AuditReport::new(checks)
}

/// `n` uniformly spaced points of `[0, 1)`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::bands::eigenvalue;

    #[test]
    fn free_potential_passes_with_zero_left_sides() {
        let v0 = PeriodicPotential::zero();
        let qe = eigenvalue(&v0, 1.2, 3).unwrap();
        let r = audit_asymptotic_bounds(&v0, qe, &unit_grid(16)).unwrap();
        assert!(r.passes);
        for c in r.applicable().filter(|c| !c.name.ends_with("_range")) {
            assert!(c.lhs < 1e-8, "{c:?}");
        }
        let f = FloquetFrame::new(&v0, qe).unwrap();
        let r = audit_eta_bounds(&f, 0.0, &unit_grid(64));
        assert!(r.passes);
        assert_eq!(r.applicable().count(), 3 * 64);
    }

    #[test]
    fn growth_bound_at_thirty() {
        let v0 = PeriodicPotential::cosine(2.0).unwrap();
        let qe = QuasiEigenvalue { k: 0.0, n: 10, energy: 900.0 };
        let r = audit_asymptotic_bounds(&v0, qe, &[1.0]).unwrap();
        let c = r.checks.iter().find(|c| c.name == "C_growth").unwrap();
        assert!(c.applicable && c.holds);
        assert!((c.rhs - 2.0 * (4.0 / PI) / 30.0).abs() < 1e-6);
    }

    #[test]
    fn low_bands_are_not_applicable() {
        let v0 = PeriodicPotential::cosine(2.0).unwrap();
        let qe = eigenvalue(&v0, PI / 2.0, 20).unwrap();
        let r = audit_asymptotic_bounds(&v0, qe, &unit_grid(8)).unwrap();
        let anchor = r.checks.iter().find(|c| c.name == "anchor").unwrap();
        assert!(!anchor.applicable);
        assert!(anchor.lhs <= anchor.rhs);
    }
}
