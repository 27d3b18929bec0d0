//! Prüfer data at the origin from a boundary phase.
//!
//! A real solution is written `u = Im(rho phi)` with `rho = R e^{i theta}` at
//! `x = 0`, where `phi(0) = 1` and `phi'(0) = b + i c`.  The boundary
//! condition `u'(0)/u(0) = tan xi` is met by `u(0) = cos xi`,
//! `u'(0) = sin xi`.

use crate::floquet::FloquetFrame;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub theta: f64,
    pub ln_r: f64,
}

pub fn initial_state(frame: &FloquetFrame, xi: f64) -> InitialState {
    let (b, c) = frame.phi_slope_at_origin();
    let im = xi.cos();
    let re = (xi.sin() - b * im) / c;
    InitialState { theta: im.atan2(re), ln_r: re.hypot(im).ln() }
}

/// `theta(0)` for boundary phase `xi`.
pub fn initial_phase(frame: &FloquetFrame, xi: f64) -> f64 {
    initial_state(frame, xi).theta
}

/// `(u(0), u'(0))` of the solution with Prüfer data `(theta, ln R)` at 0.
pub fn boundary_values(frame: &FloquetFrame, theta: f64, ln_r: f64) -> (f64, f64) {
    let (b, c) = frame.phi_slope_at_origin();
    let r = ln_r.exp();
    let (s, co) = theta.sin_cos();
    (r * s, r * (c * co + b * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{eigenvalue, PeriodicPotential};
    use std::f64::consts::PI;

    #[test]
    fn free_examples() {
        let v0 = PeriodicPotential::zero();
        let f = FloquetFrame::new(&v0, eigenvalue(&v0, 1.0, 1).unwrap()).unwrap();
        let s = initial_state(&f, 0.0);
        assert!((s.theta - PI / 2.0).abs() < 1e-12);
        assert!(s.ln_r.abs() < 1e-12);
        assert!(initial_phase(&f, PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_round_trip() {
        let v0 = PeriodicPotential::cosine(2.0).unwrap();
        let f = FloquetFrame::new(&v0, eigenvalue(&v0, PI / 2.0, 3).unwrap()).unwrap();
        for xi in [0.0, 0.4, 1.0, 2.9] {
            let s = initial_state(&f, xi);
            let (u, du) = boundary_values(&f, s.theta, s.ln_r);
            assert!((u - xi.cos()).abs() < 1e-12 && (du - xi.sin()).abs() < 1e-9);
        }
    }
}
