//! Floquet frames: the normalized Floquet solution of one quasimomentum
//! eigenvalue, reduced to what the Prüfer machinery needs.
//!
//! With `b = (cos k - C(1))/S(1)` and `c = sin k / S(1)` the Floquet solution is
//! `phi = C + b S + i c S`.  Its modulus squared `P = |phi|^2` is 1-periodic
//! and, unlike `C` and `S` themselves, contains only low harmonics, so it is
//! tabulated on a fixed grid over one period (value, slope and curvature at
//! each node) and interpolated by quintic Hermite pieces.  The phase `eta` has
//! `eta' = omega / (2P)` with the constant `omega = 2 sin k / S(1)`.

use std::f64::consts::{PI, TAU};

use super::bands::QuasiEigenvalue;
use super::fundamental::{pair_field, pair_scale, period_options, unscale_pair, Monodromy, PAIR_START};
use super::potential::PeriodicPotential;
use crate::error::{Error, Result};
use crate::numerics::ode::sample_ivp;
use crate::numerics::quad::gauss_legendre_7;
use crate::numerics::root::golden_max;

pub const DEFAULT_CELLS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub phi_sq: f64,
    pub phi_sq_slope: f64,
    pub eta_prime: f64,
    pub eta_second: f64,
}

#[derive(Debug, Clone)]
pub struct FloquetFrame {
    qe: QuasiEigenvalue,
    monodromy: Monodromy,
    omega: f64,
    real_coef: f64,
    imag_coef: f64,
    nodes: Vec<f64>,
    uniform: bool,
    pair: Vec<[f64; 4]>,
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p_right: Vec<f64>,
    d2p_left: Vec<f64>,
    eta: Vec<f64>,
    deta: Vec<f64>,
    d2eta: Vec<f64>,
    eta_period: f64,
    eta_period_mod: f64,
    eta_max: f64,
    eta_min: f64,
    inverse_rate_mean: f64,
    inverse_rate_l2: f64,
}

/// Quintic Hermite value and slope on a cell of width `h` at local `s`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn hermite5(s: f64, h: f64, y0: f64, d0: f64, dd0: f64, y1: f64, d1: f64, dd1: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h21 = 0.5 * s3 - s4 + 0.5 * s5;
    let g00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let g10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let g20 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let g11 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let g21 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let hh = h * h;
    let value = h00 * y0 + h01 * y1 + h * (h10 * d0 + h11 * d1) + hh * (h20 * dd0 + h21 * dd1);
    let slope = g00 * (y0 - y1) / h + g10 * d0 + g11 * d1 + h * (g20 * dd0 + g21 * dd1);
    (value, slope)
}

impl FloquetFrame {
    pub fn new(v0: &PeriodicPotential, qe: QuasiEigenvalue) -> Result<Self> {
        Self::with_cells(v0, qe, DEFAULT_CELLS)
    }

    pub fn with_cells(v0: &PeriodicPotential, qe: QuasiEigenvalue, cells: usize) -> Result<Self> {
        let cells = cells.max(8);
        let energy = qe.energy;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        let inner = v0.breakpoints_in(0.0, 1.0);
        let uniform = inner.is_empty();
        nodes.extend(inner.iter().copied());
        nodes.sort_by(|a, b| a.total_cmp(b));
        nodes.dedup();

        let sol = sample_ivp(pair_field(v0, energy), 0.0, 1.0, &PAIR_START, &period_options(v0, 1.0), &nodes)
            .map_err(|e| e.at_energy(energy))?;
        let kappa = pair_scale(energy);
        let pair: Vec<[f64; 4]> = (0..nodes.len()).map(|i| unscale_pair(sol.row(i), kappa)).collect();
        let last = pair[pair.len() - 1];
        let monodromy = Monodromy { energy, c: last[0], dc: last[1], s: last[2], ds: last[3] };
        let s1 = monodromy.s;
        if !(s1.abs() * energy.abs().sqrt().max(1.0) > 1e-12) {
            return Err(Error::NearBandEdge { energy, s1 });
        }
        let (sin_k, cos_k) = qe.k.sin_cos();
        let real_coef = (cos_k - monodromy.c) / s1;
        let imag_coef = sin_k / s1;
        let omega = 2.0 * sin_k / s1;

        let n = nodes.len();
        let mut p = vec![0.0; n];
        let mut dp = vec![0.0; n];
        let mut d2p_right = vec![0.0; n];
        let mut d2p_left = vec![0.0; n];
        for i in 0..n {
            let [c, dc, s, ds] = pair[i];
            let u = c + real_coef * s;
            let du = dc + real_coef * ds;
            let w = imag_coef * s;
            let dw = imag_coef * ds;
            p[i] = u * u + w * w;
            dp[i] = 2.0 * (u * du + w * dw);
            let kinetic = 2.0 * (du * du + dw * dw);
            d2p_right[i] = kinetic + 2.0 * (v0.evaluate(nodes[i]) - energy) * p[i];
            d2p_left[i] = kinetic + 2.0 * (v0.evaluate_left(nodes[i]) - energy) * p[i];
        }
        // Exact normalization at the origin.
        p[0] = 1.0;

        let mut frame = FloquetFrame {
            qe,
            monodromy,
            omega,
            real_coef,
            imag_coef,
            nodes,
            uniform,
            pair,
            p,
            dp,
            d2p_right,
            d2p_left,
            eta: vec![0.0; n],
            deta: vec![0.0; n],
            d2eta: vec![0.0; n],
            eta_period: 0.0,
            eta_period_mod: 0.0,
            eta_max: 0.0,
            eta_min: 0.0,
            inverse_rate_mean: 0.0,
            inverse_rate_l2: 0.0,
        };
        frame.tabulate_phase();
        frame.locate_extrema();
        Ok(frame)
    }

    fn tabulate_phase(&mut self) {
        let n = self.nodes.len();
        for i in 0..n {
            self.deta[i] = self.omega / (2.0 * self.p[i]);
            self.d2eta[i] = -self.omega * self.dp[i] / (2.0 * self.p[i] * self.p[i]);
        }
        let mut inv_mean = 0.0;
        let mut inv_sq = 0.0;
        for i in 0..n - 1 {
            let (a, b) = (self.nodes[i], self.nodes[i + 1]);
            let step = gauss_legendre_7(|x| self.omega / (2.0 * self.phi_sq_in_cell(i, x).0), a, b);
            self.eta[i + 1] = self.eta[i] + step;
            inv_mean += gauss_legendre_7(|x| 2.0 * self.phi_sq_in_cell(i, x).0 / self.omega.abs(), a, b);
            inv_sq += gauss_legendre_7(|x| (2.0 * self.phi_sq_in_cell(i, x).0 / self.omega).powi(2), a, b);
        }
        self.eta_period = self.eta[n - 1];
        self.eta_period_mod = self.eta_period.rem_euclid(TAU);
        self.inverse_rate_mean = inv_mean;
        self.inverse_rate_l2 = inv_sq.sqrt();
    }

    fn locate_extrema(&mut self) {
        let n = self.nodes.len();
        let (mut i_min, mut i_max) = (0, 0);
        for i in 0..n {
            if self.p[i] < self.p[i_min] {
                i_min = i;
            }
            if self.p[i] > self.p[i_max] {
                i_max = i;
            }
        }
        let refine = |i: usize, sign: f64| -> f64 {
            let mut best = sign * self.p[i];
            for cell in [i.checked_sub(1), Some(i)].into_iter().flatten() {
                if cell + 1 >= n {
                    continue;
                }
                let (a, b) = (self.nodes[cell], self.nodes[cell + 1]);
                let (_, v) = golden_max(|x| sign * self.phi_sq_in_cell(cell, x).0, a, b, 1e-12);
                best = best.max(v);
            }
            sign * best
        };
        let p_min = refine(i_min, -1.0);
        let p_max = refine(i_max, 1.0);
        self.eta_max = self.omega.abs() / (2.0 * p_min);
        self.eta_min = self.omega.abs() / (2.0 * p_max);
    }

    #[inline]
    fn cell_of(&self, t: f64) -> usize {
        let last = self.nodes.len() - 2;
        if self.uniform {
            ((t * (self.nodes.len() - 1) as f64) as usize).min(last)
        } else {
            (self.nodes.partition_point(|&x| x <= t).max(1) - 1).min(last)
        }
    }

    #[inline]
    fn phi_sq_in_cell(&self, i: usize, t: f64) -> (f64, f64) {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let h = b - a;
        hermite5(
            (t - a) / h,
            h,
            self.p[i],
            self.dp[i],
            self.d2p_right[i],
            self.p[i + 1],
            self.dp[i + 1],
            self.d2p_left[i + 1],
        )
    }

    #[inline]
    fn reduce(x: f64) -> (f64, f64) {
        let m = x.floor();
        let mut t = x - m;
        let mut m = m;
        if t >= 1.0 {
            t = 0.0;
            m += 1.0;
        }
        (m, t)
    }

    pub fn qe(&self) -> QuasiEigenvalue {
        self.qe
    }

    pub fn energy(&self) -> f64 {
        self.qe.energy
    }

    pub fn monodromy(&self) -> Monodromy {
        self.monodromy
    }

    /// `S(1, E)`.
    pub fn s1(&self) -> f64 {
        self.monodromy.s
    }

    /// `omega = 2 sin k / S(1, E)`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `max_x |eta'|`.
    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    /// `min_x |eta'|`.
    pub fn eta_min(&self) -> f64 {
        self.eta_min
    }

    /// `∫_0^1 1/|eta'|`.
    pub fn inverse_rate_mean(&self) -> f64 {
        self.inverse_rate_mean
    }

    /// `(∫_0^1 1/eta'^2)^(1/2)`.
    pub fn inverse_rate_l2(&self) -> f64 {
        self.inverse_rate_l2
    }

    /// `eta(1) = eta(x + 1) - eta(x)`.
    pub fn eta_period(&self) -> f64 {
        self.eta_period
    }

    /// Distance of `eta(1)` from `k` modulo `2 pi` (zero in exact arithmetic).
    pub fn eta_period_defect(&self) -> f64 {
        let d = (self.eta_period - self.qe.k).rem_euclid(TAU);
        d.min(TAU - d)
    }

    /// `phi'(0) = (e^{ik} - C(1))/S(1)`, as `(re, im)`.
    pub fn phi_slope_at_origin(&self) -> (f64, f64) {
        (self.real_coef, self.imag_coef)
    }

    pub fn point(&self, x: f64) -> FramePoint {
        let (_, t) = Self::reduce(x);
        let i = self.cell_of(t);
        let (p, dp) = self.phi_sq_in_cell(i, t);
        FramePoint {
            phi_sq: p,
            phi_sq_slope: dp,
            eta_prime: self.omega / (2.0 * p),
            eta_second: -self.omega * dp / (2.0 * p * p),
        }
    }

    pub fn phi_sq(&self, x: f64) -> f64 {
        self.point(x).phi_sq
    }

    pub fn eta_prime(&self, x: f64) -> f64 {
        self.point(x).eta_prime
    }

    pub fn eta_second(&self, x: f64) -> f64 {
        self.point(x).eta_second
    }

    #[inline]
    fn eta_in_cell(&self, i: usize, t: f64) -> f64 {
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let h = b - a;
        hermite5(
            (t - a) / h,
            h,
            self.eta[i],
            self.deta[i],
            self.d2eta[i],
            self.eta[i + 1],
            self.deta[i + 1],
            self.d2eta[i + 1],
        )
        .0
    }

    /// Unwrapped phase with `eta(0) = 0`.
    pub fn eta(&self, x: f64) -> f64 {
        let (m, t) = Self::reduce(x);
        m * self.eta_period + self.eta_in_cell(self.cell_of(t), t)
    }

    /// `(eta'(x), eta(x) mod 2 pi)`, accurate for large `x`.
    #[inline]
    pub fn rate_and_phase(&self, x: f64) -> (f64, f64) {
        let (m, t) = Self::reduce(x);
        let i = self.cell_of(t);
        let p = self.phi_sq_in_cell(i, t).0;
        let phase = ((m * self.eta_period_mod).rem_euclid(TAU) + self.eta_in_cell(i, t)).rem_euclid(TAU);
        (self.omega / (2.0 * p), phase)
    }

    /// Nodes of the period table.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `[C, C', S, S']` at node `i`.
    pub fn pair_at_node(&self, i: usize) -> [f64; 4] {
        self.pair[i]
    }

    /// `(phi, phi')` at node `i`, each as `(re, im)`.
    pub fn phi_at_node(&self, i: usize) -> ((f64, f64), (f64, f64)) {
        let [c, dc, s, ds] = self.pair[i];
        (
            (c + self.real_coef * s, self.imag_coef * s),
            (dc + self.real_coef * ds, self.imag_coef * ds),
        )
    }

    /// `2 Im(conj(phi) phi')` at node `i`; equals `omega` in exact arithmetic.
    pub fn wronskian_omega_at_node(&self, i: usize) -> f64 {
        let ((u, w), (du, dw)) = self.phi_at_node(i);
        2.0 * (u * dw - w * du)
    }
}

pub fn floquet_frame(v0: &PeriodicPotential, qe: QuasiEigenvalue) -> Result<FloquetFrame> {
    FloquetFrame::new(v0, qe)
}

/// Frames at `k` and at `pi - k` in the same band (the same frame twice when
/// `k = pi/2`).
pub fn frame_pair(v0: &PeriodicPotential, qe: QuasiEigenvalue) -> Result<(FloquetFrame, FloquetFrame)> {
    let own = FloquetFrame::new(v0, qe)?;
    if (qe.k - PI / 2.0).abs() < 1e-12 {
        return Ok((own.clone(), own));
    }
    let mirror_qe = super::bands::eigenvalue(v0, PI - qe.k, qe.n)?;
    let mirror = FloquetFrame::new(v0, mirror_qe)?;
    Ok((own, mirror))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::bands::eigenvalue;

    #[test]
    fn free_quarter_turn_frame() {
        let v0 = PeriodicPotential::zero();
        let qe = eigenvalue(&v0, PI / 2.0, 1).unwrap();
        let f = FloquetFrame::new(&v0, qe).unwrap();
        assert!((f.omega() - PI).abs() < 1e-9);
        for x in [0.0, 0.13, 0.5, 0.77, 3.2] {
            assert!((f.phi_sq(x) - 1.0).abs() < 1e-9);
            assert!((f.eta_prime(x) - PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_frames_have_linear_phase() {
        let v0 = PeriodicPotential::zero();
        for (k, n) in [(1.0, 1), (0.4, 3), (2.2, 2)] {
            let qe = eigenvalue(&v0, k, n).unwrap();
            let f = FloquetFrame::new(&v0, qe).unwrap();
            let rate = qe.energy.sqrt() * if n % 2 == 1 { 1.0 } else { -1.0 };
            for x in [0.05, 0.5, 0.95, 12.25] {
                assert!((f.eta_prime(x) - rate).abs() < 1e-8, "k {k} n {n}");
                assert!(f.eta_second(x).abs() < 1e-6);
                assert!((f.eta(x) - rate * x).abs() < 1e-8 * (1.0 + x));
            }
            assert!(f.eta_period_defect() < 1e-9);
        }
    }

    #[test]
    fn sign_rule_and_normalization() {
        let v0 = PeriodicPotential::cosine(2.0).unwrap();
        for n in 1..=4 {
            let qe = eigenvalue(&v0, 1.1, n).unwrap();
            let f = FloquetFrame::new(&v0, qe).unwrap();
            let parity = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!(parity * f.omega() > 0.0);
            assert_eq!(f.phi_sq(0.0), 1.0);
            assert!((f.phi_sq(0.3) - f.phi_sq(1.3)).abs() < 1e-12);
            assert!(f.eta_min() <= f.eta_max());
            assert!(f.eta_period_defect() < 1e-8, "defect {}", f.eta_period_defect());
        }
    }

    #[test]
    fn wrapped_phase_matches_unwrapped() {
        let v0 = PeriodicPotential::cosine(2.0).unwrap();
        let qe = eigenvalue(&v0, 0.8, 3).unwrap();
        let f = FloquetFrame::new(&v0, qe).unwrap();
        for x in [0.0, 0.4, 7.9, 123.45] {
            let (rate, phase) = f.rate_and_phase(x);
            assert!((rate - f.eta_prime(x)).abs() < 1e-12 * rate.abs());
            let d = (f.eta(x) - phase).rem_euclid(TAU);
            assert!(d.min(TAU - d) < 1e-9);
        }
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let q = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let dq = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let d2q = |x: f64| -12.0 * x + 10.0 * x.powi(3);
        let (a, b) = (0.3, 0.8);
        for s in [0.0, 0.25, 0.6, 1.0] {
            let x = a + s * (b - a);
            let (v, d) = hermite5(s, b - a, q(a), dq(a), d2q(a), q(b), dq(b), d2q(b));
            assert!((v - q(x)).abs() < 1e-14);
            assert!((d - dq(x)).abs() < 1e-13);
        }
    }
}
