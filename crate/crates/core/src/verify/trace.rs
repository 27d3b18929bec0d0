//! Probe traces of the Prüfer system under a given perturbation, and the
//! decay verdicts drawn from them.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampled::Perturbation;
use crate::error::{Error, Result};
use crate::floquet::{eigenvalue, FloquetFrame, PeriodicPotential, QuasiEigenvalue};
use crate::numerics::fit::fit_line;
use crate::numerics::ode::{sample_ivp, IvpOptions};
use crate::synth::initial_state;

pub const DEFAULT_VERDICT_MARGIN: f64 = 0.05;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
const FIT_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { rel_tol: 1e-12, abs_tol: 1e-12 }
    }
}

/// `(x, theta, ln R)` samples of one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruferTrace {
    #[serde(rename = "E")]
    pub energy: f64,
    pub xi: f64,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub ln_r: Vec<f64>,
}

impl PruferTrace {
    pub fn ln_r_at(&self, x: f64) -> f64 {
        interpolate(&self.x, &self.ln_r, x)
    }
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&g| g <= x).clamp(1, xs.len() - 1);
    let (a, b) = (xs[i - 1], xs[i]);
    if b > a {
        ys[i - 1] + (x - a) / (b - a) * (ys[i] - ys[i - 1])
    } else {
        ys[i]
    }
}

/// Integrate `theta' = eta' - V sin^2(theta)/eta'` and
/// `(ln R)' = V sin(2 theta)/(2 eta')` from 0 in the unwrapped angle and
/// sample on `grid` (sorted, within `[0, x_max]`).
pub fn prufer_trace(
    frame: &FloquetFrame,
    v: &dyn Perturbation,
    theta0: f64,
    ln_r0: f64,
    x_max: f64,
    grid: &[f64],
    opts: &TraceOptions,
) -> Result<PruferTrace> {
    if !(x_max > 0.0) || x_max > v.domain_end() * (1.0 + 1e-14) {
        return Err(Error::InvalidArgument(format!("trace end {x_max} outside the domain of V (ends at {})", v.domain_end())));
    }
    let field = |x: f64, y: &[f64], dy: &mut [f64]| {
        let rate = frame.eta_prime(x);
        let pot = v.value(x);
        let (s, c) = y[0].sin_cos();
        dy[0] = rate - pot * s * s / rate;
        dy[1] = pot * s * c / rate;
    };
    let mut jumps: Vec<f64> = v.jumps().into_iter().filter(|&t| t > 0.0 && t < x_max).collect();
    jumps.sort_by(|a, b| a.total_cmp(b));
    jumps.dedup();
    let ivp = IvpOptions::new(opts.rel_tol, opts.abs_tol).with_breakpoints(jumps);
    let sol = sample_ivp(field, 0.0, x_max, &[theta0, ln_r0], &ivp, grid)?;
    let n = grid.len();
    Ok(PruferTrace {
        energy: frame.energy(),
        xi: f64::NAN,
        x: grid.to_vec(),
        theta: (0..n).map(|i| sol.row(i)[0]).collect(),
        ln_r: (0..n).map(|i| sol.row(i)[1]).collect(),
    })
}

/// Trace started from the boundary phase `xi`.
pub fn probe_trace(frame: &FloquetFrame, xi: f64, v: &dyn Perturbation, x_max: f64, grid: &[f64], opts: &TraceOptions) -> Result<PruferTrace> {
    let s = initial_state(frame, xi);
    let mut t = prufer_trace(frame, v, s.theta, s.ln_r, x_max, grid, opts)?;
    t.xi = xi;
    Ok(t)
}

/// Uniform grid on `[0, x_max]` including the end point.
pub fn trace_grid(x_max: f64, step: f64) -> Vec<f64> {
    let n = (x_max / step).ceil() as usize;
    let mut g: Vec<f64> = (0..n).map(|i| i as f64 * step).filter(|&x| x < x_max).collect();
    g.push(x_max);
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    #[serde(rename = "E")]
    pub energy: f64,
    pub xi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub tail_window: (f64, f64),
    pub l2_verdict: bool,
}

/// Fit `ln R` against `ln x` on the last `tail_fraction` of the logarithmic
/// range from `max(last_activation, 1)` to the end of the samples.
pub fn decay_fit(
    energy: f64,
    xi: f64,
    x: &[f64],
    ln_r: &[f64],
    tail_fraction: f64,
    last_activation: f64,
    margin: f64,
) -> Result<DecayReport> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("tail fraction must lie in (0, 1), got {tail_fraction}")));
    }
    if x.len() != ln_r.len() || x.len() < 2 {
        return Err(Error::InvalidArgument("trace needs at least two samples".into()));
    }
    let start = last_activation.max(1.0);
    let end = *x.last().unwrap();
    if end < 10.0 * start {
        return Err(Error::InsufficientTail(format!("trace ends at {end}, needs at least {} (a decade past {start})", 10.0 * start)));
    }
    let (l0, l1) = (start.ln(), end.ln());
    let lo = l1 - tail_fraction * (l1 - l0);
    let points: Vec<(f64, f64)> = (0..FIT_POINTS)
        .map(|i| {
            let u = lo + (l1 - lo) * i as f64 / (FIT_POINTS - 1) as f64;
            let xx = u.exp().min(end);
            (u, interpolate(x, ln_r, xx))
        })
        .collect();
    let fit = fit_line(&points)?;
    Ok(DecayReport {
        energy,
        xi,
        slope: fit.slope,
        intercept: fit.intercept,
        rms_residual: fit.rms_residual,
        tail_window: (lo.exp(), end),
        l2_verdict: fit.slope < -0.5 - margin,
    })
}

pub fn decay_report(trace: &PruferTrace, tail_fraction: f64, last_activation: f64) -> Result<DecayReport> {
    decay_fit(trace.energy, trace.xi, &trace.x, &trace.ln_r, tail_fraction, last_activation, DEFAULT_VERDICT_MARGIN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub qe: QuasiEigenvalue,
    pub xi: f64,
}

/// `count` probes in bands 1 and 2 whose quasimomenta stay at least 0.05
/// away from every target `k` and `pi - k`.
pub fn default_probes(v0: &PeriodicPotential, target_ks: &[f64], count: usize) -> Result<Vec<Probe>> {
    let candidates = 64;
    let ks: Vec<f64> = (0..candidates)
        .map(|i| 0.15 + (PI - 0.3) * i as f64 / (candidates - 1) as f64)
        .filter(|&k| target_ks.iter().all(|&t| (k - t).abs() >= 0.05 && (k - (PI - t)).abs() >= 0.05))
        .collect();
    if ks.len() < count {
        return Err(Error::InvalidArgument(format!("only {} admissible probe quasimomenta", ks.len())));
    }
    (0..count)
        .map(|i| {
            let k = ks[(i * ks.len()) / count.max(1) + ks.len() / (2 * count.max(1))];
            let n = 1 + i % 2;
            Ok(Probe { qe: eigenvalue(v0, k, n)?, xi: 0.5 })
        })
        .collect()
}

/// Trace every probe in parallel.
pub fn trace_probes(
    v0: &PeriodicPotential,
    probes: &[Probe],
    v: &dyn Perturbation,
    x_max: f64,
    grid: &[f64],
    opts: &TraceOptions,
) -> Result<Vec<PruferTrace>> {
    probes
        .par_iter()
        .map(|p| {
            let frame = FloquetFrame::new(v0, p.qe)?;
            probe_trace(&frame, p.xi, v, x_max, grid, opts)
        })
        .collect()
}

/// How far `ln R` and `ln sqrt(u^2 + u'^2/E)` (from a direct solve of the
/// second-order equation) drift apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    /// `max - min` of the difference over the tail window.
    pub oscillation: f64,
    /// Slope of the difference against `ln x` over the tail window.
    pub drift_slope: f64,
    pub tail_window: (f64, f64),
}

/// `ln sqrt(u^2 + u'^2/E)` (or `ln sqrt(u^2 + u'^2)` for `E <= 0`) of the
/// solution with `u(0) = cos xi`, `u'(0) = sin xi`.
pub fn direct_log_norm(
    v0: &PeriodicPotential,
    v: &dyn Perturbation,
    energy: f64,
    xi: f64,
    x_max: f64,
    grid: &[f64],
    opts: &TraceOptions,
) -> Result<Vec<f64>> {
    let field = |x: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = (v0.evaluate(x) + v.value(x) - energy) * y[0];
    };
    let mut breaks = v0.breakpoints_in(0.0, x_max);
    breaks.extend(v.jumps().into_iter().filter(|&t| t > 0.0 && t < x_max));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let ivp = IvpOptions::new(opts.rel_tol, opts.abs_tol * 1e-6).with_breakpoints(breaks);
    let sol = sample_ivp(field, 0.0, x_max, &[xi.cos(), xi.sin()], &ivp, grid)?;
    let scale = if energy > 0.0 { 1.0 / energy } else { 1.0 };
    Ok((0..grid.len())
        .map(|i| {
            let r = sol.row(i);
            0.5 * (r[0] * r[0] + r[1] * r[1] * scale).ln()
        })
        .collect())
}

pub fn norm_equivalence(x: &[f64], ln_r: &[f64], log_norm: &[f64], tail_from: f64) -> Result<NormEquivalence> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(ln_r.iter().zip(log_norm))
        .filter(|(&xx, _)| xx >= tail_from && xx > 0.0)
        .map(|(&xx, (&a, &b))| (xx.ln(), a - b))
        .collect();
    let fit = fit_line(&pts)?;
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    Ok(NormEquivalence {
        oscillation: hi - lo,
        drift_slope: fit.slope,
        tail_window: (tail_from, *x.last().unwrap()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::sampled::ZeroPerturbation;

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = (100..=200_000).map(|i| i as f64 * 0.01).collect();
        let l: Vec<f64> = x.iter().map(|t| -2.0 * t.ln()).collect();
        let r = decay_fit(1.0, 0.0, &x, &l, 0.5, 10.0, DEFAULT_VERDICT_MARGIN).unwrap();
        assert!((r.slope + 2.0).abs() < 1e-7 && r.rms_residual < 1e-7 && r.l2_verdict);
        let c = vec![0.3; x.len()];
        let r = decay_fit(1.0, 0.0, &x, &c, 0.5, 10.0, DEFAULT_VERDICT_MARGIN).unwrap();
        assert!(r.slope.abs() < 1e-12 && !r.l2_verdict);
    }

    #[test]
    fn short_tail_is_rejected() {
        let x = vec![0.0, 50.0, 100.0];
        let l = vec![0.0; 3];
        assert!(matches!(decay_fit(1.0, 0.0, &x, &l, 0.5, 50.0, 0.05), Err(Error::InsufficientTail(_))));
    }

    #[test]
    fn unperturbed_trace_follows_the_frame() {
        let v0 = PeriodicPotential::cosine(2.0).unwrap();
        let f = FloquetFrame::new(&v0, eigenvalue(&v0, 1.0, 2).unwrap()).unwrap();
        let grid = trace_grid(20.0, 0.5);
        let t = prufer_trace(&f, &ZeroPerturbation, 0.4, -0.2, 20.0, &grid, &TraceOptions::default()).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            assert!((t.theta[i] - 0.4 - f.eta(x)).abs() < 1e-8);
            assert_eq!(t.ln_r[i], -0.2);
        }
    }

    #[test]
    fn probes_avoid_targets() {
        let v0 = PeriodicPotential::zero();
        let p = default_probes(&v0, &[1.0], 10).unwrap();
        assert_eq!(p.len(), 10);
        for q in p {
            assert!((q.qe.k - 1.0).abs() >= 0.05 && (q.qe.k - (PI - 1.0)).abs() >= 0.05);
        }
    }
}
