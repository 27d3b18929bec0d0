//! Band edges and quasimomentum eigenvalues.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::asymptotics::{asymptotic_anchor, eigenvalue_threshold};
use super::fundamental::{discriminant, discriminant_with_slope, monodromy};
use super::potential::PeriodicPotential;
use crate::error::{Error, Result};
use crate::numerics::root::{brent, find_root_bracketed};

/// Default exclusion zone around the quasimomentum endpoints 0 and pi.
pub const K_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Decreasing,
    Increasing,
}

impl Direction {
    pub fn of_band(n: usize) -> Self {
        if n % 2 == 1 {
            Direction::Decreasing
        } else {
            Direction::Increasing
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub direction: Direction,
}

impl Band {
    pub fn contains(&self, energy: f64) -> bool {
        energy > self.lower && energy < self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiEigenvalue {
    pub k: f64,
    pub n: usize,
    #[serde(rename = "E")]
    pub energy: f64,
}

fn energy_tol(e: f64) -> f64 {
    4.0 * f64::EPSILON * (1.0 + e.abs())
}

/// Lower edge of the first band: the smallest `E` with `D(E) = 2`.
fn bottom_edge(v0: &PeriodicPotential) -> Result<f64> {
    let f = |e: f64| discriminant(v0, e).map(|d| d - 2.0);
    let lo = v0.lower_bound() - 1.0;
    let f_lo = f(lo)?;
    // The ground state of the periodic problem lies below the mean of V0.
    let top = v0.mean() + 1e-9 * (1.0 + v0.mean().abs());
    let steps = 64;
    let mut prev = (lo, f_lo);
    for i in 1..=steps {
        let e = lo + (top - lo) * i as f64 / steps as f64;
        let v = f(e)?;
        if v <= 0.0 {
            return brent(|x| f(x).unwrap_or(f64::NAN), prev.0, e, prev.1, v, energy_tol(e));
        }
        prev = (e, v);
    }
    Err(Error::BandNotFound { band: 1, ceiling: top })
}

/// Edges of the `m`-th gap (between bands `m` and `m + 1`); equal when the
/// gap is closed.
fn gap_edges(v0: &PeriodicPotential, m: usize) -> Result<(f64, f64)> {
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let free = (m as f64 * PI).powi(2);
    // Gap edges are periodic/antiperiodic eigenvalues, shifted from the free
    // value by at most the range of V0.
    let lo = free + v0.lower_bound() - 1.0;
    let hi = free + v0.upper_bound() + 1.0;
    let slope = |e: f64| discriminant_with_slope(v0, e).map(|(_, s)| sign * s);
    let (s_lo, s_hi) = (slope(lo)?, slope(hi)?);
    if !(s_lo > 0.0 && s_hi < 0.0) {
        return Err(Error::BandNotFound { band: m + 1, ceiling: hi });
    }
    let peak = brent(|e| slope(e).unwrap_or(f64::NAN), lo, hi, s_lo, s_hi, energy_tol(free))?;
    // sign D - 2 written as (D^2 - 4) / (sign D + 2) with
    // D^2 - 4 = (C - S')^2 + 4 S C': every term is small near a narrow gap,
    // so the edges keep their relative accuracy.
    let g = |e: f64| {
        monodromy(v0, e).map(|m| {
            let d2 = (m.c - m.ds).powi(2) + 4.0 * m.s * m.dc;
            d2 / (sign * m.discriminant() + 2.0)
        })
    };
    let g_peak = g(peak)?;
    if g_peak <= 0.0 {
        return Ok((peak, peak));
    }
    let left = brent(|e| g(e).unwrap_or(f64::NAN), lo, peak, g(lo)?, g_peak, energy_tol(peak))?;
    let right = brent(|e| g(e).unwrap_or(f64::NAN), peak, hi, g_peak, g(hi)?, energy_tol(peak))?;
    Ok((left, right))
}

/// Edges of band `n` (1-based).
pub fn band(v0: &PeriodicPotential, n: usize) -> Result<Band> {
    if n == 0 {
        return Err(Error::InvalidArgument("band indices start at 1".into()));
    }
    let lower = if n == 1 { bottom_edge(v0)? } else { gap_edges(v0, n - 1)?.1 };
    let upper = gap_edges(v0, n)?.0;
    Ok(Band { n, lower, upper, direction: Direction::of_band(n) })
}

/// The first `n_max` bands.
pub fn band_structure(v0: &PeriodicPotential, n_max: usize) -> Result<Vec<Band>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let bottom = bottom_edge(v0)?;
    let gaps: Vec<(f64, f64)> = (1..=n_max).into_par_iter().map(|m| gap_edges(v0, m)).collect::<Result<_>>()?;
    Ok((1..=n_max)
        .map(|n| Band {
            n,
            lower: if n == 1 { bottom } else { gaps[n - 2].1 },
            upper: gaps[n - 1].0,
            direction: Direction::of_band(n),
        })
        .collect())
}

/// The energy in band `n` with `D(E) = 2 cos k`.
pub fn eigenvalue(v0: &PeriodicPotential, k: f64, n: usize) -> Result<QuasiEigenvalue> {
    eigenvalue_with_margin(v0, k, n, K_MIN)
}

pub fn eigenvalue_with_margin(v0: &PeriodicPotential, k: f64, n: usize, k_min: f64) -> Result<QuasiEigenvalue> {
    if !(k > k_min && k < PI - k_min) {
        return Err(Error::QuasimomentumOutOfRange { k, k_min });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("band indices start at 1".into()));
    }
    let level = 2.0 * k.cos();
    // Oriented so the function is positive at the lower end of the band.
    let orient = if n % 2 == 1 { 1.0 } else { -1.0 };
    let f = |e: f64| discriminant(v0, e).map(|d| orient * (d - level));

    let a_norm = v0.l1_norm();
    if (n as f64) > eigenvalue_threshold(a_norm, k) {
        // High bands: the root sits within delta_n of the free anchor, which
        // gives a tight bracket; confirm it by the sign change.
        let (a, delta) = asymptotic_anchor(a_norm, k, n);
        let w = 1.5 * delta + 1e-9 * a;
        if a - w > 0.0 {
            let (lo, hi) = ((a - w).powi(2), (a + w).powi(2));
            let (f_lo, f_hi) = (f(lo)?, f(hi)?);
            if f_lo > 0.0 && f_hi < 0.0 {
                let energy = brent(|e| f(e).unwrap_or(f64::NAN), lo, hi, f_lo, f_hi, energy_tol(hi))?;
                return Ok(QuasiEigenvalue { k, n, energy });
            }
        }
    }
    let b = band(v0, n)?;
    let energy = find_root_bracketed(|e| f(e).unwrap_or(f64::NAN), b.lower, b.upper, energy_tol(b.upper))?;
    Ok(QuasiEigenvalue { k, n, energy })
}

/// Quasimomentum `arccos(D(E)/2)` of an energy inside a band.
pub fn quasimomentum(v0: &PeriodicPotential, energy: f64) -> Result<f64> {
    let d = discriminant(v0, energy)?;
    Ok((0.5 * d).clamp(-1.0, 1.0).acos())
}
