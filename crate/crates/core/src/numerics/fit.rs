//! Ordinary least-squares straight-line fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateAbscissae);
    }
    let n = points.len() as f64;
    let mean_u = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_v = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut suu = 0.0;
    let mut suv = 0.0;
    for &(u, v) in points {
        suu += (u - mean_u) * (u - mean_u);
        suv += (u - mean_u) * (v - mean_v);
    }
    let spread = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    if !(suu > n * (f64::EPSILON * spread).powi(2)) {
        return Err(Error::DegenerateAbscissae);
    }
    let slope = suv / suu;
    let intercept = mean_v - slope * mean_u;
    let ss = points
        .iter()
        .map(|&(u, v)| (v - intercept - slope * u).powi(2))
        .sum::<f64>();
    Ok(LineFit { slope, intercept, rms_residual: (ss / n).sqrt() })
}
