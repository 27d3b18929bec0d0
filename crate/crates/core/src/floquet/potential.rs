//! One-periodic background potentials.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::integrate_with_breaks;

/// Closed-form description of `V0` on one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `constant + sum_m cos[m-1] cos(2 pi m x) + sin[m-1] sin(2 pi m x)`.
    Fourier {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Polynomial pieces: on `[breaks[i], breaks[i+1])` the value is
    /// `sum_p polys[i][p] (x - breaks[i])^p`.  `breaks[0]` must be 0.
    Piecewise {
        breaks: Vec<f64>,
        polys: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct PeriodicPotential {
    profile: Profile,
    breaks: Vec<f64>,
    l1_norm: f64,
    mean: f64,
    lower: f64,
    upper: f64,
}

impl PeriodicPotential {
    pub fn new(profile: Profile) -> Result<Self> {
        let breaks = match &profile {
            Profile::Piecewise { breaks, polys } => {
                if breaks.is_empty() || breaks[0] != 0.0 {
                    return Err(Error::InvalidArgument("piecewise breaks must start at 0".into()));
                }
                if breaks.len() != polys.len() {
                    return Err(Error::InvalidArgument(format!(
                        "piecewise potential has {} breaks but {} polynomials",
                        breaks.len(),
                        polys.len()
                    )));
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.iter().any(|&b| !(0.0..1.0).contains(&b)) {
                    return Err(Error::InvalidArgument("piecewise breaks must increase within [0, 1)".into()));
                }
                if polys.iter().any(|p| p.is_empty()) {
                    return Err(Error::InvalidArgument("empty polynomial piece".into()));
                }
                breaks.clone()
            }
            _ => Vec::new(),
        };
        let finite = match &profile {
            Profile::Zero => true,
            Profile::Constant { value } => value.is_finite(),
            Profile::Fourier { constant, cos, sin } => {
                constant.is_finite() && cos.iter().chain(sin).all(|c| c.is_finite())
            }
            Profile::Piecewise { polys, .. } => polys.iter().flatten().all(|c| c.is_finite()),
        };
        if !finite {
            return Err(Error::InvalidArgument("potential coefficients must be finite".into()));
        }
        let mut v = PeriodicPotential { profile, breaks, l1_norm: 0.0, mean: 0.0, lower: 0.0, upper: 0.0 };
        v.summarize()?;
        Ok(v)
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero).expect("zero potential")
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(Profile::Constant { value })
    }

    /// `amplitude * cos(2 pi x)`.
    pub fn cosine(amplitude: f64) -> Result<Self> {
        Self::new(Profile::Fourier { constant: 0.0, cos: vec![amplitude], sin: Vec::new() })
    }

    pub fn fourier(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(Profile::Fourier { constant, cos, sin })
    }

    pub fn piecewise(breaks: Vec<f64>, polys: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Profile::Piecewise { breaks, polys })
    }

    fn summarize(&mut self) -> Result<()> {
        let inner: Vec<f64> = self.breaks.iter().copied().filter(|&b| b > 0.0).collect();
        let this = &*self;
        let l1 = integrate_with_breaks(|x| this.eval_in_period(x).abs(), 0.0, 1.0, &inner, 1e-13, 20_000)?;
        let mean = integrate_with_breaks(|x| this.eval_in_period(x), 0.0, 1.0, &inner, 1e-13, 20_000)?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let samples = 8192;
        let mut probe = |x: f64| {
            let v = this.eval_in_period(x);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        for i in 0..samples {
            probe(i as f64 / samples as f64);
        }
        for &b in &this.breaks {
            probe(b);
            if b > 0.0 {
                probe(crate::numerics::ode::float_below(b));
            }
        }
        probe(crate::numerics::ode::float_below(1.0));
        let fourier_bound = match &this.profile {
            Profile::Fourier { constant, cos, sin } => {
                let s: f64 = cos.iter().chain(sin).map(|c| c.abs()).sum();
                Some((constant - s, constant + s))
            }
            _ => None,
        };
        // Sampling can miss a narrow extremum by a hair; pad accordingly.
        let pad = 1e-3 * (hi - lo);
        let (mut lower, mut upper) = (lo - pad, hi + pad);
        if let Some((flo, fhi)) = fourier_bound {
            lower = lower.max(flo);
            upper = upper.min(fhi);
        }
        self.l1_norm = l1.value;
        self.mean = mean.value;
        self.lower = lower.min(lo);
        self.upper = upper.max(hi);
        Ok(())
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `A = ∫_0^1 |V0|`.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Lower bound on `V0` (exact up to a small padding).
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn is_zero(&self) -> bool {
        match &self.profile {
            Profile::Zero => true,
            Profile::Constant { value } => *value == 0.0,
            Profile::Fourier { constant, cos, sin } => {
                *constant == 0.0 && cos.iter().chain(sin).all(|c| *c == 0.0)
            }
            Profile::Piecewise { polys, .. } => polys.iter().flatten().all(|c| *c == 0.0),
        }
    }

    /// Discontinuity positions within one period, in `[0, 1)`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// All breakpoint positions in the open interval `(a, b)`.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        if self.breaks.is_empty() || !(b > a) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut period = a.floor();
        while period < b {
            for &br in &self.breaks {
                let x = period + br;
                if x > a && x < b {
                    out.push(x);
                }
            }
            period += 1.0;
        }
        out
    }

    fn eval_in_period(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Fourier { constant, cos, sin } => {
                let mut v = *constant;
                for (m, c) in cos.iter().enumerate() {
                    v += c * (TAU * (m + 1) as f64 * t).cos();
                }
                for (m, s) in sin.iter().enumerate() {
                    v += s * (TAU * (m + 1) as f64 * t).sin();
                }
                v
            }
            Profile::Piecewise { breaks, polys } => {
                let i = breaks.partition_point(|&b| b <= t).max(1) - 1;
                let u = t - breaks[i];
                polys[i].iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
        }
    }

    /// `V0(x)`, extended periodically; at a jump the right limit is returned.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut t = x - x.floor();
        if t >= 1.0 {
            t = 0.0;
        }
        self.eval_in_period(t)
    }

    /// `V0` just left of `x` (differs from [`Self::evaluate`] only at jumps).
    pub fn evaluate_left(&self, x: f64) -> f64 {
        if self.breaks.is_empty() {
            return self.evaluate(x);
        }
        self.evaluate(crate::numerics::ode::float_below(x))
    }
}
