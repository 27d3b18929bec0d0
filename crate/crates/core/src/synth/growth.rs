//! Envelope functions `h` bounding `|V(x)| (1 + x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Growth {
    /// `c ln(2 + x)`.
    Log { c: f64 },
    /// `c x^p` with `0 < p < 1`.
    Power { c: f64, p: f64 },
    /// Linear interpolation through `(x, h)`, constant beyond the last knot.
    Table { x: Vec<f64>, h: Vec<f64> },
}

impl Growth {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            Growth::Log { c } if !(*c > 0.0) => bad(format!("log growth needs c > 0, got {c}")),
            Growth::Power { c, p } if !(*c > 0.0 && *p > 0.0 && *p < 1.0) => {
                bad(format!("power growth needs c > 0 and 0 < p < 1, got c {c}, p {p}"))
            }
            Growth::Table { x, h } => {
                if x.len() != h.len() || x.len() < 2 {
                    return bad("growth table needs matching x and h columns with at least two rows".into());
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) || x[0] < 0.0 {
                    return bad("growth table positions must be nonnegative and strictly increasing".into());
                }
                if h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return bad("growth table values must be positive".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Growth::Log { c } => c * (2.0 + x).ln(),
            Growth::Power { c, p } => c * x.max(0.0).powf(*p),
            Growth::Table { x: xs, h } => {
                if x <= xs[0] {
                    return h[0];
                }
                let i = xs.partition_point(|&t| t <= x);
                if i >= xs.len() {
                    return h[h.len() - 1];
                }
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                h[i - 1] + t * (h[i] - h[i - 1])
            }
        }
    }

    /// `inf { x >= 0 : h(t) > level for all t > x }`.
    pub fn threshold(&self, level: f64) -> Result<f64> {
        let never = || Error::Plan(format!("the envelope h never stays above {level}"));
        let x = match self {
            Growth::Log { c } => ((level / c).exp() - 2.0).max(0.0),
            Growth::Power { c, p } => {
                if level < 0.0 {
                    0.0
                } else {
                    (level / c).powf(1.0 / p)
                }
            }
            Growth::Table { x: xs, h } => {
                if h[h.len() - 1] <= level {
                    return Err(never());
                }
                // Last knot at or below the level; the crossing lies in the
                // segment that follows it.
                match (0..h.len()).rev().find(|&i| h[i] <= level) {
                    None => 0.0,
                    Some(i) => {
                        let t = (level - h[i]) / (h[i + 1] - h[i]);
                        xs[i] + t * (xs[i + 1] - xs[i])
                    }
                }
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(never())
        }
    }
}
