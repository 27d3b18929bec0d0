//! Amplitudes and activation positions of the perturbation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::constants::periodic_constant;
use super::growth::Growth;
use crate::error::{Error, Result};
use crate::floquet::{lk_thresholds, FloquetFrame, QuasiEigenvalue};
use crate::targets::{is_half_turn, TargetClass, TargetSpectrum, K_CLASS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The printed constants: `C_j = 400 A_j` (or `400 A_j / eps_j`) and
    /// activations above every printed lower bound.
    PaperFaithful,
    /// Amplitudes sized for a chosen decay rate and evenly spaced activations.
    #[default]
    Practical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub mode: Mode,
    /// Practical mode: predicted decay exponent of each target, so that
    /// `ln R_j ~ -scale ln x`.
    pub scale: f64,
    /// Practical mode: minimum gap between consecutive activations.
    pub spacing: f64,
    /// Practical mode: per-target amplitude overrides.
    pub amplitudes: Vec<Option<f64>>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { mode: Mode::Practical, scale: 1.0, spacing: 50.0, amplitudes: Vec::new() }
    }
}

impl PlanOptions {
    pub fn paper() -> Self {
        PlanOptions { mode: Mode::PaperFaithful, ..Default::default() }
    }

    pub fn practical(scale: f64, spacing: f64) -> Self {
        PlanOptions { mode: Mode::Practical, scale, spacing, amplitudes: Vec::new() }
    }

    pub fn with_amplitudes(mut self, amplitudes: Vec<Option<f64>>) -> Self {
        self.amplitudes = amplitudes;
        self
    }
}

/// One term of the activation lower bound; `None` when the term is void.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub name: String,
    pub formula: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTarget {
    pub qe: QuasiEigenvalue,
    pub xi: f64,
    pub class: TargetClass,
    /// `(-1)^n`.
    pub sign: f64,
    /// Largest `|eta'|` over the frames at `k` and `pi - k`.
    pub rate_max: f64,
    /// Smallest `|eta'|` over the same frames.
    pub rate_min: f64,
    /// `∫_0^1 1/|eta'|` at the target's own energy.
    pub inverse_rate_mean: f64,
    pub amplitude: f64,
    pub epsilon: Option<f64>,
    /// Smallness scale `delta(k)` of the phase-rate bounds.
    pub big_delta: f64,
    /// Non-resonance separation among targets `1..=j`; `None` when no
    /// non-resonant pair exists.
    pub alpha: Option<f64>,
    pub x_threshold: f64,
    pub activation: f64,
    pub lower_bounds: Vec<LowerBound>,
}

impl PlannedTarget {
    /// Decay exponent predicted by averaging the self-interaction term.
    pub fn predicted_slope(&self) -> f64 {
        -self.amplitude * self.inverse_rate_mean / 4.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPlan {
    pub mode: Mode,
    pub targets: Vec<PlannedTarget>,
    pub growth: Option<Growth>,
    pub notes: Vec<String>,
}

fn strictly_above(m: f64) -> f64 {
    m + (m.abs() * 1e-12).max(1.0)
}

/// `min{d_j, e_j, f_j}` over the first `ks.len()` quasimomenta.
pub fn separation(ks: &[f64]) -> Option<f64> {
    let mut best = f64::INFINITY;
    for (i, &ki) in ks.iter().enumerate() {
        if !is_half_turn(ki) {
            best = best.min(4.0 * ki).min(4.0 * PI - 4.0 * ki);
        }
        for &kl in &ks[i..] {
            if (ki - kl).abs() >= K_CLASS_TOL {
                best = best.min(2.0 * (ki - kl).abs());
            }
            if (ki + kl - PI).abs() >= K_CLASS_TOL {
                best = best.min(2.0 * (ki + kl - PI).abs());
            }
        }
    }
    best.is_finite().then_some(best)
}

/// Constants for every target.  `frames[j]` holds the frames at `k_j` and at
/// `pi - k_j` in band `n_j`.
pub fn plan_constants(
    spectrum: &TargetSpectrum,
    frames: &[(FloquetFrame, FloquetFrame)],
    growth: Option<&Growth>,
    opts: &PlanOptions,
) -> Result<SynthesisPlan> {
    if spectrum.is_empty() {
        return Err(Error::Plan("empty target spectrum".into()));
    }
    if frames.len() != spectrum.len() {
        return Err(Error::Plan(format!("{} targets but {} frame pairs", spectrum.len(), frames.len())));
    }
    if let Some(g) = growth {
        g.validate()?;
    }
    if opts.mode == Mode::Practical && !(opts.scale >= 0.0 && opts.spacing > 0.0) {
        return Err(Error::Plan(format!("practical mode needs scale >= 0 and spacing > 0, got {} and {}", opts.scale, opts.spacing)));
    }
    let mut notes = Vec::new();
    let mut targets: Vec<PlannedTarget> = Vec::with_capacity(spectrum.len());
    let mut prev_activation = 0.0;
    let mut amp_sum = 0.0;
    let mut inv_rate_min_sum = 0.0;
    let mut resonance_sum = 0.0;

    for (j, (t, (own, mirror))) in spectrum.targets.iter().zip(frames).enumerate() {
        if (own.energy() - t.qe.energy).abs() > 1e-9 * (1.0 + t.qe.energy.abs()) || own.qe().n != t.qe.n {
            return Err(Error::Plan(format!("frame {j} does not belong to target {j}")));
        }
        if mirror.qe().n != t.qe.n || (mirror.qe().k + t.qe.k - PI).abs() > K_CLASS_TOL {
            return Err(Error::Plan(format!("mirror frame {j} is not at pi - k in band {}", t.qe.n)));
        }
        let rate_max = own.eta_max().max(mirror.eta_max());
        let rate_min = own.eta_min().min(mirror.eta_min());
        let big_delta = lk_thresholds(spectrum.a_norm, t.qe.k).big_delta;
        let eps_path = t.class == TargetClass::S2 || (t.class == TargetClass::S1 && is_half_turn(t.qe.k));
        let epsilon = if eps_path {
            Some(t.epsilon.ok_or_else(|| Error::Plan(format!("target {j} needs a resonance constant")))?)
        } else {
            t.epsilon
        };
        let amplitude = match opts.mode {
            Mode::PaperFaithful => match (eps_path, epsilon) {
                (true, Some(e)) => 400.0 * rate_max / e,
                _ => 400.0 * rate_max,
            },
            Mode::Practical => match opts.amplitudes.get(j).copied().flatten() {
                Some(c) => c,
                None => {
                    // The window integral of a resonant target guarantees
                    // only a fraction 2 eps of the non-resonant decay.
                    let weight = if eps_path { 2.0 * epsilon.unwrap_or(0.5) } else { 1.0 };
                    opts.scale * 4.0 / (own.inverse_rate_mean() * weight.min(1.0))
                }
            },
        };
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Plan(format!("target {j}: amplitude {amplitude} is not a finite nonnegative number")));
        }
        amp_sum += amplitude;
        inv_rate_min_sum += 1.0 / rate_min;
        if let Some(e) = epsilon.filter(|_| eps_path) {
            resonance_sum += 2.0 / (rate_min * e);
        }
        if t.class == TargetClass::S3 {
            resonance_sum += 2.0 / (rate_min * big_delta);
        }
        let ks: Vec<f64> = spectrum.targets[..=j].iter().map(|t| t.qe.k).collect();
        let alpha = separation(&ks);
        let x_threshold = match growth {
            Some(g) => g.threshold(10.0 * amp_sum)?,
            None => 0.0,
        };

        let (activation, lower_bounds) = match opts.mode {
            Mode::Practical => (prev_activation + opts.spacing.max(x_threshold), Vec::new()),
            Mode::PaperFaithful => {
                let pow10 = 10f64.powi(j as i32 + 1);
                let bounds = vec![
                    LowerBound {
                        name: "envelope".into(),
                        formula: "x_j + T_{j-1}".into(),
                        value: Some(x_threshold + prev_activation),
                    },
                    LowerBound {
                        name: "smallness".into(),
                        formula: "(8 (1 + sum_i 1/B_i) sum_l C_l)^3".into(),
                        value: Some((8.0 * (1.0 + inv_rate_min_sum) * amp_sum).powi(3)),
                    },
                    LowerBound {
                        name: "resonance".into(),
                        formula: "sum_i (2/(B_i eps_i) + 2/(B_i delta(k_i))) sum_l C_l".into(),
                        value: Some(resonance_sum * amp_sum),
                    },
                    LowerBound {
                        name: "separation".into(),
                        formula: "r(alpha_j) + (10^j r(alpha_j) sum_i C_i)^(3/2)".into(),
                        value: alpha.map(|a| {
                            let r = periodic_constant(a);
                            r + (pow10 * r * amp_sum).powf(1.5)
                        }),
                    },
                    LowerBound {
                        name: "summability".into(),
                        formula: "10^j (n_j + sum_l C_l)".into(),
                        value: Some(pow10 * (t.qe.n as f64 + amp_sum)),
                    },
                ];
                let m = bounds.iter().filter_map(|b| b.value).fold(f64::NEG_INFINITY, f64::max);
                if !m.is_finite() {
                    return Err(Error::Plan(format!("target {j}: activation lower bound is not finite")));
                }
                (strictly_above(m), bounds)
            }
        };
        if alpha.is_none() && j + 1 == spectrum.len() {
            notes.push("no non-resonant pair among the targets: separation terms are void".into());
        }
        if let Some(p) = t.partner {
            notes.push(format!("target {j}: same-band partner {p} inferred from the target list"));
        }
        prev_activation = activation;
        targets.push(PlannedTarget {
            qe: t.qe,
            xi: t.xi,
            class: t.class,
            sign: if t.qe.n % 2 == 0 { 1.0 } else { -1.0 },
            rate_max,
            rate_min,
            inverse_rate_mean: own.inverse_rate_mean(),
            amplitude,
            epsilon,
            big_delta,
            alpha,
            x_threshold,
            activation,
            lower_bounds,
        });
    }
    let plan = SynthesisPlan { mode: opts.mode, targets, growth: growth.cloned(), notes };
    plan.validate()?;
    Ok(plan)
}

impl SynthesisPlan {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn activations(&self) -> Vec<f64> {
        self.targets.iter().map(|t| t.activation).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.targets.iter().map(|t| t.amplitude).collect()
    }

    /// `sum_{T_j <= x} C_j`.
    pub fn active_amplitude(&self, x: f64) -> f64 {
        self.targets.iter().filter(|t| t.activation <= x).map(|t| t.amplitude).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (j, t) in self.targets.iter().enumerate() {
            if !(t.activation.is_finite() && t.activation > 0.0) {
                return Err(Error::Plan(format!("target {j}: activation {} must be positive", t.activation)));
            }
            if j > 0 && !(t.activation > self.targets[j - 1].activation) {
                return Err(Error::Plan(format!("activations must increase strictly (target {j})")));
            }
            if self.mode == Mode::PaperFaithful {
                if !(t.amplitude > 0.0) {
                    return Err(Error::Plan(format!("target {j}: amplitude must be positive")));
                }
                if let Some(b) = t.lower_bounds.iter().find(|b| b.value.is_some_and(|v| !(t.activation > v))) {
                    return Err(Error::Plan(format!("target {j}: activation does not exceed the {} bound", b.name)));
                }
                if t.lower_bounds.len() != 5 {
                    return Err(Error::Plan(format!("target {j}: expected five activation lower bounds")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_sets() {
        assert_eq!(separation(&[PI / 2.0]), None);
        // d = {4, 4 pi - 4}, f includes 2 |2k - pi|.
        let a = separation(&[1.0]).unwrap();
        assert!((a - (2.0 * (PI - 2.0)).min(4.0)).abs() < 1e-12);
        let a = separation(&[1.0, 1.2]).unwrap();
        assert!((a - 0.4).abs() < 1e-12);
        // A same-band pair alone still has the d and f terms of each member.
        let a = separation(&[1.0, PI - 1.0]).unwrap();
        assert!((a - 2.0 * (PI - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn strict_bound() {
        assert!(strictly_above(5.0) > 5.0);
        assert!(strictly_above(1e20) > 1e20);
    }
}
