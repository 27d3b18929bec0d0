//! The coupled Prüfer-angle system that defines the perturbation.
//!
//! For targets `j = 1..K` with frames `eta_j`,
//!
//! ```text
//! Theta_j' = eta_j' - V sin^2(Theta_j) / eta_j'
//! (ln R_j)' = V sin(2 Theta_j) / (2 eta_j')
//! V(x) = sum_j (-1)^{n_j} C_j sin(2 Theta_j) [x >= T_j] / (1 + x)
//! ```
//!
//! The angles are integrated as deviations `psi_j = Theta_j - eta_j`, which
//! stay bounded and are evaluated against the phase reduced modulo `2 pi`.

use serde::{Deserialize, Serialize};

use super::phase::initial_state;
use super::plan::SynthesisPlan;
use crate::error::{Error, Result};
use crate::floquet::FloquetFrame;
use crate::numerics::ode::{sample_ivp, IvpOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub x_max: f64,
    pub grid_step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { x_max: 1e4, grid_step: 0.05, rel_tol: 1e-8, abs_tol: 1e-10 }
    }
}

impl SynthOptions {
    pub fn new(x_max: f64, grid_step: f64) -> Self {
        SynthOptions { x_max, grid_step, ..Default::default() }
    }
}

/// Largest observed `lhs / rhs` of one recorded inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub target: Option<usize>,
    pub worst_ratio: f64,
    pub at: f64,
    pub holds: bool,
}

impl HypothesisCheck {
    fn new(name: &str, target: Option<usize>) -> Self {
        HypothesisCheck { name: name.into(), target, worst_ratio: 0.0, at: f64::NAN, holds: true }
    }

    fn observe(&mut self, x: f64, lhs: f64, rhs: f64) {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > self.worst_ratio || self.at.is_nan() {
            self.worst_ratio = self.worst_ratio.max(ratio);
            self.at = x;
        }
        // Relative rounding allowance for inequalities that are exact in
        // real arithmetic.
        self.holds = self.worst_ratio <= 1.0 + 1e-12;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruferTrajectory {
    /// Sample positions; each activation appears twice, carrying the left and
    /// right limits of `V`.
    pub grid: Vec<f64>,
    /// Unwrapped angles per target.
    pub theta: Vec<Vec<f64>>,
    /// `theta - eta` per target.
    pub deviation: Vec<Vec<f64>>,
    pub ln_r: Vec<Vec<f64>>,
    pub potential: Vec<f64>,
    pub activations: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub signs: Vec<f64>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub accepted_steps: usize,
}

impl PruferTrajectory {
    pub fn targets(&self) -> usize {
        self.theta.len()
    }

    pub fn x_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Index of the last grid point at or below `x`.
    fn locate(&self, x: f64) -> usize {
        self.grid.partition_point(|&g| g <= x).saturating_sub(1).min(self.grid.len() - 2)
    }

    /// `theta_j(x)` reduced modulo `2 pi` up to the smooth deviation, using the
    /// frame for the fast part.
    pub fn reduced_angle(&self, j: usize, frame: &FloquetFrame, x: f64) -> f64 {
        let i = self.locate(x);
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let d = &self.deviation[j];
        let dev = if b > a { d[i] + (x - a) / (b - a) * (d[i + 1] - d[i]) } else { d[i + 1] };
        dev + frame.rate_and_phase(x).1
    }

    /// `ln R_j` linearly interpolated.
    pub fn ln_r_at(&self, j: usize, x: f64) -> f64 {
        let i = self.locate(x);
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let l = &self.ln_r[j];
        if b > a {
            l[i] + (x - a) / (b - a) * (l[i + 1] - l[i])
        } else {
            l[i + 1]
        }
    }

    /// `V(x)` rebuilt from the stored angles; unlike the samples in
    /// `potential` this resolves phases faster than the grid.
    pub fn potential_at(&self, frames: &[&FloquetFrame], x: f64) -> f64 {
        let mut v = 0.0;
        for (j, f) in frames.iter().enumerate() {
            if x >= self.activations[j] {
                v += self.signs[j] * self.amplitudes[j] * (2.0 * self.reduced_angle(j, f, x)).sin();
            }
        }
        v / (1.0 + x)
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }
}

/// Uniform grid on `[0, x_max]` with each activation inserted twice.
pub(crate) fn sample_grid(x_max: f64, step: f64, activations: &[f64]) -> Vec<f64> {
    let n = (x_max / step).ceil() as usize;
    let mut grid: Vec<f64> = (0..n).map(|i| i as f64 * step).filter(|&x| x < x_max).collect();
    grid.push(x_max);
    for &t in activations {
        if t > 0.0 && t < x_max {
            grid.retain(|&g| g != t);
            grid.push(t);
            grid.push(t);
        }
    }
    grid.sort_by(|a, b| a.total_cmp(b));
    grid
}

/// Solve the coupled system from the target frames (`frames[j]` at the
/// target's own energy) and sample it on a grid.
pub fn synthesize(plan: &SynthesisPlan, frames: &[&FloquetFrame], opts: &SynthOptions) -> Result<PruferTrajectory> {
    let k = plan.len();
    if k == 0 || frames.len() != k {
        return Err(Error::Plan(format!("{} planned targets but {} frames", k, frames.len())));
    }
    for (j, (t, f)) in plan.targets.iter().zip(frames).enumerate() {
        if f.qe().n != t.qe.n || (f.energy() - t.qe.energy).abs() > 1e-9 * (1.0 + t.qe.energy.abs()) {
            return Err(Error::Plan(format!("frame {j} does not match planned target {j}")));
        }
    }
    let activations = plan.activations();
    let last = activations[k - 1];
    if !(opts.x_max > last) {
        return Err(Error::InvalidArgument(format!("x_max = {} must exceed the last activation {last}", opts.x_max)));
    }
    if !(opts.grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {}", opts.grid_step)));
    }
    let amps = plan.amplitudes();
    let signs: Vec<f64> = plan.targets.iter().map(|t| t.sign).collect();
    let init: Vec<_> = plan.targets.iter().zip(frames).map(|(t, f)| initial_state(f, t.xi)).collect();
    let mut y0 = vec![0.0; 2 * k];
    for j in 0..k {
        y0[j] = init[j].theta;
        y0[k + j] = init[j].ln_r;
    }

    let grid = sample_grid(opts.x_max, opts.grid_step, &activations);
    let first = activations[0];
    let start = grid.partition_point(|&g| g < first);

    let mut rates = vec![0.0; k];
    let mut sin2 = vec![0.0; k];
    let mut sinsq = vec![0.0; k];
    let field = |x: f64, y: &[f64], dy: &mut [f64]| {
        let mut v = 0.0;
        for j in 0..k {
            let (rate, phase) = frames[j].rate_and_phase(x);
            let (s, c) = (y[j] + phase).sin_cos();
            rates[j] = rate;
            sin2[j] = 2.0 * s * c;
            sinsq[j] = s * s;
            if x >= activations[j] {
                v += signs[j] * amps[j] * sin2[j];
            }
        }
        v /= 1.0 + x;
        for j in 0..k {
            dy[j] = -v * sinsq[j] / rates[j];
            dy[k + j] = v * sin2[j] / (2.0 * rates[j]);
        }
    };
    let ivp = IvpOptions::new(opts.rel_tol, opts.abs_tol).with_breakpoints(activations[1..].to_vec());
    let sol = sample_ivp(field, first, opts.x_max, &y0, &ivp, &grid[start..])?;

    let n = grid.len();
    let mut theta = vec![vec![0.0; n]; k];
    let mut deviation = vec![vec![0.0; n]; k];
    let mut ln_r = vec![vec![0.0; n]; k];
    let mut potential = vec![0.0; n];
    for i in 0..n {
        let x = grid[i];
        let state: &[f64] = if i < start { &y0 } else { sol.row(i - start) };
        // The first copy of a duplicated activation carries the left limit.
        let left = i + 1 < n && grid[i + 1] == x;
        let mut v = 0.0;
        for j in 0..k {
            let (_, phase) = frames[j].rate_and_phase(x);
            let active = if left { x > activations[j] } else { x >= activations[j] };
            if active {
                v += signs[j] * amps[j] * (2.0 * (state[j] + phase)).sin();
            }
            deviation[j][i] = state[j];
            theta[j][i] = state[j] + frames[j].eta(x);
            ln_r[j][i] = state[k + j];
        }
        potential[i] = v / (1.0 + x);
    }

    let hypotheses = record_hypotheses(plan, frames, &grid, &potential);
    Ok(PruferTrajectory {
        grid,
        theta,
        deviation,
        ln_r,
        potential,
        activations,
        amplitudes: amps,
        signs,
        hypotheses,
        accepted_steps: sol.stats.accepted,
    })
}

fn record_hypotheses(plan: &SynthesisPlan, frames: &[&FloquetFrame], grid: &[f64], potential: &[f64]) -> Vec<HypothesisCheck> {
    let k = plan.len();
    let first = plan.targets[0].activation;
    let mut envelope = HypothesisCheck::new("envelope", None);
    let mut growth = plan.growth.as_ref().map(|_| HypothesisCheck::new("growth", None));
    // Only meaningful when some non-resonant pair exists.
    let mut nonres: Vec<Option<HypothesisCheck>> = plan
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| t.alpha.map(|_| HypothesisCheck::new("non_resonant_smallness", Some(j))))
        .collect();
    let mut same: Vec<Option<HypothesisCheck>> = plan
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| t.epsilon.map(|_| HypothesisCheck::new("same_band_smallness", Some(j))))
        .collect();
    let mut cross: Vec<Option<HypothesisCheck>> = plan
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| (t.class == crate::targets::TargetClass::S3).then(|| HypothesisCheck::new("cross_band_smallness", Some(j))))
        .collect();

    for (i, (&x, &v)) in grid.iter().zip(potential).enumerate() {
        let left = i + 1 < grid.len() && grid[i + 1] == x;
        let active: f64 = plan
            .targets
            .iter()
            .filter(|t| if left { x > t.activation } else { x >= t.activation })
            .map(|t| t.amplitude)
            .sum();
        envelope.observe(x, v.abs() * (1.0 + x), active);
        if let (Some(g), Some(h)) = (growth.as_mut(), plan.growth.as_ref()) {
            if x > first {
                g.observe(x, v.abs() * (1.0 + x), h.eval(x));
            }
        }
        for j in 0..k {
            let t = &plan.targets[j];
            if x < t.activation || x <= 0.0 {
                continue;
            }
            let ratio = v.abs() / frames[j].rate_and_phase(x).0.abs();
            if let Some(c) = nonres[j].as_mut() {
                c.observe(x, ratio, 1.0 / (8.0 * x.powf(2.0 / 3.0)));
            }
            if let (Some(c), Some(e)) = (same[j].as_mut(), t.epsilon) {
                c.observe(x, ratio, e / 2.0);
            }
            if let Some(c) = cross[j].as_mut() {
                c.observe(x, ratio, t.big_delta / 2.0);
            }
        }
    }
    let mut out = vec![envelope];
    out.extend(growth);
    out.extend(nonres.into_iter().flatten());
    out.extend(same.into_iter().flatten());
    out.extend(cross.into_iter().flatten());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_duplicates_activations() {
        let g = sample_grid(1.0, 0.25, &[0.5, 0.6]);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.5, 0.6, 0.6, 0.75, 1.0]);
    }

    #[test]
    fn grid_ends_at_x_max() {
        let g = sample_grid(1.05, 0.5, &[]);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.05]);
    }
}
