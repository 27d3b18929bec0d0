//! Fundamental solutions `C`, `S` of `-u'' + V0 u = E u` and the discriminant.

use serde::{Deserialize, Serialize};

use super::potential::PeriodicPotential;
use crate::error::Result;
use crate::numerics::ode::{integrate_ivp, DenseTrajectory, IvpOptions, Solver};

pub(crate) const PERIOD_RTOL: f64 = 1e-12;
pub(crate) const PERIOD_ATOL: f64 = 1e-14;

pub(crate) fn period_options(v0: &PeriodicPotential, x_end: f64) -> IvpOptions {
    IvpOptions::new(PERIOD_RTOL, PERIOD_ATOL).with_breakpoints(v0.breakpoints_in(0.0, x_end))
}

/// Scale `kappa = max(1, sqrt|E|)` that brings `C'` and `S` to the size of
/// `C` and `S'`.
pub(crate) fn pair_scale(energy: f64) -> f64 {
    energy.abs().sqrt().max(1.0)
}

/// Scaled state `[C, C'/kappa, kappa S, S']`; all four stay of order one at
/// high energy, so a scalar absolute tolerance treats them alike.
pub(crate) fn pair_field(v0: &PeriodicPotential, energy: f64) -> impl FnMut(f64, &[f64], &mut [f64]) + '_ {
    let kappa = pair_scale(energy);
    move |x, y, dy| {
        let q = (v0.evaluate(x) - energy) / kappa;
        dy[0] = kappa * y[1];
        dy[1] = q * y[0];
        dy[2] = kappa * y[3];
        dy[3] = q * y[2];
    }
}

/// `[C, C', S, S']` from the scaled state.
pub(crate) fn unscale_pair(y: &[f64], kappa: f64) -> [f64; 4] {
    [y[0], kappa * y[1], y[2] / kappa, y[3]]
}

/// Unscaled initial data; the scaled start coincides with it.
pub(crate) const PAIR_START: [f64; 4] = [1.0, 0.0, 0.0, 1.0];

/// Fundamental solutions evaluated at `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub energy: f64,
    pub c: f64,
    pub dc: f64,
    pub s: f64,
    pub ds: f64,
}

impl Monodromy {
    pub fn discriminant(&self) -> f64 {
        self.c + self.ds
    }
}

/// Integrate over `[0, x_end]` with the pipeline restarted at every
/// breakpoint of `V0`, returning the final state.
pub(crate) fn propagate<F>(field: F, y0: &[f64], x_end: f64, opts: &IvpOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut solver = Solver::new(field, 0.0, y0, opts)?;
    let mut ends = opts.breakpoints.clone();
    ends.push(x_end);
    let last = ends.len() - 1;
    for (i, &end) in ends.iter().enumerate() {
        while solver.x() < end {
            solver.advance(end, i < last)?;
        }
        solver.restart();
    }
    Ok(solver.y().to_vec())
}

pub fn monodromy(v0: &PeriodicPotential, energy: f64) -> Result<Monodromy> {
    let y = propagate(pair_field(v0, energy), &PAIR_START, 1.0, &period_options(v0, 1.0))
        .map_err(|e| e.at_energy(energy))?;
    let [c, dc, s, ds] = unscale_pair(&y, pair_scale(energy));
    Ok(Monodromy { energy, c, dc, s, ds })
}

/// `D(E) = C(1, E) + S'(1, E)`.
pub fn discriminant(v0: &PeriodicPotential, energy: f64) -> Result<f64> {
    monodromy(v0, energy).map(|m| m.discriminant())
}

/// `(D(E), dD/dE)`, the derivative from the variational equations.
pub fn discriminant_with_slope(v0: &PeriodicPotential, energy: f64) -> Result<(f64, f64)> {
    let kappa = pair_scale(energy);
    // Scaled pair as in `pair_field`, then the E-derivatives scaled as
    // `[kappa dC, dC', kappa^2 dS, kappa dS']`.
    let field = |x: f64, y: &[f64], dy: &mut [f64]| {
        let q = (v0.evaluate(x) - energy) / kappa;
        dy[0] = kappa * y[1];
        dy[1] = q * y[0];
        dy[2] = kappa * y[3];
        dy[3] = q * y[2];
        dy[4] = kappa * y[5];
        dy[5] = q * y[4] - y[0];
        dy[6] = kappa * y[7];
        dy[7] = q * y[6] - y[2];
    };
    let y0 = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let y = propagate(field, &y0, 1.0, &period_options(v0, 1.0)).map_err(|e| e.at_energy(energy))?;
    Ok((y[0] + y[3], (y[4] + y[7]) / kappa))
}

/// Dense fundamental pair on `[0, x_max]`.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    energy: f64,
    trajectory: DenseTrajectory,
}

impl FundamentalPair {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn x_max(&self) -> f64 {
        self.trajectory.end()
    }

    /// `[C, C', S, S']` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        self.trajectory.eval_into(x, &mut out);
        unscale_pair(&out, pair_scale(self.energy))
    }

    /// `C S' - C' S - 1` at `x`.
    pub fn wronskian_defect(&self, x: f64) -> f64 {
        let [c, dc, s, ds] = self.eval(x);
        c * ds - dc * s - 1.0
    }

    /// Dense output of the scaled state `[C, C'/kappa, kappa S, S']`.
    pub fn trajectory(&self) -> &DenseTrajectory {
        &self.trajectory
    }
}

pub fn fundamental_pair(v0: &PeriodicPotential, energy: f64, x_max: f64) -> Result<FundamentalPair> {
    if !(x_max >= 1.0) {
        return Err(crate::Error::InvalidArgument(format!("x_max must be at least 1, got {x_max}")));
    }
    let trajectory = integrate_ivp(pair_field(v0, energy), 0.0, x_max, &PAIR_START, &period_options(v0, x_max))
        .map_err(|e| e.at_energy(energy))?;
    Ok(FundamentalPair { energy, trajectory })
}
