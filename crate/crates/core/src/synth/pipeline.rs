//! Classification, planning and synthesis in one call.

use super::growth::Growth;
use super::plan::{plan_constants, PlanOptions, SynthesisPlan};
use super::system::{synthesize, PruferTrajectory, SynthOptions};
use crate::error::Result;
use crate::floquet::{eigenvalue, frame_pair, FloquetFrame, PeriodicPotential};
use crate::targets::{classify, TargetSpectrum};

/// A requested target: quasimomentum, band and boundary phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub k: f64,
    pub n: usize,
    pub xi: f64,
}

impl TargetSpec {
    pub fn new(k: f64, n: usize, xi: f64) -> Self {
        TargetSpec { k, n, xi }
    }
}

pub struct Prepared {
    pub spectrum: TargetSpectrum,
    /// Frames at `k_j` and `pi - k_j` in band `n_j`.
    pub frames: Vec<(FloquetFrame, FloquetFrame)>,
    pub plan: SynthesisPlan,
}

impl Prepared {
    pub fn own_frames(&self) -> Vec<&FloquetFrame> {
        self.frames.iter().map(|(own, _)| own).collect()
    }
}

pub fn prepare(v0: &PeriodicPotential, targets: &[TargetSpec], growth: Option<&Growth>, opts: &PlanOptions) -> Result<Prepared> {
    let qes = targets.iter().map(|t| eigenvalue(v0, t.k, t.n)).collect::<Result<Vec<_>>>()?;
    let xis: Vec<f64> = targets.iter().map(|t| t.xi).collect();
    let spectrum = classify(&qes, &xis, v0)?;
    let frames = qes.iter().map(|&qe| frame_pair(v0, qe)).collect::<Result<Vec<_>>>()?;
    let plan = plan_constants(&spectrum, &frames, growth, opts)?;
    Ok(Prepared { spectrum, frames, plan })
}

pub fn prepare_and_synthesize(
    v0: &PeriodicPotential,
    targets: &[TargetSpec],
    growth: Option<&Growth>,
    plan_opts: &PlanOptions,
    synth_opts: &SynthOptions,
) -> Result<(Prepared, PruferTrajectory)> {
    let prepared = prepare(v0, targets, growth, plan_opts)?;
    let traj = synthesize(&prepared.plan, &prepared.own_frames(), synth_opts)?;
    Ok((prepared, traj))
}
