//! The five subcommands.  Each writes its files under the output directory
//! and returns whether everything it checked passed.

use std::fs;
use std::path::{Path, PathBuf};

use floquet_embed::floquet::{asymptotic_anchor, band_structure, eigenvalue, Band, FloquetFrame};
use floquet_embed::synth::{prepare, prepare_and_synthesize, write_potential_csv, ExportFormat, HypothesisCheck, StructuredRecord, SynthesisPlan};
use floquet_embed::targets::{same_class, TargetClass, TargetSpectrum};
use floquet_embed::verify::{
    check_cross_band, check_nonresonant, check_same_band_lower, decay_fit, decay_report, default_probes, lemma_suite, probe_trace, trace_grid,
    trace_probes, BoundAudit, DecayReport, Perturbation, PruferTrace, SampledPotential, SuiteReport, DEFAULT_VERDICT_MARGIN,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Context {
    fn create_out(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Output(format!("{}: {e}", self.out.display())))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn csv_writer(&self, name: &str) -> Result<(csv::Writer<fs::File>, PathBuf), CliError> {
        let path = self.path(name);
        let w = csv::Writer::from_path(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        Ok((w, path))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

pub fn bands(ctx: &Context) -> Result<bool, CliError> {
    let v0 = ctx.config.background()?;
    let bands: Vec<Band> = band_structure(&v0, ctx.config.run.n_max)?;
    ctx.create_out()?;
    let (mut w, path) = ctx.csv_writer("bands.csv")?;
    w.write_record(["n", "lower", "upper", "direction"]).map_err(csv_err)?;
    for b in &bands {
        let dir = serde_json::to_value(b.direction).map_err(|e| CliError::Output(e.to_string()))?;
        w.write_record([b.n.to_string(), fmt(b.lower), fmt(b.upper), dir.as_str().unwrap_or_default().to_string()]).map_err(csv_err)?;
        println!("band {:>3}  [{:.12e}, {:.12e}]", b.n, b.lower, b.upper);
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(true)
}

#[derive(Debug, Serialize)]
struct EigenRow {
    k: f64,
    n: usize,
    #[serde(rename = "E")]
    energy: f64,
    anchor: f64,
    delta: f64,
    within_bound: bool,
}

pub fn eigen(ctx: &Context) -> Result<bool, CliError> {
    ctx.config.require_targets()?;
    let v0 = ctx.config.background()?;
    let a = v0.l1_norm();
    let mut rows = Vec::new();
    for t in &ctx.config.targets {
        let qe = eigenvalue(&v0, t.k, t.n)?;
        let (anchor, delta) = asymptotic_anchor(a, t.k, t.n);
        let root = qe.energy.max(0.0).sqrt();
        // eigenvalues carry roughly 1e-12 relative error
        let slack = 1e-9 * anchor.max(1.0);
        let within_bound = (root - anchor).abs() <= delta + slack;
        rows.push(EigenRow { k: t.k, n: t.n, energy: qe.energy, anchor, delta, within_bound });
    }
    ctx.create_out()?;
    let (mut w, path) = ctx.csv_writer("eigen.csv")?;
    for r in &rows {
        w.serialize(r).map_err(csv_err)?;
        println!("k {:.6} n {:>6}  E {:.15e}  within bound {}", r.k, r.n, r.energy, r.within_bound);
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(true)
}

#[derive(Debug, Serialize)]
struct TargetFit {
    index: usize,
    predicted_slope: f64,
    /// Slope of the synthesized `ln R`; absent when the run is too short.
    slope: Option<f64>,
    l2_verdict: Option<bool>,
}

#[derive(Debug, Serialize)]
struct SynthReport<'a> {
    schema: u32,
    spectrum: &'a TargetSpectrum,
    plan: &'a SynthesisPlan,
    hypotheses: &'a [HypothesisCheck],
    fits: Vec<TargetFit>,
    accepted_steps: usize,
}

pub fn synth(ctx: &Context) -> Result<bool, CliError> {
    let cfg = &ctx.config;
    cfg.require_targets()?;
    let v0 = cfg.background()?;
    let (prep, traj) = prepare_and_synthesize(&v0, &cfg.target_specs(), cfg.h.as_ref(), &cfg.plan_options(), &cfg.synth_options())?;
    ctx.create_out()?;
    if cfg.output.formats.contains(&ExportFormat::Csv) {
        let path = ctx.path("potential.csv");
        let file = fs::File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        write_potential_csv(file, &traj.grid, &traj.potential)?;
        println!("wrote {}", path.display());
    }
    if cfg.output.formats.contains(&ExportFormat::Structured) {
        let rec = StructuredRecord::new(&traj, &prep.plan, cfg.run.grid_step);
        println!("wrote {}", ctx.write_json("trajectory.json", &rec)?.display());
    }
    let last = traj.activations.last().copied().unwrap_or(0.0);
    let fits = prep
        .plan
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let fit = decay_fit(t.qe.energy, t.xi, &traj.grid, &traj.ln_r[j], cfg.run.tail_fraction, last, DEFAULT_VERDICT_MARGIN).ok();
            TargetFit { index: j, predicted_slope: t.predicted_slope(), slope: fit.as_ref().map(|f| f.slope), l2_verdict: fit.map(|f| f.l2_verdict) }
        })
        .collect();
    let report = SynthReport {
        schema: 1,
        spectrum: &prep.spectrum,
        plan: &prep.plan,
        hypotheses: &traj.hypotheses,
        fits,
        accepted_steps: traj.accepted_steps,
    };
    println!("wrote {}", ctx.write_json("plan.json", &report)?.display());
    for (t, f) in prep.plan.targets.iter().zip(&report.fits) {
        println!("target {} E {:.12e} C {:.6e} T {:.6e} slope {}", f.index, t.qe.energy, t.amplitude, t.activation, f.slope.map_or("n/a".into(), |s| format!("{s:.4}")));
    }
    let envelope_ok = traj.hypotheses.iter().filter(|h| h.name == "envelope").all(|h| h.holds);
    if !envelope_ok {
        println!("envelope invariant violated");
    }
    Ok(envelope_ok)
}

#[derive(Debug, Serialize)]
struct PairAudit {
    pair: (usize, usize),
    audits: Vec<BoundAudit>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    schema: u32,
    source: String,
    window: (f64, f64),
    targets: Vec<DecayReport>,
    probes: Vec<DecayReport>,
    audits: Vec<PairAudit>,
    all_pass: bool,
}

/// `theta` between samples: the slowly varying `theta - eta` is interpolated
/// and the frame phase added back.
struct TracePhase<'a> {
    frame: &'a FloquetFrame,
    x: &'a [f64],
    deviation: Vec<f64>,
}

impl<'a> TracePhase<'a> {
    fn new(frame: &'a FloquetFrame, trace: &'a PruferTrace) -> Self {
        let deviation = trace.x.iter().zip(&trace.theta).map(|(&x, &th)| th - frame.eta(x)).collect();
        TracePhase { frame, x: &trace.x, deviation }
    }

    fn at(&self, x: f64) -> f64 {
        let i = self.x.partition_point(|&g| g <= x).clamp(1, self.x.len() - 1);
        let (a, b) = (self.x[i - 1], self.x[i]);
        let t = if b > a { (x - a) / (b - a) } else { 1.0 };
        self.frame.eta(x) + self.deviation[i - 1] + t * (self.deviation[i] - self.deviation[i - 1])
    }
}

pub fn verify(ctx: &Context, potential: &Path) -> Result<bool, CliError> {
    let cfg = &ctx.config;
    cfg.require_targets()?;
    let v = SampledPotential::read(potential).map_err(|e| CliError::Input(e.to_string()))?;
    if v.start() > 0.0 {
        return Err(CliError::Input(format!("{}: samples must start at x = 0, found {}", potential.display(), v.start())));
    }
    let v0 = cfg.background()?;
    let prep = prepare(&v0, &cfg.target_specs(), cfg.h.as_ref(), &cfg.plan_options())?;
    let x_end = v.end();
    let grid = trace_grid(x_end, cfg.run.trace_step);
    let opts = cfg.trace_options();
    let last = v.jumps().last().copied().unwrap_or(0.0);
    let frames = prep.own_frames();

    let traces = frames
        .iter()
        .zip(&cfg.targets)
        .map(|(f, t)| probe_trace(f, t.xi, &v, x_end, &grid, &opts))
        .collect::<floquet_embed::Result<Vec<_>>>()?;
    let targets = traces.iter().map(|t| decay_report(t, cfg.run.tail_fraction, last)).collect::<floquet_embed::Result<Vec<_>>>()?;

    let ks: Vec<f64> = cfg.targets.iter().map(|t| t.k).collect();
    let probes = default_probes(&v0, &ks, cfg.run.probes)?;
    let probe_traces = trace_probes(&v0, &probes, &v, x_end, &grid, &opts)?;
    let probes = probe_traces.iter().map(|t| decay_report(t, cfg.run.tail_fraction, last)).collect::<floquet_embed::Result<Vec<_>>>()?;

    let x0 = last.max(1.0);
    let checkpoints: Vec<f64> = (1..=8).map(|m| x0 + (x_end - x0) * m as f64 / 8.0).collect();
    let phases: Vec<TracePhase> = frames.iter().zip(&traces).map(|(f, t)| TracePhase::new(f, t)).collect();
    let mut audits = Vec::new();
    for i in 0..frames.len() {
        for j in i + 1..frames.len() {
            let (ti, tj) = (&prep.spectrum.targets[i], &prep.spectrum.targets[j]);
            let th_i = |x: f64| phases[i].at(x);
            let th_j = |x: f64| phases[j].at(x);
            let found = if !same_class(ti.qe.k, tj.qe.k) {
                check_nonresonant(frames[i], frames[j], &th_i, &th_j, &v, x0, &checkpoints)?
            } else if ti.class == TargetClass::S2 && ti.partner == Some(j) {
                let eps = ti.epsilon.unwrap_or(0.5);
                check_same_band_lower(frames[i], frames[j], &th_i, &th_j, &v, eps, x0, x_end)?
            } else if ti.class == TargetClass::S3 {
                // The bound is stated for the lower band against the higher one.
                let (lo, hi) = if ti.qe.n < tj.qe.n { (i, j) } else { (j, i) };
                let th_lo = |x: f64| phases[lo].at(x);
                let th_hi = |x: f64| phases[hi].at(x);
                check_cross_band(frames[hi], frames[lo], &th_hi, &th_lo, &v, prep.spectrum.a_norm, x0, x_end, cfg.run.cross_band_slack)?
            } else {
                Vec::new()
            };
            if !found.is_empty() {
                audits.push(PairAudit { pair: (i, j), audits: found });
            }
        }
    }

    let all_pass = targets.iter().all(|r| r.l2_verdict)
        && probes.iter().all(|r| !r.l2_verdict)
        && audits.iter().flat_map(|p| &p.audits).all(|a| a.pass);
    for (j, r) in targets.iter().enumerate() {
        println!("target {j} E {:.12e} slope {:.4} verdict {}", r.energy, r.slope, r.l2_verdict);
    }
    for r in &probes {
        println!("probe  E {:.12e} slope {:.4} verdict {}", r.energy, r.slope, r.l2_verdict);
    }
    for p in &audits {
        for a in &p.audits {
            println!("audit {:?} {} pair {:?}: lhs {:.3e} rhs {:.3e} hypothesis {} pass {}", a.lemma_id, a.variant, p.pair, a.lhs, a.rhs, a.hypothesis_ok, a.pass);
        }
    }
    ctx.create_out()?;
    let report = VerifyReport {
        schema: 1,
        source: potential.display().to_string(),
        window: (x0, x_end),
        targets,
        probes,
        audits,
        all_pass,
    };
    println!("wrote {}", ctx.write_json("verify.json", &report)?.display());
    Ok(all_pass)
}

pub fn lemmas(ctx: &Context, seed: u64) -> Result<bool, CliError> {
    let report: SuiteReport = lemma_suite(seed, ctx.config.lemmas.counts)?;
    ctx.create_out()?;
    let failures = report.instances.iter().filter(|i| !i.audit.pass).count() + report.half_periods.iter().filter(|h| !h.holds).count();
    let vacuous = report.instances.iter().filter(|i| !i.audit.hypothesis_ok).count();
    println!(
        "seed {seed}: {} audits, {} half-period checks, {failures} failures, {vacuous} with unmet hypotheses",
        report.instances.len(),
        report.half_periods.len()
    );
    println!("wrote {}", ctx.write_json("lemmas.json", &report)?.display());
    Ok(report.all_pass())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}
