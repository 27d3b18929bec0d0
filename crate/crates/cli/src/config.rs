//! The run configuration document.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use floquet_embed::floquet::{PeriodicPotential, Profile};
use floquet_embed::synth::{ExportFormat, Growth, Mode, PlanOptions, SynthOptions, TargetSpec};
use floquet_embed::verify::{SuiteCounts, TraceOptions, DEFAULT_CROSS_BAND_SLACK, DEFAULT_TAIL_FRACTION};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub h: Option<Growth>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub lemmas: LemmaSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude cos(2 pi x)`.
    Cosine {
        amplitude: f64,
    },
    Fourier {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Piecewise {
        breaks: Vec<f64>,
        polys: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub k: f64,
    pub n: usize,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    #[serde(default)]
    pub kind: Mode,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Per-target amplitude overrides in practical mode.
    #[serde(default)]
    pub amplitudes: Vec<Option<f64>>,
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig { kind: Mode::Practical, scale: 1.0, spacing: default_spacing(), amplitudes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub x_max: f64,
    pub grid_step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bands listed by `bands`.
    pub n_max: usize,
    /// Sample spacing of verification traces.
    pub trace_step: f64,
    pub trace_rel_tol: f64,
    pub trace_abs_tol: f64,
    /// Non-target probes traced by `verify`.
    pub probes: usize,
    pub tail_fraction: f64,
    pub cross_band_slack: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        let s = SynthOptions::default();
        let t = TraceOptions::default();
        RunSection {
            x_max: s.x_max,
            grid_step: s.grid_step,
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            n_max: 5,
            trace_step: 0.5,
            trace_rel_tol: t.rel_tol,
            trace_abs_tol: t.abs_tol,
            probes: 10,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            cross_band_slack: DEFAULT_CROSS_BAND_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<ExportFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("out"), formats: vec![ExportFormat::Csv, ExportFormat::Structured] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaSection {
    pub seed: u64,
    pub counts: SuiteCounts,
}

impl Default for LemmaSection {
    fn default() -> Self {
        LemmaSection { seed: 1, counts: SuiteCounts::default() }
    }
}

fn one() -> f64 {
    1.0
}

fn default_spacing() -> f64 {
    PlanOptions::default().spacing
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {message}"))
}

impl RunConfig {
    /// Parse and validate; diagnostics name the field and line.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            let path = e.path().to_string();
            let field = if path == "." { String::new() } else { format!(" at `{path}`") };
            CliError::Config(format!("{source_name}:{}:{}{field}: {inner}", inner.line(), inner.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(invalid("schema", format!("unsupported version {} (expected {CONFIG_SCHEMA})", self.schema)));
        }
        self.background().map_err(|e| invalid("potential", e))?;
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.k > 0.0 && t.k < PI) {
                return Err(invalid(&format!("targets[{i}].k"), format!("{} is outside (0, pi)", t.k)));
            }
            if !(0.0..=PI).contains(&t.xi) {
                return Err(invalid(&format!("targets[{i}].xi"), format!("{} is outside [0, pi]", t.xi)));
            }
            if t.n == 0 {
                return Err(invalid(&format!("targets[{i}].n"), "band indices start at 1"));
            }
        }
        if let Some(h) = &self.h {
            h.validate().map_err(|e| invalid("h", e))?;
        }
        let r = &self.run;
        let positive = [
            ("run.x_max", r.x_max),
            ("run.grid_step", r.grid_step),
            ("run.rel_tol", r.rel_tol),
            ("run.abs_tol", r.abs_tol),
            ("run.trace_step", r.trace_step),
            ("run.trace_rel_tol", r.trace_rel_tol),
            ("run.trace_abs_tol", r.trace_abs_tol),
            ("run.cross_band_slack", r.cross_band_slack),
            ("mode.spacing", self.mode.spacing),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.mode.scale.is_finite() && self.mode.scale >= 0.0) {
            return Err(invalid("mode.scale", format!("must be nonnegative, got {}", self.mode.scale)));
        }
        if !(r.tail_fraction > 0.0 && r.tail_fraction < 1.0) {
            return Err(invalid("run.tail_fraction", format!("must lie in (0, 1), got {}", r.tail_fraction)));
        }
        if r.n_max == 0 {
            return Err(invalid("run.n_max", "must be at least 1"));
        }
        if !self.mode.amplitudes.is_empty() && self.mode.amplitudes.len() != self.targets.len() {
            return Err(invalid("mode.amplitudes", format!("{} entries for {} targets", self.mode.amplitudes.len(), self.targets.len())));
        }
        Ok(())
    }

    pub fn require_targets(&self) -> Result<(), CliError> {
        if self.targets.is_empty() {
            return Err(invalid("targets", "at least one target is required for this command"));
        }
        Ok(())
    }

    pub fn background(&self) -> floquet_embed::Result<PeriodicPotential> {
        let profile = match &self.potential {
            PotentialConfig::Zero => Profile::Zero,
            PotentialConfig::Constant { value } => Profile::Constant { value: *value },
            PotentialConfig::Cosine { amplitude } => Profile::Fourier { constant: 0.0, cos: vec![*amplitude], sin: Vec::new() },
            PotentialConfig::Fourier { constant, cos, sin } => Profile::Fourier { constant: *constant, cos: cos.clone(), sin: sin.clone() },
            PotentialConfig::Piecewise { breaks, polys } => Profile::Piecewise { breaks: breaks.clone(), polys: polys.clone() },
        };
        PeriodicPotential::new(profile)
    }

    pub fn target_specs(&self) -> Vec<TargetSpec> {
        self.targets.iter().map(|t| TargetSpec::new(t.k, t.n, t.xi)).collect()
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions { mode: self.mode.kind, scale: self.mode.scale, spacing: self.mode.spacing, amplitudes: self.mode.amplitudes.clone() }
    }

    pub fn synth_options(&self) -> SynthOptions {
        SynthOptions { x_max: self.run.x_max, grid_step: self.run.grid_step, rel_tol: self.run.rel_tol, abs_tol: self.run.abs_tol }
    }

    pub fn trace_options(&self) -> TraceOptions {
        TraceOptions { rel_tol: self.run.trace_rel_tol, abs_tol: self.run.trace_abs_tol }
    }
}
