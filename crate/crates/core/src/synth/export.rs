//! Writing synthesized potentials and trajectories to disk.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::plan::{Mode, SynthesisPlan};
use super::system::PruferTrajectory;
use crate::error::{Error, Result};
use crate::targets::TargetClass;

pub const STRUCTURED_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedTarget {
    #[serde(rename = "E")]
    pub energy: f64,
    pub k: f64,
    pub n: usize,
    pub xi: f64,
    pub class: TargetClass,
    #[serde(rename = "C")]
    pub amplitude: f64,
    #[serde(rename = "T")]
    pub activation: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub x0: f64,
    pub x1: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub x: Vec<f64>,
    #[serde(rename = "V")]
    pub potential: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    #[serde(rename = "lnR")]
    pub ln_r: Vec<Vec<f64>>,
}

/// Self-contained record of a synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredRecord {
    pub schema: u32,
    pub mode: Mode,
    pub targets: Vec<ExportedTarget>,
    pub grid: GridInfo,
    pub samples: Samples,
}

impl StructuredRecord {
    pub fn new(traj: &PruferTrajectory, plan: &SynthesisPlan, grid_step: f64) -> Self {
        StructuredRecord {
            schema: STRUCTURED_SCHEMA,
            mode: plan.mode,
            targets: plan
                .targets
                .iter()
                .map(|t| ExportedTarget {
                    energy: t.qe.energy,
                    k: t.qe.k,
                    n: t.qe.n,
                    xi: t.xi,
                    class: t.class,
                    amplitude: t.amplitude,
                    activation: t.activation,
                    epsilon: t.epsilon,
                })
                .collect(),
            grid: GridInfo { x0: traj.grid[0], x1: traj.x_max(), step: grid_step },
            samples: Samples {
                x: traj.grid.clone(),
                potential: traj.potential.clone(),
                theta: traj.theta.clone(),
                ln_r: traj.ln_r.clone(),
            },
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let rec: StructuredRecord = serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Format {
            source_name: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if rec.schema != STRUCTURED_SCHEMA {
            return Err(Error::Format {
                source_name: path.display().to_string(),
                line: 1,
                message: format!("unsupported schema {}", rec.schema),
            });
        }
        if rec.samples.x.len() != rec.samples.potential.len() {
            return Err(Error::Format {
                source_name: path.display().to_string(),
                line: 1,
                message: "x and V columns differ in length".into(),
            });
        }
        Ok(rec)
    }
}

/// `x,V` rows with 17 significant digits.
pub fn write_potential_csv<W: Write>(out: W, grid: &[f64], potential: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "x,V")?;
    for (x, v) in grid.iter().zip(potential) {
        writeln!(w, "{x:.16e},{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_potential(traj: &PruferTrajectory, plan: &SynthesisPlan, grid_step: f64, path: &Path, format: ExportFormat) -> Result<()> {
    if traj.grid.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match format {
        ExportFormat::Csv => write_potential_csv(file, &traj.grid, &traj.potential),
        ExportFormat::Structured => {
            let mut w = BufWriter::new(file);
            serde_json::to_writer(&mut w, &StructuredRecord::new(traj, plan, grid_step))?;
            w.flush()?;
            Ok(())
        }
    }
}
