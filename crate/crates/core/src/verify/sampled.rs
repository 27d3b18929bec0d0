//! Perturbations given on a grid or in closed form.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::floquet::FloquetFrame;
use crate::synth::{PruferTrajectory, StructuredRecord};

/// A perturbation `V(x)` on the half-line.  Values at a jump are the right
/// limits.
pub trait Perturbation: Sync {
    fn value(&self, x: f64) -> f64;

    /// Positions where `V` may be discontinuous.
    fn jumps(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Right end of the domain of definition.
    fn domain_end(&self) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPerturbation;

impl Perturbation for ZeroPerturbation {
    fn value(&self, _x: f64) -> f64 {
        0.0
    }
}

/// `V` from a closure, with optional jump positions.
pub struct ClosedForm<F> {
    f: F,
    jumps: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> ClosedForm<F> {
    pub fn new(f: F) -> Self {
        ClosedForm { f, jumps: Vec::new() }
    }

    pub fn with_jumps(f: F, jumps: Vec<f64>) -> Self {
        ClosedForm { f, jumps }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Perturbation for ClosedForm<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn jumps(&self) -> Vec<f64> {
        self.jumps.clone()
    }
}

/// The synthesized `V` evaluated from a trajectory's angles.
pub struct TrajectoryPotential<'a> {
    pub trajectory: &'a PruferTrajectory,
    pub frames: Vec<&'a FloquetFrame>,
}

impl Perturbation for TrajectoryPotential<'_> {
    fn value(&self, x: f64) -> f64 {
        self.trajectory.potential_at(&self.frames, x)
    }

    fn jumps(&self) -> Vec<f64> {
        self.trajectory.activations.clone()
    }

    fn domain_end(&self) -> f64 {
        self.trajectory.x_max()
    }
}

/// Samples of `V` interpolated by cubic Lagrange polynomials on four
/// neighbouring points.  A repeated abscissa marks a jump: the first copy is
/// the left limit, the second the right limit, and no stencil crosses it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    x: Vec<f64>,
    v: Vec<f64>,
    /// Inclusive index ranges of the continuous pieces.
    pieces: Vec<(usize, usize)>,
}

impl SampledPotential {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::InvalidArgument(format!("{} abscissae but {} values", x.len(), v.len())));
        }
        if x.len() < 2 {
            return Err(Error::InvalidArgument("a sampled potential needs at least two points".into()));
        }
        if let Some(i) = (0..x.len()).find(|&i| !x[i].is_finite() || !v[i].is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        for i in 1..x.len() {
            if x[i] < x[i - 1] {
                return Err(Error::InvalidArgument(format!("abscissae decrease at sample {i}")));
            }
            if i >= 2 && x[i] == x[i - 1] && x[i - 1] == x[i - 2] {
                return Err(Error::InvalidArgument(format!("abscissa {} appears more than twice", x[i])));
            }
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for i in 1..x.len() {
            if x[i] == x[i - 1] {
                pieces.push((start, i - 1));
                start = i;
            }
        }
        pieces.push((start, x.len() - 1));
        Ok(SampledPotential { x, v, pieces })
    }

    /// Parse `x,V` CSV text; errors name the offending line.
    pub fn from_csv_reader<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let fmt = |line: usize, message: String| Error::Format { source_name: source_name.to_string(), line, message };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| fmt(1, e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "V" {
            return Err(fmt(1, format!("expected header \"x,V\", found \"{}\"", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut x = Vec::new();
        let mut v = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                fmt(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != 2 {
                return Err(fmt(line, format!("expected 2 fields, found {}", rec.len())));
            }
            let parse = |s: &str, name: &str| -> Result<f64> {
                let val: f64 = s.parse().map_err(|_| fmt(line, format!("{name} value \"{s}\" is not a number")))?;
                if val.is_finite() {
                    Ok(val)
                } else {
                    Err(fmt(line, format!("{name} value \"{s}\" is not finite")))
                }
            };
            let xi = parse(&rec[0], "x")?;
            let vi = parse(&rec[1], "V")?;
            if let Some(&prev) = x.last() {
                if xi < prev {
                    return Err(fmt(line, format!("x = {xi} is smaller than the previous row")));
                }
            }
            x.push(xi);
            v.push(vi);
        }
        Self::new(x, v).map_err(|e| fmt(0, e.to_string()))
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file), &path.display().to_string())
    }

    pub fn from_record(rec: &StructuredRecord) -> Result<Self> {
        Self::new(rec.samples.x.clone(), rec.samples.potential.clone())
    }

    /// CSV or structured export, chosen by extension (`.json` is structured).
    pub fn read(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_record(&StructuredRecord::read(path)?),
            _ => Self::from_csv(path),
        }
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn piece_of(&self, x: f64) -> (usize, usize) {
        // The right limit wins at a jump.
        let p = self.pieces.partition_point(|&(s, _)| self.x[s] <= x);
        self.pieces[p.saturating_sub(1)]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (s, e) = self.piece_of(x);
        if x <= self.x[s] {
            return self.v[s];
        }
        if x >= self.x[e] {
            return self.v[e];
        }
        let i = s + self.x[s..=e].partition_point(|&g| g <= x) - 1;
        let n = e - s + 1;
        let width = n.min(4);
        let lo = i.saturating_sub(1).max(s).min(e + 1 - width);
        let xs = &self.x[lo..lo + width];
        let vs = &self.v[lo..lo + width];
        let mut acc = 0.0;
        for a in 0..width {
            let mut w = 1.0;
            for b in 0..width {
                if a != b {
                    w *= (x - xs[b]) / (xs[a] - xs[b]);
                }
            }
            acc += w * vs[a];
        }
        acc
    }
}

impl Perturbation for SampledPotential {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn jumps(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|&(s, _)| self.x[s]).collect()
    }

    fn domain_end(&self) -> f64 {
        self.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_reproduced() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = x.iter().map(|t| t * t * t - 2.0 * t).collect();
        let s = SampledPotential::new(x, v).unwrap();
        for t in [0.05, 0.33, 1.234, 1.85] {
            assert!((s.eval(t) - (t * t * t - 2.0 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_keeps_pieces_apart() {
        let s = SampledPotential::new(vec![0.0, 0.5, 1.0, 1.0, 1.5, 2.0], vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.eval(0.99), 0.0);
        assert_eq!(s.eval(1.0), 1.0);
        assert_eq!(s.eval(1.7), 1.0);
        assert_eq!(s.jumps(), vec![1.0]);
    }

    #[test]
    fn csv_errors_name_the_row() {
        let text = "x,V\n0,0\n0.5,oops\n";
        let err = SampledPotential::from_csv_reader(text.as_bytes(), "v.csv").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
        let err = SampledPotential::from_csv_reader("x,W\n0,0\n".as_bytes(), "v.csv").unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }
}
