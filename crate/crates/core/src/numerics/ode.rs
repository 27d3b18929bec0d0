//! Adaptive embedded Runge-Kutta integration with dense output.
//!
//! [`Solver`] is a pull-style stepper: the caller advances it one accepted step
//! at a time and may query the continuous extension of the last step.  The
//! convenience drivers [`integrate_ivp`] and [`sample_ivp`] handle breakpoints
//! by landing exactly on them and restarting the stage pipeline there.

use super::tableau::{Tableau, DORMAND_PRINCE_54, VERNER_98};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    DormandPrince54,
    #[default]
    Verner98,
}

impl Method {
    pub fn tableau(self) -> &'static Tableau {
        match self {
            Method::DormandPrince54 => &DORMAND_PRINCE_54,
            Method::Verner98 => &VERNER_98,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IvpOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub method: Method,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
    /// Positions where the field may jump; integration restarts at each.
    pub breakpoints: Vec<f64>,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            method: Method::default(),
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 200_000_000,
            breakpoints: Vec::new(),
        }
    }
}

impl IvpOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        IvpOptions { rel_tol, abs_tol, ..Default::default() }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = |t: f64| t > 0.0 && t < 1.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must lie in (0, 1), got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidArgument("max_step must be positive".into()));
        }
        Ok(())
    }
}

/// Largest float strictly below `x`.
pub(crate) fn float_below(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub struct Solver<F> {
    tab: &'static Tableau,
    field: F,
    dim: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    max_steps: usize,
    x: f64,
    y: Vec<f64>,
    x_prev: f64,
    y_prev: Vec<f64>,
    h_last: f64,
    h_next: f64,
    k: Vec<Vec<f64>>,
    k0_valid: bool,
    fsal_next: Vec<f64>,
    fsal_ready: bool,
    dense_ready: bool,
    coeffs: Vec<f64>,
    // Upper clamp for stage abscissae of the last step (left limit at a breakpoint).
    stage_cap: f64,
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    err: Vec<f64>,
    stats: SolverStats,
}

fn evaluate<F>(field: &mut F, x: f64, y: &[f64], out: &mut [f64], stats: &mut SolverStats) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    field(x, y, out);
    stats.evaluations += 1;
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteDerivative { x })
    }
}

impl<F> Solver<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(field: F, x0: f64, y0: &[f64], opts: &IvpOptions) -> Result<Self> {
        opts.validate()?;
        if y0.is_empty() {
            return Err(Error::InvalidArgument("state must have positive dimension".into()));
        }
        if !x0.is_finite() || y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("initial data must be finite".into()));
        }
        let tab = opts.method.tableau();
        let dim = y0.len();
        Ok(Solver {
            tab,
            field,
            dim,
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
            max_step: opts.max_step,
            max_steps: opts.max_steps,
            x: x0,
            y: y0.to_vec(),
            x_prev: x0,
            y_prev: y0.to_vec(),
            h_last: 0.0,
            h_next: opts.initial_step.unwrap_or(0.0),
            k: vec![vec![0.0; dim]; tab.total_stages()],
            k0_valid: false,
            fsal_next: vec![0.0; dim],
            fsal_ready: false,
            dense_ready: false,
            coeffs: vec![0.0; dim * tab.dense_degree()],
            stage_cap: f64::INFINITY,
            ytmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
            err: vec![0.0; dim],
            stats: SolverStats::default(),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x_prev(&self) -> f64 {
        self.x_prev
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn field_mut(&mut self) -> &mut F {
        &mut self.field
    }

    /// Forget cached derivative data, e.g. after crossing a breakpoint.
    pub fn restart(&mut self) {
        self.k0_valid = false;
        self.fsal_ready = false;
    }

    /// Overwrite the current state; the next step re-evaluates the field.
    pub fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
        self.restart();
    }

    fn error_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let scale = self.abs_tol + self.rel_tol * self.y[i].abs().max(self.ynew[i].abs());
            let r = self.err[i] / scale;
            acc += r * r;
        }
        (acc / self.dim as f64).sqrt()
    }

    fn initial_step(&mut self, span: f64) -> Result<f64> {
        // Hairer, Norsett & Wanner, starting step selection.
        let order = (self.tab.error_order + 1) as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..self.dim {
            let sc = self.abs_tol + self.rel_tol * self.y[i].abs();
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.k[0][i] / sc).powi(2);
        }
        d0 = (d0 / self.dim as f64).sqrt();
        d1 = (d1 / self.dim as f64).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span).min(self.max_step);
        for i in 0..self.dim {
            self.ytmp[i] = self.y[i] + h0 * self.k[0][i];
        }
        let x1 = (self.x + h0).min(self.stage_cap);
        evaluate(&mut self.field, x1, &self.ytmp, &mut self.err, &mut self.stats)?;
        let mut d2 = 0.0;
        for i in 0..self.dim {
            let sc = self.abs_tol + self.rel_tol * self.y[i].abs();
            d2 += ((self.err[i] - self.k[0][i]) / sc).powi(2);
        }
        d2 = (d2 / self.dim as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / order)
        };
        Ok((100.0 * h0).min(h1).min(span).min(self.max_step))
    }

    /// Take one accepted step towards `x_end` (never past it).  With
    /// `left_limit`, stage abscissae are kept strictly below `x_end`, so a field
    /// that jumps there is sampled from the left.
    pub fn advance(&mut self, x_end: f64, left_limit: bool) -> Result<()> {
        let span = x_end - self.x;
        if !(span > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cannot advance from {} to {}",
                self.x, x_end
            )));
        }
        self.stage_cap = if left_limit { float_below(x_end) } else { f64::INFINITY };
        if !self.k0_valid {
            if self.fsal_ready {
                std::mem::swap(&mut self.k[0], &mut self.fsal_next);
                self.fsal_ready = false;
            } else {
                let (k0, _) = self.k.split_at_mut(1);
                evaluate(&mut self.field, self.x, &self.y, &mut k0[0], &mut self.stats)?;
            }
            self.k0_valid = true;
        }
        if !(self.h_next > 0.0) {
            self.h_next = self.initial_step(span)?;
        }
        let tab = self.tab;
        let q = (tab.error_order + 1) as f64;
        let mut h = self.h_next.min(self.max_step);
        let mut rejected = false;
        loop {
            if self.stats.accepted + self.stats.rejected >= self.max_steps {
                return Err(Error::StepBudget { x: self.x, max_steps: self.max_steps });
            }
            let landing = h >= span * (1.0 - 1e-12);
            let h_try = if landing { span } else { h };
            if h_try <= 1e-14 * self.x.abs().max(1.0) && !landing {
                return Err(Error::StepUnderflow { x: self.x });
            }
            for s in 1..tab.stages {
                let row = tab.a[s];
                for i in 0..self.dim {
                    let mut acc = 0.0;
                    for (j, a) in row.iter().enumerate() {
                        if *a != 0.0 {
                            acc += a * self.k[j][i];
                        }
                    }
                    self.ytmp[i] = self.y[i] + h_try * acc;
                }
                let xs = (self.x + tab.c[s] * h_try).min(self.stage_cap);
                let (_, tail) = self.k.split_at_mut(s);
                evaluate(&mut self.field, xs, &self.ytmp, &mut tail[0], &mut self.stats)?;
            }
            for i in 0..self.dim {
                let mut acc = 0.0;
                let mut e = 0.0;
                for s in 0..tab.stages {
                    acc += tab.b[s] * self.k[s][i];
                    e += tab.e[s] * self.k[s][i];
                }
                self.ynew[i] = self.y[i] + h_try * acc;
                self.err[i] = h_try * e;
            }
            let norm = self.error_norm();
            if !norm.is_finite() {
                self.stats.rejected += 1;
                rejected = true;
                h = h_try * 0.2;
                continue;
            }
            let mut fac = if norm == 0.0 { 10.0 } else { 0.9 * norm.powf(-1.0 / q) };
            if norm <= 1.0 {
                fac = fac.clamp(0.2, if rejected { 1.0 } else { 10.0 });
                self.stats.accepted += 1;
                self.x_prev = self.x;
                std::mem::swap(&mut self.y_prev, &mut self.y);
                self.y.copy_from_slice(&self.ynew);
                self.x = if landing { x_end } else { self.x + h_try };
                self.h_last = h_try;
                let proposal = h_try * fac;
                self.h_next = if landing && h_try < self.h_next && !rejected {
                    self.h_next.max(proposal)
                } else {
                    proposal
                };
                self.k0_valid = false;
                self.dense_ready = false;
                if tab.fsal {
                    self.fsal_next.copy_from_slice(&self.k[tab.stages - 1]);
                    self.fsal_ready = !left_limit || !landing;
                }
                return Ok(());
            }
            self.stats.rejected += 1;
            rejected = true;
            h = h_try * fac.clamp(0.2, 1.0);
        }
    }

    fn prepare_dense(&mut self) -> Result<()> {
        if self.dense_ready {
            return Ok(());
        }
        let tab = self.tab;
        let h = self.h_last;
        for (e, row) in tab.extra_a.iter().enumerate() {
            let s = tab.stages + e;
            for i in 0..self.dim {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate() {
                    if *a != 0.0 {
                        acc += a * self.k[j][i];
                    }
                }
                self.ytmp[i] = self.y_prev[i] + h * acc;
            }
            let xs = (self.x_prev + tab.extra_c[e] * h).min(self.stage_cap);
            let (_, tail) = self.k.split_at_mut(s);
            evaluate(&mut self.field, xs, &self.ytmp, &mut tail[0], &mut self.stats)?;
        }
        let deg = tab.dense_degree();
        for p in 0..deg {
            for i in 0..self.dim {
                let mut acc = 0.0;
                for (s, row) in tab.dense.iter().enumerate() {
                    if row[p] != 0.0 {
                        acc += row[p] * self.k[s][i];
                    }
                }
                self.coeffs[p * self.dim + i] = h * acc;
            }
        }
        self.dense_ready = true;
        Ok(())
    }

    /// Evaluate the continuous extension of the last accepted step at `x`.
    pub fn dense(&mut self, x: f64, out: &mut [f64]) -> Result<()> {
        if x == self.x {
            out.copy_from_slice(&self.y);
            return Ok(());
        }
        if x == self.x_prev {
            out.copy_from_slice(&self.y_prev);
            return Ok(());
        }
        self.prepare_dense()?;
        let s = (x - self.x_prev) / self.h_last;
        horner(&self.coeffs, &self.y_prev, self.dim, s, out);
        Ok(())
    }

    /// Dense coefficients of the last step, `degree * dim` values.
    pub fn dense_coefficients(&mut self) -> Result<&[f64]> {
        self.prepare_dense()?;
        Ok(&self.coeffs)
    }
}

fn horner(coeffs: &[f64], base: &[f64], dim: usize, s: f64, out: &mut [f64]) {
    let deg = coeffs.len() / dim;
    for i in 0..dim {
        let mut acc = 0.0;
        for p in (0..deg).rev() {
            acc = acc * s + coeffs[p * dim + i];
        }
        out[i] = base[i] + s * acc;
    }
}

/// Piecewise-polynomial solution produced by [`integrate_ivp`].
#[derive(Debug, Clone)]
pub struct DenseTrajectory {
    dim: usize,
    degree: usize,
    knots: Vec<f64>,
    states: Vec<f64>,
    coeffs: Vec<f64>,
}

impl DenseTrajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.knots.len() - 1)
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let n = self.knots.len();
        if n == 1 || x <= self.knots[0] {
            out.copy_from_slice(self.state(0));
            return;
        }
        if x >= self.knots[n - 1] {
            out.copy_from_slice(self.state(n - 1));
            return;
        }
        let j = self.knots.partition_point(|&k| k <= x);
        if self.knots[j - 1] == x {
            out.copy_from_slice(self.state(j - 1));
            return;
        }
        let i = j - 1;
        let h = self.knots[j] - self.knots[i];
        let s = (x - self.knots[i]) / h;
        let block = self.degree * self.dim;
        horner(&self.coeffs[i * block..(i + 1) * block], self.state(i), self.dim, s, out);
    }

    /// State at `x`, clamped to the covered range.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }
}

fn checked_breakpoints(x0: f64, x1: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > x0 && b < x1).collect();
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup();
    b.push(x1);
    b
}

fn check_span(x0: f64, x1: f64) -> Result<()> {
    if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite x1 > x0, got [{x0}, {x1}]")));
    }
    Ok(())
}

/// Integrate `y' = field(x, y)` from `x0` to `x1`, keeping the full dense
/// output.
pub fn integrate_ivp<F>(field: F, x0: f64, x1: f64, y0: &[f64], opts: &IvpOptions) -> Result<DenseTrajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_span(x0, x1)?;
    let mut solver = Solver::new(field, x0, y0, opts)?;
    let dim = y0.len();
    let degree = opts.method.tableau().dense_degree();
    let mut traj = DenseTrajectory {
        dim,
        degree,
        knots: vec![x0],
        states: y0.to_vec(),
        coeffs: Vec::new(),
    };
    let ends = checked_breakpoints(x0, x1, &opts.breakpoints);
    let last = ends.len() - 1;
    for (i, &end) in ends.iter().enumerate() {
        while solver.x() < end {
            solver.advance(end, i < last)?;
            let c = solver.dense_coefficients()?;
            traj.coeffs.extend_from_slice(c);
            traj.knots.push(solver.x());
            traj.states.extend_from_slice(solver.y());
        }
        solver.restart();
    }
    Ok(traj)
}

/// Solution sampled on a grid, without storing the dense output.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub dim: usize,
    pub grid: Vec<f64>,
    /// Row-major: `values[i * dim + d]`.
    pub values: Vec<f64>,
    pub stats: SolverStats,
}

impl GridSolution {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

/// Integrate from `x0` to `x1`, reporting the state at every grid point
/// (which must be sorted and lie in `[x0, x1]`).
pub fn sample_ivp<F>(field: F, x0: f64, x1: f64, y0: &[f64], opts: &IvpOptions, grid: &[f64]) -> Result<GridSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_span(x0, x1)?;
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample grid must be sorted".into()));
    }
    if grid.first().is_some_and(|&g| g < x0) || grid.last().is_some_and(|&g| g > x1) {
        return Err(Error::InvalidArgument("sample grid leaves the integration range".into()));
    }
    let dim = y0.len();
    let mut solver = Solver::new(field, x0, y0, opts)?;
    let mut values = vec![0.0; grid.len() * dim];
    let mut next = 0;
    while next < grid.len() && grid[next] == x0 {
        values[next * dim..(next + 1) * dim].copy_from_slice(y0);
        next += 1;
    }
    let ends = checked_breakpoints(x0, x1, &opts.breakpoints);
    let last = ends.len() - 1;
    for (i, &end) in ends.iter().enumerate() {
        while solver.x() < end {
            solver.advance(end, i < last)?;
            while next < grid.len() && grid[next] <= solver.x() {
                let (a, b) = (next * dim, (next + 1) * dim);
                solver.dense(grid[next], &mut values[a..b])?;
                next += 1;
            }
        }
        solver.restart();
    }
    Ok(GridSolution { dim, grid: grid.to_vec(), values, stats: solver.stats() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(e: f64) -> impl FnMut(f64, &[f64], &mut [f64]) {
        move |_x, y, dy| {
            dy[0] = y[1];
            dy[1] = -e * y[0];
        }
    }

    #[test]
    // The published interpolant coefficients carry about 12 digits.
    fn dense_rows_reproduce_weights_at_step_end() {
        for tab in [&DORMAND_PRINCE_54, &VERNER_98] {
            for s in 0..tab.stages {
                let total: f64 = tab.dense[s].iter().sum();
                assert!((total - tab.b[s]).abs() < 1e-11, "{} stage {s}", tab.name);
            }
            for s in tab.stages..tab.total_stages() {
                let total: f64 = tab.dense[s].iter().sum();
                assert!(total.abs() < 1e-11, "{} extra stage {s}", tab.name);
            }
            for (s, row) in tab.a.iter().enumerate() {
                let c: f64 = row.iter().sum();
                assert!((c - tab.c[s]).abs() < 1e-13, "{} row {s}", tab.name);
            }
        }
    }

    #[test]
    fn exponential_growth() {
        for method in [Method::DormandPrince54, Method::Verner98] {
            let opts = IvpOptions::new(1e-10, 1e-12).with_method(method);
            let traj = integrate_ivp(|_, y, dy| dy[0] = y[0], 0.0, 1.0, &[1.0], &opts).unwrap();
            assert_eq!(traj.start(), 0.0);
            assert_eq!(traj.end(), 1.0);
            assert!((traj.last_state()[0] - std::f64::consts::E).abs() < 1e-8);
        }
    }

    #[test]
    fn cosine_at_pi_squared() {
        let e = std::f64::consts::PI.powi(2);
        let opts = IvpOptions::new(1e-10, 1e-12);
        let traj = integrate_ivp(oscillator(e), 0.0, 1.0, &[1.0, 0.0], &opts).unwrap();
        assert!((traj.last_state()[0] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_field_is_constant() {
        let opts = IvpOptions::default();
        let traj = integrate_ivp(|_, _, dy| dy[0] = 0.0, -3.0, 5.0, &[0.25], &opts).unwrap();
        for x in [-3.0, -1.2, 0.0, 4.9, 5.0] {
            assert_eq!(traj.eval(x)[0], 0.25);
        }
    }

    #[test]
    fn knots_reproduce_stored_states() {
        let opts = IvpOptions::new(1e-9, 1e-12);
        let traj = integrate_ivp(oscillator(40.0), 0.0, 3.0, &[1.0, 0.0], &opts).unwrap();
        for i in 0..traj.knots().len() {
            assert_eq!(traj.eval(traj.knots()[i]), traj.state(i).to_vec());
        }
        assert!(traj.knots().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dense_output_between_knots() {
        for method in [Method::DormandPrince54, Method::Verner98] {
            let e: f64 = 50.0;
            let opts = IvpOptions::new(1e-10, 1e-12).with_method(method);
            let traj = integrate_ivp(oscillator(e), 0.0, 2.0, &[1.0, 0.0], &opts).unwrap();
            let tol = if method == Method::Verner98 { 1e-8 } else { 1e-7 };
            for i in 0..400 {
                let x = 2.0 * i as f64 / 400.0 + 0.0013;
                let y = traj.eval(x);
                assert!((y[0] - (e.sqrt() * x).cos()).abs() < tol, "{method:?} at {x}");
            }
        }
    }

    #[test]
    fn breakpoints_are_respected() {
        // y' = 1 on [0, 1), 3 after: restart makes the kink exact.
        let field = |x: f64, _: &[f64], dy: &mut [f64]| dy[0] = if x < 1.0 { 1.0 } else { 3.0 };
        let opts = IvpOptions::new(1e-10, 1e-12).with_breakpoints(vec![1.0]);
        let traj = integrate_ivp(field, 0.0, 2.0, &[0.0], &opts).unwrap();
        assert!(traj.knots().contains(&1.0));
        assert!((traj.eval(1.0)[0] - 1.0).abs() < 1e-13);
        assert!((traj.last_state()[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_matches_dense_solution() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let opts = IvpOptions::new(1e-11, 1e-13).with_breakpoints(vec![2.5, 7.0]);
        let sol = sample_ivp(oscillator(9.0), 0.0, 10.0, &[1.0, 0.0], &opts, &grid).unwrap();
        for (i, x) in grid.iter().enumerate() {
            assert!((sol.row(i)[0] - (3.0 * x).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn non_finite_field_is_reported() {
        let opts = IvpOptions::default();
        let err = integrate_ivp(|x, _, dy| dy[0] = 1.0 / (x - 0.5), 0.0, 1.0, &[0.0], &opts);
        assert!(matches!(
            err,
            Err(Error::NonFiniteDerivative { .. }) | Err(Error::StepUnderflow { .. }) | Err(Error::StepBudget { .. })
        ));
    }

    #[test]
    fn float_below_is_adjacent() {
        for x in [1.0, 1e-300, -2.5, 3.0e10] {
            let b = float_below(x);
            assert!(b < x);
            assert_eq!(f64::from_bits(if x > 0.0 { b.to_bits() + 1 } else { b.to_bits() - 1 }), x);
        }
    }
}
