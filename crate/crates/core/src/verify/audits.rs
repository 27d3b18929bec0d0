//! Numerical audits of the oscillatory-integral and resonance bounds.
//!
//! Every audit evaluates the integral by Gauss-Legendre panels a quarter of
//! the fastest period wide, certifies the hypotheses on samples, and reports
//! `lhs`, `rhs` and whether the hypotheses held.  A failed hypothesis makes
//! the audit pass vacuously.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampled::Perturbation;
use crate::error::{Error, Result};
use crate::floquet::{lk_thresholds, FloquetFrame};
use crate::numerics::quad::{gauss_legendre_7, integrate_function};
use crate::numerics::root::find_root_bracketed;
use crate::synth::{lattice_distance, osc_bound, osc_threshold, periodic_bound, periodic_constant};
use crate::targets::same_class;

/// Default stand-in for the unquantified `O(1)` of the cross-band bound.
pub const DEFAULT_CROSS_BAND_SLACK: f64 = 10.0;
const HYPOTHESIS_SAMPLES: usize = 20_000;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    L4_1,
    L4_2,
    L4_3,
    L5_1,
    L5_2,
    L5_3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub lemma_id: LemmaId,
    pub variant: String,
    pub lhs: f64,
    pub rhs: f64,
    pub hypothesis_ok: bool,
    pub pass: bool,
}

impl BoundAudit {
    fn upper(lemma_id: LemmaId, variant: &str, lhs: f64, rhs: f64, hypothesis_ok: bool) -> Self {
        BoundAudit { lemma_id, variant: variant.into(), lhs, rhs, hypothesis_ok, pass: !hypothesis_ok || lhs <= rhs }
    }

    fn lower(lemma_id: LemmaId, variant: &str, lhs: f64, rhs: f64, hypothesis_ok: bool) -> Self {
        BoundAudit { lemma_id, variant: variant.into(), lhs, rhs, hypothesis_ok, pass: !hypothesis_ok || lhs > rhs }
    }

    /// `rhs - lhs` for upper bounds (positive when the bound holds with room).
    pub fn margin(&self) -> f64 {
        match self.lemma_id {
            LemmaId::L5_2 => self.lhs - self.rhs,
            _ => self.rhs - self.lhs,
        }
    }
}

/// A phase function of position, shareable across threads.
pub type PhaseFn<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

/// `∫_a^b f` with panels at most `width` wide, summed chunk by chunk in a
/// fixed order so the result does not depend on thread scheduling.
pub fn panel_integral(f: PhaseFn<'_>, a: f64, b: f64, width: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let chunks = n.div_ceil(CHUNK);
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (lo, hi) = (c * CHUNK, ((c + 1) * CHUNK).min(n));
            let mut acc = 0.0;
            let mut carry = 0.0;
            for i in lo..hi {
                let p = a + i as f64 * h;
                let q = if i + 1 == n { b } else { a + (i + 1) as f64 * h };
                let y = gauss_legendre_7(f, p, q) - carry;
                let t = acc + y;
                carry = (t - acc) - y;
                acc = t;
            }
            acc
        })
        .collect();
    sums.iter().sum()
}

/// `max_x |∫_{x0}^x f|` over the checkpoints `xs` (any order, all above `x0`).
fn max_running(f: PhaseFn<'_>, x0: f64, xs: &[f64], width: f64) -> f64 {
    let mut pts: Vec<f64> = xs.iter().copied().filter(|&x| x > x0).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    let mut acc = 0.0;
    let mut prev = x0;
    let mut best: f64 = 0.0;
    for x in pts {
        acc += panel_integral(f, prev, x, width);
        best = best.max(acc.abs());
        prev = x;
    }
    best
}

fn span_end(x0: f64, xs: &[f64]) -> f64 {
    xs.iter().copied().fold(x0, f64::max)
}

/// Every sample `t` in `[a, b]` satisfies `holds(t)`.
fn certify(a: f64, b: f64, samples: usize, holds: impl Fn(f64) -> bool) -> bool {
    if !(b > a) {
        return holds(a);
    }
    (0..=samples).all(|i| holds(a + (b - a) * i as f64 / samples as f64))
}

fn quarter_period(rate: f64) -> f64 {
    FRAC_PI_2 / rate.abs().max(1e-3)
}

/// Unit and general frequency oscillatory bound: `|∫_{x0}^x sin(theta)/t|` and
/// the cosine analogue against `r(a, beta, c) / (a x0)^beta`.
#[allow(clippy::too_many_arguments)]
pub fn check_osc_bound(theta: PhaseFn<'_>, rate: PhaseFn<'_>, a: f64, c: f64, beta: f64, x0: f64, xs: &[f64]) -> BoundAudit {
    let id = if a == 1.0 { LemmaId::L4_1 } else { LemmaId::L4_2 };
    let end = span_end(x0, xs);
    let params_ok = a != 0.0 && c > 0.0 && beta > 0.0 && beta <= 1.0;
    let hyp = params_ok
        && x0 > osc_threshold(a, beta, c)
        && certify(x0, end, sample_count(x0, end, a.abs() + c), |t| (rate(t) - a).abs() <= c / t.powf(beta) * (1.0 + 1e-12));
    let width = quarter_period(a.abs() + c / x0.powf(beta));
    let s = |t: f64| theta(t).sin() / t;
    let co = |t: f64| theta(t).cos() / t;
    let lhs = max_running(&s, x0, xs, width).max(max_running(&co, x0, xs, width));
    let rhs = if params_ok { osc_bound(a, beta, c, x0) } else { f64::NAN };
    BoundAudit::upper(id, "sin_cos", lhs, rhs, hyp)
}

fn sample_count(a: f64, b: f64, rate: f64) -> usize {
    // Four samples per period, capped.
    (((b - a) * rate.abs() * 4.0 / (2.0 * PI)).ceil() as usize).clamp(64, 4 * HYPOTHESIS_SAMPLES)
}

/// Periodic-weight bound: `|∫ Gamma(t) sin(theta)/t|` (and the cosine
/// analogue) against `‖Gamma‖_2 r(alpha) / x0^(2/3)`, where
/// `|theta' - a - gamma'| <= t^(-2/3)`.
#[allow(clippy::too_many_arguments)]
pub fn check_periodic_osc_bound(
    weight: PhaseFn<'_>,
    gamma_rate: PhaseFn<'_>,
    theta: PhaseFn<'_>,
    rate: PhaseFn<'_>,
    a: f64,
    x0: f64,
    xs: &[f64],
) -> Result<BoundAudit> {
    let alpha = lattice_distance(a);
    let l2 = integrate_function(|t| weight(t).powi(2), 0.0, 1.0, 1e-12)?.sqrt();
    let end = span_end(x0, xs);
    // The fastest rate over one period sets the panel width.
    let fastest = (0..=256).map(|i| rate(x0 + i as f64 / 256.0).abs()).fold(a.abs(), f64::max);
    let hyp = alpha > 0.0
        && x0 > periodic_constant(alpha)
        && certify(x0, end, sample_count(x0, end, fastest).max(64 * (end - x0).ceil() as usize).min(400_000), |t| {
            (rate(t) - a - gamma_rate(t)).abs() <= t.powf(-2.0 / 3.0) * (1.0 + 1e-12)
        });
    let width = quarter_period(fastest).min(1.0 / 64.0);
    let s = |t: f64| weight(t) * theta(t).sin() / t;
    let co = |t: f64| weight(t) * theta(t).cos() / t;
    let mut pts: Vec<f64> = xs.to_vec();
    // Integer edges keep panels off the jumps of a discontinuous weight.
    pts.extend((x0.ceil() as i64..=end.floor() as i64).map(|m| m as f64).filter(|&m| m > x0));
    let lhs = max_running_checked(&s, x0, &pts, xs, width).max(max_running_checked(&co, x0, &pts, xs, width));
    let rhs = if alpha > 0.0 { periodic_bound(l2, alpha, x0) } else { f64::INFINITY };
    Ok(BoundAudit::upper(LemmaId::L4_3, "sin_cos", lhs, rhs, hyp))
}

/// Like [`max_running`], but integrates across all `edges` and only reports
/// the running values at `report`.
fn max_running_checked(f: PhaseFn<'_>, x0: f64, edges: &[f64], report: &[f64], width: f64) -> f64 {
    let mut pts: Vec<f64> = edges.iter().copied().filter(|&x| x > x0).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let mut acc = 0.0;
    let mut prev = x0;
    let mut best: f64 = 0.0;
    for x in pts {
        acc += panel_integral(f, prev, x, width);
        if report.contains(&x) {
            best = best.max(acc.abs());
        }
        prev = x;
    }
    best
}

fn max_rate(frame: &FloquetFrame) -> f64 {
    frame.eta_max()
}

/// Smallness of `|V / eta'|` against `bound(x)` for every frame, on samples
/// of `[a, b]`.
fn certify_smallness(v: &dyn Perturbation, frames: &[&FloquetFrame], a: f64, b: f64, bound: impl Fn(f64) -> f64) -> bool {
    certify(a, b, HYPOTHESIS_SAMPLES, |x| {
        let pot = v.value(x).abs();
        frames.iter().all(|f| pot / f.eta_prime(x).abs() <= bound(x) * (1.0 + 1e-12))
    })
}

/// Non-resonant pair: `|∫ sin 2theta_i sin 2theta_j / (eta_i' t)|` against
/// `‖1/eta_i'‖_2 r(alpha_1) / x0^(2/3)`, plus the `cos 4 theta_i` variant when
/// `k_i != pi/2`.
#[allow(clippy::too_many_arguments)]
pub fn check_nonresonant(
    frame_i: &FloquetFrame,
    frame_j: &FloquetFrame,
    theta_i: PhaseFn<'_>,
    theta_j: PhaseFn<'_>,
    v: &dyn Perturbation,
    x0: f64,
    xs: &[f64],
) -> Result<Vec<BoundAudit>> {
    let (ki, kj) = (frame_i.qe().k, frame_j.qe().k);
    if same_class(ki, kj) {
        return Err(Error::Precondition(format!("quasimomenta {ki} and {kj} resonate")));
    }
    let end = span_end(x0, xs);
    let small = certify_smallness(v, &[frame_i, frame_j], x0, end, |x| 1.0 / (8.0 * x.powf(2.0 / 3.0)));
    let l2 = frame_i.inverse_rate_l2();
    let alpha1 = (2.0 * (ki - kj).abs()).min(2.0 * (ki + kj - PI).abs());
    let width = quarter_period(2.0 * (max_rate(frame_i) + max_rate(frame_j)));
    let f = |t: f64| (2.0 * theta_i(t)).sin() * (2.0 * theta_j(t)).sin() / (frame_i.eta_prime(t) * t);
    let lhs = max_running(&f, x0, xs, width);
    let mut out = vec![BoundAudit::upper(
        LemmaId::L5_1,
        "product",
        lhs,
        periodic_bound(l2, alpha1, x0),
        small && x0 >= periodic_constant(alpha1),
    )];
    if !crate::targets::is_half_turn(ki) {
        let alpha2 = (4.0 * ki).min((4.0 * ki - 2.0 * PI).abs()).min(4.0 * PI - 4.0 * ki);
        let width = quarter_period(4.0 * max_rate(frame_i));
        let g = |t: f64| (4.0 * theta_i(t)).cos() / (frame_i.eta_prime(t) * t);
        let lhs = max_running(&g, x0, xs, width);
        out.push(BoundAudit::upper(
            LemmaId::L5_1,
            "quadruple",
            lhs,
            periodic_bound(l2, alpha2, x0),
            small && x0 >= periodic_constant(alpha2),
        ));
    }
    Ok(out)
}

/// Same-band pair `k`, `pi - k`: `∫_{x0}^{x1} (1 - cos(2theta_i + 2theta_j)) /
/// (|eta_l'| t)` must exceed `(eps / A) ln(x1 / (x0 + 1))` for `l = i, j`,
/// with `A` the largest `|eta'|` over both frames.
#[allow(clippy::too_many_arguments)]
pub fn check_same_band_lower(
    frame_i: &FloquetFrame,
    frame_j: &FloquetFrame,
    theta_i: PhaseFn<'_>,
    theta_j: PhaseFn<'_>,
    v: &dyn Perturbation,
    epsilon: f64,
    x0: f64,
    x1: f64,
) -> Result<Vec<BoundAudit>> {
    let (qi, qj) = (frame_i.qe(), frame_j.qe());
    if qi.n != qj.n || (qi.k + qj.k - PI).abs() > crate::targets::K_CLASS_TOL {
        return Err(Error::Precondition(format!(
            "targets (k = {}, n = {}) and (k = {}, n = {}) are not a same-band pair",
            qi.k, qi.n, qj.k, qj.n
        )));
    }
    if !(x1 >= x0 && x0 > 0.0) {
        return Err(Error::InvalidArgument(format!("need 0 < x0 <= x1, got {x0}, {x1}")));
    }
    let small = epsilon > 0.0 && certify_smallness(v, &[frame_i, frame_j], x0, x1, |_| epsilon / 2.0);
    let big_a = max_rate(frame_i).max(max_rate(frame_j));
    let rhs = epsilon / big_a * (x1 / (x0 + 1.0)).ln();
    let width = quarter_period(2.0 * (max_rate(frame_i) + max_rate(frame_j)));
    let mut out = Vec::new();
    for (name, den) in [("own_rate", frame_i), ("partner_rate", frame_j)] {
        let f = |t: f64| (1.0 - (2.0 * theta_i(t) + 2.0 * theta_j(t)).cos()) / (den.eta_prime(t).abs() * t);
        let lhs = panel_integral(&f, x0, x1, width);
        out.push(BoundAudit::lower(LemmaId::L5_2, name, lhs, rhs, small));
    }
    Ok(out)
}

/// Cross-band pair: `|∫ sin 2theta_i sin 2theta_j / (eta_i' t)|` against
/// `(10 + 10 delta) / (|n_i - n_j| n_i) ln x1 + slack / x0`, and the
/// `cos 4 theta_i` variant with `n_i^2` in the denominator.
#[allow(clippy::too_many_arguments)]
pub fn check_cross_band(
    frame_i: &FloquetFrame,
    frame_j: &FloquetFrame,
    theta_i: PhaseFn<'_>,
    theta_j: PhaseFn<'_>,
    v: &dyn Perturbation,
    a_norm: f64,
    x0: f64,
    x1: f64,
    slack: f64,
) -> Result<Vec<BoundAudit>> {
    let (qi, qj) = (frame_i.qe(), frame_j.qe());
    if !same_class(qi.k, qj.k) {
        return Err(Error::Precondition(format!("quasimomenta {} and {} do not resonate", qi.k, qj.k)));
    }
    if qi.n == qj.n {
        return Err(Error::Precondition(format!("both targets lie in band {}", qi.n)));
    }
    let th = lk_thresholds(a_norm, qi.k);
    if !(qi.n as f64 > th.l && qj.n as f64 > th.l) {
        return Err(Error::Precondition(format!("band indices {} and {} must exceed L = {}", qi.n, qj.n, th.l)));
    }
    if !(x1 > x0 && x0 > 0.0) {
        return Err(Error::InvalidArgument(format!("need 0 < x0 < x1, got {x0}, {x1}")));
    }
    let small = certify_smallness(v, &[frame_i, frame_j], x0, x1, |_| th.big_delta / 2.0);
    let (ni, nj) = (qi.n as f64, qj.n as f64);
    let lead = 10.0 + 10.0 * th.big_delta;
    let width = quarter_period(2.0 * (max_rate(frame_i) + max_rate(frame_j)));
    let f = |t: f64| (2.0 * theta_i(t)).sin() * (2.0 * theta_j(t)).sin() / (frame_i.eta_prime(t) * t);
    let lhs = panel_integral(&f, x0, x1, width).abs();
    let rhs = lead / ((ni - nj).abs() * ni) * x1.ln() + slack / x0;
    let g = |t: f64| (4.0 * theta_i(t)).cos() / (frame_i.eta_prime(t) * t);
    let lhs4 = panel_integral(&g, x0, x1, quarter_period(4.0 * max_rate(frame_i))).abs();
    let rhs4 = lead / (ni * ni) * x1.ln() + slack / x0;
    Ok(vec![
        BoundAudit::upper(LemmaId::L5_3, "product", lhs, rhs, small),
        BoundAudit::upper(LemmaId::L5_3, "quadruple", lhs4, rhs4, small),
    ])
}

/// Half-period structure behind the unit-frequency bound: between
/// consecutive solutions of `theta(t_i) = 2 pi i_0 + i pi`, the integral of
/// `sin theta` alternates in sign, its magnitude stays within
/// `2 ± 10 pi c / t_i^beta`, and `t_{i+1} - t_i` within `pi ± 2 pi c / t_i^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriodReport {
    pub intervals: usize,
    pub alternates: bool,
    /// Largest `| |∫ sin theta| - 2 | / (10 pi c / t_i^beta)`.
    pub worst_area_ratio: f64,
    /// Largest `| t_{i+1} - t_i - pi | / (2 pi c / t_i^beta)`.
    pub worst_spacing_ratio: f64,
    pub holds: bool,
}

pub fn half_period_check(theta: PhaseFn<'_>, c: f64, beta: f64, x0: f64, intervals: usize) -> Result<HalfPeriodReport> {
    let i0 = (theta(x0) / (2.0 * PI)).ceil() - 1.0;
    let level = |i: usize| 2.0 * PI * i0 + i as f64 * PI;
    // theta' is close to 1, so each crossing sits within a period of the last.
    let mut cross = Vec::with_capacity(intervals + 1);
    let mut lo = x0;
    let mut i = 0;
    while cross.len() <= intervals {
        let target = level(i);
        if theta(lo) >= target {
            i += 1;
            continue;
        }
        let mut hi = lo + 1.0;
        while theta(hi) < target {
            hi += 1.0;
        }
        let t = find_root_bracketed(|t| theta(t) - target, lo, hi, 1e-13 * hi)?;
        cross.push(t);
        lo = t;
        i += 1;
    }
    let mut alternates = true;
    let mut worst_area: f64 = 0.0;
    let mut worst_spacing: f64 = 0.0;
    let mut prev_sign = 0.0;
    for w in cross.windows(2) {
        let area = integrate_function(|t| theta(t).sin(), w[0], w[1], 1e-10)?;
        let sign = area.signum();
        if prev_sign != 0.0 && sign == prev_sign {
            alternates = false;
        }
        prev_sign = sign;
        let env = c / w[0].powf(beta);
        worst_area = worst_area.max((area.abs() - 2.0).abs() / (10.0 * PI * env));
        worst_spacing = worst_spacing.max((w[1] - w[0] - PI).abs() / (2.0 * PI * env));
    }
    Ok(HalfPeriodReport {
        intervals,
        alternates,
        worst_area_ratio: worst_area,
        worst_spacing_ratio: worst_spacing,
        holds: alternates && worst_area <= 1.0 && worst_spacing <= 1.0,
    })
}
