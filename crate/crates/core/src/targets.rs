//! Target sets of would-be embedded eigenvalues and their resonance classes.
//!
//! Two targets resonate when their quasimomenta coincide or add up to `pi`.
//! Singletons are non-resonant (`S1`), a same-band pair `k`, `pi - k` forms
//! `S2`, and anything else must be a cross-band group (`S3`) high enough in
//! the spectrum and sparse enough in band index.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{floquet_frame, lk_thresholds, FloquetFrame, PeriodicPotential, QuasiEigenvalue};
use crate::numerics::quad::integrate_function;

/// Quasimomenta closer than this are treated as equal.
pub const K_CLASS_TOL: f64 = 1e-9;

pub const DEFAULT_EPSILON_SAFETY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetClass {
    S1,
    S2,
    S3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEigenvalue {
    pub qe: QuasiEigenvalue,
    pub xi: f64,
    pub class: TargetClass,
    /// Resonance constant, for same-band pairs and self-resonant singletons.
    pub epsilon: Option<f64>,
    /// Same-band partner; always inferred from the list.
    pub partner: Option<usize>,
    /// Index into `TargetSpectrum::resonance_groups`.
    pub group: usize,
}

impl TargetEigenvalue {
    pub fn is_self_resonant(&self) -> bool {
        is_half_turn(self.qe.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpectrum {
    pub targets: Vec<TargetEigenvalue>,
    pub resonance_groups: Vec<Vec<usize>>,
    /// `∫_0^1 |V0|` of the background the spectrum was classified against.
    pub a_norm: f64,
}

impl TargetSpectrum {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TargetEigenvalue> {
        self.targets.iter()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("the target set is empty")]
    Empty,
    #[error("{qes} quasi-eigenvalues but {xis} boundary phases")]
    LengthMismatch { qes: usize, xis: usize },
    #[error("target {index}: boundary phase {xi} is outside [0, pi]")]
    InvalidPhase { index: usize, xi: f64 },
    #[error("target {index}: quasimomentum {k} is outside (0, pi)")]
    InvalidQuasimomentum { index: usize, k: f64 },
    #[error("targets {first} and {second} have the same energy {energy}")]
    DuplicateEnergy { first: usize, second: usize, energy: f64 },
    #[error("targets {first} and {second}: k = pi/2 cannot form a same-band pair")]
    SelfResonantPair { first: usize, second: usize },
    #[error("target {index} in cross-band group {group:?}: band {n} is not above the threshold {threshold}")]
    BelowThreshold { index: usize, group: Vec<usize>, n: usize, threshold: f64 },
    #[error("cross-band group {group:?}: member {index} has sparsity sum {lhs} not below {threshold}")]
    CrossBandCondition { group: Vec<usize>, index: usize, lhs: f64, threshold: f64 },
}

pub(crate) fn is_half_turn(k: f64) -> bool {
    (k - PI / 2.0).abs() < K_CLASS_TOL
}

/// `k_a` in `{k_b, pi - k_b}`.
pub fn same_class(k_a: f64, k_b: f64) -> bool {
    (k_a - k_b).abs() < K_CLASS_TOL || (k_a + k_b - PI).abs() < K_CLASS_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S3Member {
    pub n: usize,
    pub lhs: f64,
    pub threshold: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S3Report {
    pub members: Vec<S3Member>,
    pub passes: bool,
}

/// Sparsity condition for a cross-band group given as `(n, k)` pairs:
/// `1/(2 n_i) + sum_{l != i} n_l / (n_i |n_i - n_l|) < 1/(50 pi (1 + delta(k)))`
/// for every member.
pub fn check_s3_condition(group: &[(usize, f64)], a_norm: f64) -> S3Report {
    let members: Vec<S3Member> = group
        .iter()
        .enumerate()
        .map(|(i, &(n_i, k_i))| {
            let ni = n_i as f64;
            let mut lhs = 0.5 / ni;
            for (l, &(n_l, _)) in group.iter().enumerate() {
                if l != i {
                    let gap = (n_i as f64 - n_l as f64).abs();
                    lhs += if gap == 0.0 { f64::INFINITY } else { n_l as f64 / (ni * gap) };
                }
            }
            let big_delta = lk_thresholds(a_norm, k_i).big_delta;
            let threshold = 1.0 / (50.0 * PI * (1.0 + big_delta));
            S3Member { n: n_i, lhs, threshold, passes: lhs < threshold }
        })
        .collect();
    let passes = group.len() >= 2 && members.iter().all(|m| m.passes);
    S3Report { members, passes }
}

/// `∫_s^{s+1} exp(i (2 eta_i + 2 eta_j))` for the two frames.
fn window_moment(frame_i: &FloquetFrame, frame_j: &FloquetFrame, s: f64) -> Result<(f64, f64)> {
    let phase = |t: f64| {
        let a = frame_i.rate_and_phase(t).1;
        let b = frame_j.rate_and_phase(t).1;
        (2.0 * (a + b)).rem_euclid(TAU)
    };
    let tol = 1e-10;
    let re = integrate_function(|t| phase(t).cos(), s, s + 1.0, tol)?;
    let im = integrate_function(|t| phase(t).sin(), s, s + 1.0, tol)?;
    Ok((re, im))
}

/// Lower bound `eps` for the window integral `∫_x^{x+1} (1 - cos(2 theta_i + 2 theta_j))`
/// along the unperturbed flow, times `safety`.
///
/// Along the unperturbed flow `theta_l = theta_l(0) + eta_l`, and for a
/// same-band pair `exp(i(2 eta_i + 2 eta_j))` is 1-periodic, so each window
/// integral equals `1 - Re(exp(i c) J(x))` with `J` the window moment and `c`
/// the initial offset.  The minimum over window starts and offsets is
/// `1 - max |J|`, which is what is estimated here.
pub fn estimate_epsilon(frame_i: &FloquetFrame, frame_j: &FloquetFrame, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument(format!("safety factor must lie in (0, 1), got {safety}")));
    }
    let (qi, qj) = (frame_i.qe(), frame_j.qe());
    if qi.n != qj.n || (qi.k + qj.k - PI).abs() > K_CLASS_TOL {
        return Err(Error::Precondition(format!(
            "resonance constant needs a same-band pair k, pi - k; got (k {}, n {}) and (k {}, n {})",
            qi.k, qi.n, qj.k, qj.n
        )));
    }
    let starts = 64;
    let mut worst = f64::INFINITY;
    for m in 0..starts {
        let (re, im) = window_moment(frame_i, frame_j, m as f64 / starts as f64)?;
        worst = worst.min(1.0 - re.hypot(im));
    }
    if !(worst > 1e-12) {
        return Err(Error::Precondition(format!("degenerate resonance window, minimum {worst}")));
    }
    Ok((safety * worst).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

/// `min_x ∫_x^{x+1} (1 - cos(2 theta_i + 2 theta_j))` over `starts` windows
/// with the given initial phases; an independent check of `estimate_epsilon`.
pub fn window_minimum(frame_i: &FloquetFrame, frame_j: &FloquetFrame, theta_i0: f64, theta_j0: f64, starts: &[f64]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for &s in starts {
        let w = integrate_function(
            |t| 1.0 - (2.0 * (theta_i0 + frame_i.eta(t)) + 2.0 * (theta_j0 + frame_j.eta(t))).cos(),
            s,
            s + 1.0,
            1e-10,
        )?;
        worst = worst.min(w);
    }
    Ok(worst)
}

/// Partition `qes` into resonance groups and classes, estimating the
/// resonance constant with the default safety factor.
pub fn classify(qes: &[QuasiEigenvalue], xis: &[f64], v0: &PeriodicPotential) -> Result<TargetSpectrum> {
    classify_with_safety(qes, xis, v0, DEFAULT_EPSILON_SAFETY)
}

pub fn classify_with_safety(qes: &[QuasiEigenvalue], xis: &[f64], v0: &PeriodicPotential, safety: f64) -> Result<TargetSpectrum> {
    if qes.is_empty() {
        return Err(ClassifyError::Empty.into());
    }
    if qes.len() != xis.len() {
        return Err(ClassifyError::LengthMismatch { qes: qes.len(), xis: xis.len() }.into());
    }
    for (index, (q, &xi)) in qes.iter().zip(xis).enumerate() {
        if !(q.k > 0.0 && q.k < PI) {
            return Err(ClassifyError::InvalidQuasimomentum { index, k: q.k }.into());
        }
        if !(0.0..=PI).contains(&xi) {
            return Err(ClassifyError::InvalidPhase { index, xi }.into());
        }
    }
    for i in 0..qes.len() {
        for j in i + 1..qes.len() {
            let (a, b) = (&qes[i], &qes[j]);
            let same = a.n == b.n && same_class(a.k, b.k) || (a.energy - b.energy).abs() <= 1e-12 * (1.0 + a.energy.abs());
            if same {
                if is_half_turn(a.k) && is_half_turn(b.k) {
                    return Err(ClassifyError::SelfResonantPair { first: i, second: j }.into());
                }
                if (a.k - b.k).abs() < K_CLASS_TOL || a.n != b.n {
                    return Err(ClassifyError::DuplicateEnergy { first: i, second: j, energy: a.energy }.into());
                }
            }
        }
    }

    // Resonance groups: connected components of `same_class`.
    let mut group_of = vec![usize::MAX; qes.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..qes.len() {
        if group_of[i] != usize::MAX {
            continue;
        }
        let g = groups.len();
        let mut members = vec![i];
        group_of[i] = g;
        let mut head = 0;
        while head < members.len() {
            let m = members[head];
            head += 1;
            for j in 0..qes.len() {
                if group_of[j] == usize::MAX && same_class(qes[m].k, qes[j].k) {
                    group_of[j] = g;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }

    let a_norm = v0.l1_norm();
    let mut targets: Vec<TargetEigenvalue> = qes
        .iter()
        .zip(xis)
        .enumerate()
        .map(|(i, (&qe, &xi))| TargetEigenvalue { qe, xi, class: TargetClass::S1, epsilon: None, partner: None, group: group_of[i] })
        .collect();

    for members in &groups {
        match members.as_slice() {
            [i] => {
                if is_half_turn(qes[*i].k) {
                    let f = floquet_frame(v0, qes[*i])?;
                    targets[*i].epsilon = Some(estimate_epsilon(&f, &f, safety)?);
                }
            }
            [i, j] if qes[*i].n == qes[*j].n => {
                // Distinct energies in one band and one class: k and pi - k.
                let fi = floquet_frame(v0, qes[*i])?;
                let fj = floquet_frame(v0, qes[*j])?;
                let eps = estimate_epsilon(&fi, &fj, safety)?;
                for (a, b) in [(*i, *j), (*j, *i)] {
                    targets[a].class = TargetClass::S2;
                    targets[a].epsilon = Some(eps);
                    targets[a].partner = Some(b);
                }
            }
            _ => {
                for &m in members {
                    let threshold = lk_thresholds(a_norm, qes[m].k).l;
                    if (qes[m].n as f64) <= threshold {
                        return Err(ClassifyError::BelowThreshold { index: m, group: members.clone(), n: qes[m].n, threshold }.into());
                    }
                }
                let spec: Vec<(usize, f64)> = members.iter().map(|&m| (qes[m].n, qes[m].k)).collect();
                let report = check_s3_condition(&spec, a_norm);
                if let Some((pos, bad)) = report.members.iter().enumerate().find(|(_, m)| !m.passes) {
                    return Err(ClassifyError::CrossBandCondition {
                        group: members.clone(),
                        index: members[pos],
                        lhs: bad.lhs,
                        threshold: bad.threshold,
                    }
                    .into());
                }
                for &m in members {
                    targets[m].class = TargetClass::S3;
                }
            }
        }
    }
    Ok(TargetSpectrum { targets, resonance_groups: groups, a_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::eigenvalue;

    fn qe(k: f64, n: usize, energy: f64) -> QuasiEigenvalue {
        QuasiEigenvalue { k, n, energy }
    }

    #[test]
    fn singleton_is_non_resonant() {
        let v0 = PeriodicPotential::zero();
        let s = classify(&[qe(0.7, 1, 0.49)], &[0.0], &v0).unwrap();
        assert_eq!(s.targets[0].class, TargetClass::S1);
        assert_eq!(s.targets[0].epsilon, None);
    }

    #[test]
    fn complementary_pair_in_one_band() {
        let v0 = PeriodicPotential::zero();
        let a = eigenvalue(&v0, 1.0, 1).unwrap();
        let b = eigenvalue(&v0, PI - 1.0, 1).unwrap();
        let s = classify(&[a, b], &[0.0, 1.0], &v0).unwrap();
        assert!(s.targets.iter().all(|t| t.class == TargetClass::S2));
        assert_eq!(s.targets[0].partner, Some(1));
        // exp(2i(eta_i + eta_j)) = exp(2 pi i x) integrates to zero over a window.
        let eps = s.targets[0].epsilon.unwrap();
        assert!((eps - 0.5).abs() < 1e-8, "{eps}");
    }

    #[test]
    fn sparse_cross_band_group() {
        let v0 = PeriodicPotential::zero();
        let qes = [qe(PI / 2.0, 6000, 1e8), qe(PI / 2.0, 7000, 2e8)];
        let s = classify(&qes, &[0.0, 0.0], &v0).unwrap();
        assert!(s.targets.iter().all(|t| t.class == TargetClass::S3));
    }

    #[test]
    fn dense_cross_band_group_is_rejected() {
        let v0 = PeriodicPotential::zero();
        let qes = [qe(PI / 2.0, 10, 1.0), qe(PI / 2.0, 20, 2.0)];
        let err = classify(&qes, &[0.0, 0.0], &v0).unwrap_err();
        assert!(matches!(err, Error::Classification(ClassifyError::CrossBandCondition { .. })), "{err}");
    }

    #[test]
    fn s3_condition_examples() {
        let r = check_s3_condition(&[(6000, PI / 2.0), (7000, PI / 2.0)], 0.0);
        assert!((r.members[0].lhs - 1.25e-3).abs() < 1e-12);
        assert!((r.members[0].threshold - 1.0 / (50.0 * PI)).abs() < 1e-15);
        assert!(r.passes);
        let r = check_s3_condition(&[(10, PI / 2.0), (20, PI / 2.0)], 0.0);
        assert!((r.members[0].lhs - 0.25).abs() < 1e-15);
        assert!(!r.passes);
        let r = check_s3_condition(&[(6000, PI / 2.0), (7000, PI / 2.0)], 1e300);
        assert!(!r.passes);
    }

    #[test]
    fn duplicate_and_half_turn_pairs() {
        let v0 = PeriodicPotential::zero();
        let err = classify(&[qe(1.0, 1, 1.0), qe(1.0, 1, 1.0)], &[0.0, 0.0], &v0).unwrap_err();
        assert!(matches!(err, Error::Classification(ClassifyError::DuplicateEnergy { .. })));
        let q = qe(PI / 2.0, 1, PI * PI / 4.0);
        let err = classify(&[q, q], &[0.0, 0.5], &v0).unwrap_err();
        assert!(matches!(err, Error::Classification(ClassifyError::SelfResonantPair { .. })));
    }

    #[test]
    fn half_turn_singleton_gets_epsilon() {
        let v0 = PeriodicPotential::zero();
        let q = eigenvalue(&v0, PI / 2.0, 1).unwrap();
        let s = classify(&[q], &[0.0], &v0).unwrap();
        assert_eq!(s.targets[0].class, TargetClass::S1);
        let eps = s.targets[0].epsilon.unwrap();
        assert!(eps > 0.34 && eps < 1.0);
    }
}
