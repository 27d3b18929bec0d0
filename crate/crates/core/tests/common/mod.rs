//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use std::f64::consts::TAU;

/// Bloch eigenvalues of `-u'' + (c + sum_j a[j] cos(2 pi (j+1) x)) u` at
/// quasimomentum `k`, from the Hill matrix on `e^{i(k + 2 pi m) x}`,
/// `|m| <= modes`.  Sorted ascending.
pub fn hill_eigenvalues(constant: f64, cos: &[f64], k: f64, modes: usize) -> Vec<f64> {
    let size = 2 * modes + 1;
    let mut h = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        let m = i as f64 - modes as f64;
        h[(i, i)] = (k + TAU * m).powi(2) + constant;
        for (j, a) in cos.iter().enumerate() {
            let d = j + 1;
            if i + d < size {
                h[(i, i + d)] = a / 2.0;
                h[(i + d, i)] = a / 2.0;
            }
        }
    }
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
