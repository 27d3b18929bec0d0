//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_MAX_INTERVALS: usize = 4000;

/// Seven-point Gauss-Legendre rule on `[a, b]` (exact to degree 13).
pub fn gauss_legendre_7<F>(mut f: F, a: f64, b: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = WG[3] * f(center);
    for j in 0..3 {
        let dx = half * XGK[2 * j + 1];
        acc += WG[j] * (f(center - dx) + f(center + dx));
    }
    acc * half
}

/// One Gauss-Kronrod 15-point panel: `(integral, error estimate)`.
pub fn gauss_kronrod_15<F>(f: &mut F, a: f64, b: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive quadrature of `f` over `[a, b]`, splitting first at `breaks`.
/// Stops once the summed error estimate is at most `tol * (1 + |result|)`.
pub fn integrate_with_breaks<F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64, max_intervals: usize) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    inner.dedup();
    edges.extend(inner);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in edges.windows(2) {
        let (value, error) = gauss_kronrod_15(&mut f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Piece { a: w[0], b: w[1], value, error });
    }
    while total_err > tol * (1.0 + total.abs()) {
        if heap.len() >= max_intervals {
            return Err(Error::SubdivisionLimit { a, b, error: total_err });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval exhausted at machine resolution; accept it as is.
            heap.push(Piece { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gauss_kronrod_15(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Resum to shed the drift of the running total.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult { value: sign * value, error, intervals: heap.len() })
}

/// `∫_a^b f` to within `tol * (1 + |result|)`.
pub fn integrate_function<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_with_breaks(f, a, b, &[], tol, DEFAULT_MAX_INTERVALS).map(|r| r.value)
}

/// Running integrals `∫_{edges[0]}^{edges[i]} f` for long oscillatory
/// integrands: each panel is integrated adaptively on its own with absolute
/// tolerance `panel_tol`, so the accumulated error stays bounded by
/// `panel_tol` times the panel count.
pub fn cumulative_integral<F>(mut f: F, edges: &[f64], panel_tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> f64,
{
    let mut out = Vec::with_capacity(edges.len());
    if edges.is_empty() {
        return Ok(out);
    }
    out.push(0.0);
    let mut acc = 0.0;
    // Kahan summation; panel counts reach 10^6.
    let mut carry = 0.0;
    for w in edges.windows(2) {
        let r = integrate_with_breaks(&mut f, w[0], w[1], &[], panel_tol, DEFAULT_MAX_INTERVALS)?;
        let y = r.value - carry;
        let t = acc + y;
        carry = (t - acc) - y;
        acc = t;
        out.push(acc);
    }
    Ok(out)
}

/// Panel edges covering `[a, b]` with spacing at most `width`, plus the
/// given checkpoints (which are kept as edges).
pub fn panel_edges(a: f64, b: f64, width: f64, checkpoints: &[f64]) -> Vec<f64> {
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let mut edges: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    edges.extend(checkpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(|x, y| x.total_cmp(y));
    edges.dedup();
    edges
}
