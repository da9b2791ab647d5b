//! Numerical plumbing shared by the rest of the crate: compensated
//! summation and one-dimensional quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Neumaier's variant of Kahan summation.
///
/// Unlike plain Kahan it also compensates when the incoming term is larger
/// in magnitude than the running sum, which is the normal situation for
/// alternating series with large intermediate terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Quadrature controls.
///
/// The adaptive routines use `abs_tol`, `rel_tol` and `max_subdivisions`;
/// the fixed composite rule over a symmetric interval uses `half_span` and
/// `nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub half_span: f64,
    pub nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
            half_span: 12.0,
            nodes: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Estimate { value, error }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Subintervals are bisected in order of decreasing error estimate until
/// the total error meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let first = gk15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::QuadratureNonConvergent {
            estimate: f64::INFINITY,
            tolerance: spec.target(0.0),
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, est: first });
    let mut total = first;
    let mut count = 1;
    loop {
        if total.error <= spec.target(total.value) {
            break;
        }
        if count >= spec.max_subdivisions {
            return Err(Error::QuadratureNonConvergent {
                estimate: total.error,
                tolerance: spec.target(total.value),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be bisected in floating point.
            return Err(Error::QuadratureNonConvergent {
                estimate: total.error,
                tolerance: spec.target(total.value),
            });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::QuadratureNonConvergent {
                estimate: f64::INFINITY,
                tolerance: spec.target(total.value),
            });
        }
        heap.push(Segment {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            est: right,
        });
        count += 1;
        // Re-sum from scratch so cancellation in the running totals cannot drift.
        let mut value = CompensatedSum::new();
        let mut error = CompensatedSum::new();
        for s in heap.iter() {
            value.add(s.est.value);
            error.add(s.est.error);
        }
        total = Estimate {
            value: value.value(),
            error: error.value(),
        };
    }
    Ok(total)
}

/// Adaptive integration over consecutive pieces `[p0, p1], [p1, p2], ...`.
///
/// Use it to place breakpoints at known kinks or jumps of the integrand.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    let piece_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / pieces,
        ..*spec
    };
    for w in points.windows(2) {
        let e = integrate(&f, w[0], w[1], &piece_spec)?;
        value.add(e.value);
        error += e.error;
    }
    Ok(Estimate {
        value: value.value(),
        error,
    })
}

/// Integrates `f` over `[a, inf)` through the substitution `s = a + (1 - x) / x`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let g = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let s = a + (1.0 - x) / x;
        let v = f(s);
        if v == 0.0 {
            0.0
        } else {
            v / (x * x)
        }
    };
    integrate(g, 0.0, 1.0, spec)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const PANEL_ORDER: usize = 10;

/// Composite Gauss-Legendre rule over `[-half_span, half_span]` with
/// (about) `nodes` evaluation points.
pub fn integrate_symmetric<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    if !(spec.half_span > 0.0) || spec.nodes < PANEL_ORDER {
        return Err(invalid(
            "symmetric quadrature needs half_span > 0 and at least 10 nodes",
        ));
    }
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let panels = spec.nodes / PANEL_ORDER;
    let h = 2.0 * spec.half_span / panels as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let a = -spec.half_span + p as f64 * h;
        let c = a + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc.add(0.5 * h * wi * f(c + 0.5 * h * xi));
        }
    }
    Ok(acc.value())
}

/// Trapezoidal rule on a sampled, strictly increasing grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .collect::<CompensatedSum>()
        .value()
}
