//! Pollaczek polynomials `P_n(y)` (parameter 1/2), their rotated real form
//! at `y = -i(k + 1/2)`, Laguerre polynomials, the Pollaczek weight and the
//! closed-form cross-checks (terminating hypergeometric sum, generating
//! function).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate_symmetric, QuadratureSpec};

/// Values of a polynomial family for degrees `0..=degree_max` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSequence<T> {
    values: Vec<T>,
}

impl<T: Copy> PolynomialSequence<T> {
    fn from_values(values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    pub fn degree_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<T> {
        self.values.get(n).copied()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl<T> std::ops::Index<usize> for PolynomialSequence<T> {
    type Output = T;

    fn index(&self, n: usize) -> &T {
        &self.values[n]
    }
}

/// `P_0..P_{degree_max}` at a complex argument, from
/// `(n+1) P_{n+1} = 2y P_n - n P_{n-1}`, `P_{-1} = 0`, `P_0 = 1`.
pub fn pollaczek_complex(degree_max: usize, y: Complex64) -> PolynomialSequence<Complex64> {
    let mut values = Vec::with_capacity(degree_max + 1);
    values.push(Complex64::new(1.0, 0.0));
    let mut prev = Complex64::new(0.0, 0.0);
    for n in 0..degree_max {
        let cur = values[n];
        let next = (2.0 * y * cur - n as f64 * prev) / (n + 1) as f64;
        prev = cur;
        values.push(next);
    }
    PolynomialSequence::from_values(values)
}

/// Real-argument specialisation of [`pollaczek_complex`].
pub fn pollaczek_real(degree_max: usize, y: f64) -> PolynomialSequence<f64> {
    let mut values = Vec::with_capacity(degree_max + 1);
    values.push(1.0);
    let mut prev = 0.0;
    for n in 0..degree_max {
        let cur = values[n];
        let next = (2.0 * y * cur - n as f64 * prev) / (n + 1) as f64;
        prev = cur;
        values.push(next);
    }
    PolynomialSequence::from_values(values)
}

/// `q_n(k)` with `P_n(-i(k + 1/2)) = i^n q_n(k)`.
///
/// `q` obeys the real recurrence `(n+1) q_{n+1} = -(2k+1) q_n + n q_{n-1}`.
/// Its generating function is `(1 - w)^k / (1 + w)^(k+1)`, so `|q_n(k)|`
/// grows like `(2n)^k / k!`.
pub fn pollaczek_rotated(degree_max: usize, k: usize) -> PolynomialSequence<f64> {
    PolynomialSequence::from_values(rotated_scaled(degree_max, k, 1.0))
}

/// `scale * q_n(k)` for `n = 0..=degree_max`.
///
/// The recurrence is linear, so seeding it with `scale` instead of 1 lets
/// callers fold a small prefactor such as `1/k!` in before the values grow.
pub(crate) fn rotated_scaled(degree_max: usize, k: usize, scale: f64) -> Vec<f64> {
    let a = (2 * k + 1) as f64;
    let mut values = Vec::with_capacity(degree_max + 1);
    values.push(scale);
    let mut prev = 0.0;
    for n in 0..degree_max {
        let cur = values[n];
        let next = (-a * cur + n as f64 * prev) / (n + 1) as f64;
        prev = cur;
        values.push(next);
    }
    values
}

/// `P_n(y) = i^n 2F1(-n, 1/2 + iy; 1; 2)` as a terminating sum.
///
/// Independent of the recurrence; used to cross-check it.
pub fn pollaczek_hypergeometric(n: usize, y: Complex64) -> Complex64 {
    let b = Complex64::new(0.5, 0.0) + Complex64::i() * y;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for j in 0..n {
        let jf = j as f64;
        term = term * (jf - n as f64) * (b + jf) * 2.0 / ((jf + 1.0) * (jf + 1.0));
        sum += term;
    }
    Complex64::i().powu(n as u32) * sum
}

/// `sum_n z^n P_n(y) = (1 - iz)^(iy - 1/2) (1 + iz)^(-iy - 1/2)` on `|z| < 1`,
/// principal branches.
pub fn generating_function_closed(z: Complex64, y: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(invalid(format!(
            "generating function needs |z| < 1, got |z| = {}",
            z.norm()
        )));
    }
    let i = Complex64::i();
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let left = ((i * y - half) * (one - i * z).ln()).exp();
    let right = ((-i * y - half) * (one + i * z).ln()).exp();
    Ok(left * right)
}

/// Orthogonality weight `|Gamma(1/2 + iy)|^2 / pi = 1 / cosh(pi y)`.
pub fn pollaczek_weight(y: f64) -> f64 {
    1.0 / (PI * y).cosh()
}

/// Estimate of `int_{|y|>Y} w(y) |P_n(y) P_m(y)| dy`.
pub fn orthonormality_tail(n: usize, m: usize, half_span: f64) -> f64 {
    let d = n.max(m);
    let p = pollaczek_real(d, half_span);
    let growth = (p[n] * p[m]).abs().max(1.0);
    let denom = PI - (n + m) as f64 / half_span;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    4.0 * (-PI * half_span).exp() * growth / denom
}

/// Smallest half span, starting at 12 and growing in steps of 1, whose tail
/// estimate for degrees up to `degree_max` is below `tol / 10`.
pub fn orthonormality_span(degree_max: usize, tol: f64) -> f64 {
    let mut span = 12.0;
    while orthonormality_tail(degree_max, degree_max, span) >= tol / 10.0 && span < 200.0 {
        span += 1.0;
    }
    span
}

/// `|int w(y) P_n(y) P_m(y) dy - delta_{nm}|` over `[-Y, Y]` with a composite
/// Gauss-Legendre rule; `Y = quad.half_span`.
///
/// Fails with [`Error::TailTruncation`] when the neglected tails are larger
/// than `quad.abs_tol`.
pub fn orthonormality_defect(n: usize, m: usize, quad: &QuadratureSpec) -> Result<f64> {
    let tail = orthonormality_tail(n, m, quad.half_span);
    if tail > quad.abs_tol {
        return Err(Error::TailTruncation {
            estimate: tail,
            tolerance: quad.abs_tol,
        });
    }
    let d = n.max(m);
    let integral = integrate_symmetric(
        |y| {
            let p = pollaczek_real(d, y);
            pollaczek_weight(y) * p[n] * p[m]
        },
        quad,
    )?;
    let delta = if n == m { 1.0 } else { 0.0 };
    Ok((integral - delta).abs())
}

/// Laguerre polynomials `L_0..L_{degree_max}` at `x`, from
/// `(n+1) L_{n+1} = (2n + 1 - x) L_n - n L_{n-1}`.
pub fn laguerre(degree_max: usize, x: f64) -> PolynomialSequence<f64> {
    let mut values = Vec::with_capacity(degree_max + 1);
    values.push(1.0);
    let mut prev = 0.0;
    for n in 0..degree_max {
        let cur = values[n];
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - x) * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        values.push(next);
    }
    PolynomialSequence::from_values(values)
}
