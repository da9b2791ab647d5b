//! Reconstruction of the density `u(t)` from finitely many noisy moments.
//!
//! The same coefficients that drive the resummation expand `u` in the
//! orthonormal Laguerre functions `Phi_n(t) = i^n sqrt(2) e^{-t} L_n(2t)` of
//! `L^2(0, inf)`. Truncating at `m0` is the only regularisation applied.

use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::moments::{DensitySpec, MomentSequence};
use crate::numerics::{integrate, trapezoid, CompensatedSum, QuadratureSpec};
use crate::polynomials::laguerre;
use crate::resummation::CoefficientSet;

/// Samples of a reconstructed density on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub m0_used: usize,
    pub k0: usize,
    pub eta: f64,
}

impl ReconstructionResult {
    /// CSV with header `t,u`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "u"])?;
        for (t, u) in self.grid.iter().zip(&self.values) {
            w.write_record([format!("{t:e}"), format!("{u:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `phi_hat_n(t) = sqrt(2) e^{-t} L_n(2t)` for `n <= degree_max`, so that
/// `Phi_n = i^n phi_hat_n`.
pub fn basis_phi_rotated(degree_max: usize, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(invalid(format!("basis needs t >= 0, got {t}")));
    }
    let scale = std::f64::consts::SQRT_2 * (-t).exp();
    Ok(laguerre(degree_max, 2.0 * t)
        .into_values()
        .into_iter()
        .map(|l| scale * l)
        .collect())
}

/// `sum_{n <= m0} (-1)^n u_hat_n phi_hat_n(t)` at a single point.
pub fn evaluate_reconstruction(coeffs: &CoefficientSet, m0: usize, t: f64) -> Result<f64> {
    if m0 > coeffs.n_max() {
        return Err(invalid(format!("m0 = {m0} exceeds n_max = {}", coeffs.n_max())));
    }
    let phi = basis_phi_rotated(m0, t)?;
    let mut acc = CompensatedSum::new();
    for (n, (u, p)) in coeffs.rotated_values().iter().zip(&phi).enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * u * p);
    }
    Ok(acc.value())
}

/// Uniform grid on `[0, 5]` with 1001 points.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(0.0, 5.0, 1001)
}

pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let h = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + i as f64 * h).collect()
}

pub fn reconstruct_density(coeffs: &CoefficientSet, m0: usize, grid: &[f64]) -> Result<ReconstructionResult> {
    if grid.is_empty() {
        return Err(invalid("reconstruction grid is empty"));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("grid must be nonnegative and strictly increasing"));
    }
    let values = grid
        .iter()
        .map(|&t| evaluate_reconstruction(coeffs, m0, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReconstructionResult {
        grid: grid.to_vec(),
        values,
        m0_used: m0,
        k0: coeffs.k0(),
        eta: coeffs.eta(),
    })
}

/// Largest grid spacing accepted for an expansion truncated at `m0`:
/// a quarter of the typical node spacing of `L_{m0}(2t)` near the origin.
pub fn required_spacing(m0: usize) -> f64 {
    1.0 / (4.0 * (m0 + 1) as f64)
}

/// `||u_rec - u_ref||` in `L^2[0, upper]`, by the trapezoidal rule on the
/// reconstruction grid.
pub fn l2_error(result: &ReconstructionResult, reference: &DensitySpec, upper: f64) -> Result<f64> {
    if !(upper > 0.0) {
        return Err(invalid("upper limit must be > 0"));
    }
    let grid = &result.grid;
    if grid[0] > 0.0 || *grid.last().unwrap() < upper {
        return Err(invalid(format!(
            "grid [{}, {}] does not cover [0, {upper}]",
            grid[0],
            grid.last().unwrap()
        )));
    }
    let end = grid.partition_point(|&t| t <= upper);
    let ts = &grid[..end];
    let spacing = ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let required = required_spacing(result.m0_used);
    if ts.len() < 3 || spacing > required * (1.0 + 1e-9) {
        return Err(Error::InsufficientGrid { spacing, required });
    }
    let sq: Vec<f64> = ts
        .iter()
        .zip(&result.values[..end])
        .map(|(&t, &v)| (v - reference.eval(t)).powi(2))
        .collect();
    Ok(trapezoid(ts, &sq).sqrt())
}

/// `|mu_tilde_k - mu_k|` for `k <= k_check`, where `mu_tilde_k` are moments
/// of the reconstruction over the Hausdorff support `[0, 1]`.
pub fn moment_round_trip(
    coeffs: &CoefficientSet,
    m0: usize,
    moments: &MomentSequence,
    k_check: usize,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if k_check > 8 {
        return Err(invalid("moment round trip supports k_check <= 8"));
    }
    if k_check > moments.k0() {
        return Err(invalid(format!("k_check = {k_check} exceeds k0 = {}", moments.k0())));
    }
    if m0 > coeffs.n_max() {
        return Err(invalid(format!("m0 = {m0} exceeds n_max = {}", coeffs.n_max())));
    }
    let rec = |t: f64| evaluate_reconstruction(coeffs, m0, t).unwrap_or(f64::NAN);
    (0..=k_check)
        .map(|k| {
            let e = integrate(|t| t.powi(k as i32) * rec(t), 0.0, 1.0, quad)?;
            Ok((e.value - moments.values()[k]).abs())
        })
        .collect()
}
