//! Resummed expansion of `g(x) = sum_n (-1)^n mu_n x^n / n!`.
//!
//! With `u_n = sqrt(2) sum_k (-1)^k mu_k / k! * P_n(-i(k + 1/2))`,
//!
//! ```text
//! g(x) = sqrt(2)/(x+1) * sum_n u_n i^n ((x-1)/(x+1))^n,   x > 0.
//! ```
//!
//! Every `u_n` is stored as the real number `u_hat_n = u_n / i^n`, so the
//! phase in the sum becomes `i^n i^n = (-1)^n`.
//!
//! With finitely many noisy moments the coefficients eventually grow like
//! `(2m)^k0 / k0!`, and the cumulative sum of their squares `M_m` shows a
//! plateau before that growth takes over. The right end of the last plateau
//! is the truncation order `m0`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::moments::MomentSequence;
use crate::numerics::CompensatedSum;
use crate::polynomials::rotated_scaled;

/// Rotated resummation coefficients `u_hat_0..u_hat_{n_max}` and their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    rotated_values: Vec<f64>,
    k0: usize,
    eta: f64,
    scale_c: f64,
}

impl CoefficientSet {
    /// Builds a set from known values (for instance exact coefficients).
    pub fn from_values(rotated_values: Vec<f64>, k0: usize, eta: f64, scale_c: f64) -> Result<Self> {
        if rotated_values.is_empty() {
            return Err(invalid("coefficient set must not be empty"));
        }
        if !(scale_c >= 1.0) {
            return Err(invalid(format!("scale c must be >= 1, got {scale_c}")));
        }
        Ok(Self {
            rotated_values,
            k0,
            eta,
            scale_c,
        })
    }

    pub fn rotated_values(&self) -> &[f64] {
        &self.rotated_values
    }

    pub fn n_max(&self) -> usize {
        self.rotated_values.len() - 1
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c
    }

    /// `|u_n|`, equal to `|u_hat_n|`.
    pub fn modulus(&self, n: usize) -> f64 {
        self.rotated_values[n].abs()
    }

    /// CSV with header `n,u_hat`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "u_hat"])?;
        for (n, u) in self.rotated_values.iter().enumerate() {
            w.write_record([n.to_string(), format!("{u:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `M_m = sum_{n <= m} u_hat_n^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumCurve {
    sums: Vec<f64>,
    k0: usize,
    eta: f64,
}

impl PartialSumCurve {
    /// Wraps an externally built curve; it must be nondecreasing and nonnegative.
    pub fn from_sums(sums: Vec<f64>, k0: usize, eta: f64) -> Result<Self> {
        if sums.is_empty() {
            return Err(invalid("partial-sum curve must not be empty"));
        }
        if sums.iter().any(|&m| !(m >= 0.0)) || sums.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("partial sums must be nonnegative and nondecreasing"));
        }
        Ok(Self { sums, k0, eta })
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn m_max(&self) -> usize {
        self.sums.len() - 1
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// CSV with header `m,M`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "M"])?;
        for (m, s) in self.sums.iter().enumerate() {
            w.write_record([m.to_string(), format!("{s:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Plateau detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Last index of `M_m` inspected.
    pub m_max: usize,
    /// A step is flat when `|log10 M_m - log10 M_{m-1}| < deriv_tol`.
    pub deriv_tol: f64,
    /// Plateaux with fewer points are discarded.
    pub min_plateau_len: usize,
    /// The asymptotic regime starts once `M_m >= M_ref / asympt_factor`.
    pub asympt_factor: f64,
}

impl TruncationConfig {
    pub fn for_k0(k0: usize) -> Self {
        Self {
            m_max: (3 * k0).max(60),
            deriv_tol: 0.01,
            min_plateau_len: 3,
            asympt_factor: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_plateau_len < 1 || self.m_max < self.min_plateau_len {
            return Err(invalid("need m_max >= min_plateau_len >= 1"));
        }
        if !(self.deriv_tol > 0.0) {
            return Err(invalid("deriv_tol must be > 0"));
        }
        if !(self.asympt_factor > 0.0 && self.asympt_factor <= 1.0) {
            return Err(invalid("asympt_factor must lie in (0, 1]"));
        }
        Ok(())
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self::for_k0(20)
    }
}

/// Outcome of the plateau analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub m0: usize,
    pub m_alpha: usize,
    /// Inclusive index intervals `[lo, hi]`, all below `m_alpha`.
    pub plateaux: Vec<[usize; 2]>,
    /// Mean of `M_m` over the chosen plateau.
    pub plateau_level: f64,
    pub k0: usize,
    pub config: TruncationConfig,
}

fn inverse_factorials(k0: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k0 + 1);
    let mut v = 1.0;
    out.push(v);
    for k in 1..=k0 {
        v /= k as f64;
        out.push(v);
    }
    out
}

fn coefficients_from(moments: &[f64], n_max: usize) -> Result<Vec<f64>> {
    let inv_fact = inverse_factorials(moments.len() - 1);
    let mut acc = vec![CompensatedSum::new(); n_max + 1];
    for (k, (&mu, &f)) in moments.iter().zip(&inv_fact).enumerate() {
        if mu == 0.0 || f == 0.0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        // q_n(k) / k! through the recurrence keeps the product representable.
        let q = rotated_scaled(n_max, k, f);
        let w = std::f64::consts::SQRT_2 * sign * mu;
        for (a, qn) in acc.iter_mut().zip(&q) {
            a.add(w * qn);
        }
    }
    acc.iter()
        .enumerate()
        .map(|(n, a)| {
            let v = a.value();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Overflow { n })
            }
        })
        .collect()
}

/// `u_hat_n = sqrt(2) sum_{k <= k0} (-1)^k / k! * mu_k * q_n(k)` for `n <= n_max`.
pub fn compute_coefficients(seq: &MomentSequence, n_max: usize) -> Result<CoefficientSet> {
    let values = coefficients_from(seq.values(), n_max)?;
    Ok(CoefficientSet {
        rotated_values: values,
        k0: seq.k0(),
        eta: seq.eta(),
        scale_c: 1.0,
    })
}

/// Coefficients of the expansion in `c/r`: moments are replaced by `mu_k c^-k`.
pub fn scaled_coefficients(seq: &MomentSequence, c: f64, n_max: usize) -> Result<CoefficientSet> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(invalid(format!("scale c must be finite and >= 1, got {c}")));
    }
    let mut scale = 1.0;
    let scaled: Vec<f64> = seq
        .values()
        .iter()
        .map(|mu| {
            let v = mu * scale;
            scale /= c;
            v
        })
        .collect();
    let values = coefficients_from(&scaled, n_max)?;
    Ok(CoefficientSet {
        rotated_values: values,
        k0: seq.k0(),
        eta: seq.eta(),
        scale_c: c,
    })
}

pub fn partial_sums(coeffs: &CoefficientSet, m_max: usize) -> Result<PartialSumCurve> {
    if m_max > coeffs.n_max() {
        return Err(invalid(format!(
            "m_max = {m_max} exceeds the {} available coefficients",
            coeffs.n_max() + 1
        )));
    }
    let mut acc = CompensatedSum::new();
    let sums = coeffs.rotated_values[..=m_max]
        .iter()
        .map(|u| {
            acc.add(u * u);
            acc.value()
        })
        .collect();
    Ok(PartialSumCurve {
        sums,
        k0: coeffs.k0,
        eta: coeffs.eta,
    })
}

/// `log10((2m)^(2 k0) / (k0!)^2)`.
pub fn log10_asymptotic_bound(m: usize, k0: usize) -> f64 {
    if k0 == 0 {
        return 0.0;
    }
    if m == 0 {
        return f64::NEG_INFINITY;
    }
    let log_fact: f64 = (2..=k0).map(|j| (j as f64).log10()).sum();
    2.0 * k0 as f64 * (2.0 * m as f64).log10() - 2.0 * log_fact
}

/// Leading large-`m` growth `(2m)^(2 k0) / (k0!)^2` of `M_m`, evaluated in
/// log space (it may still overflow to infinity on the way out).
pub fn asymptotic_bound(m: usize, k0: usize) -> f64 {
    10f64.powf(log10_asymptotic_bound(m, k0))
}

fn flat_step(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if a <= 0.0 || b <= 0.0 {
        return false;
    }
    (b.log10() - a.log10()).abs() < tol
}

/// Locates plateaux of `M_m` and picks the truncation order.
///
/// The asymptotic onset `m_alpha` is the first `m` where `M_m` has climbed
/// `1 / asympt_factor` above the first nonzero partial sum. Plateaux are
/// maximal runs of flat steps strictly below `m_alpha` holding at least
/// `min_plateau_len` points; `m0` is the right end of the last one.
pub fn detect_truncation(curve: &PartialSumCurve, cfg: &TruncationConfig, k0: usize) -> Result<TruncationReport> {
    cfg.validate()?;
    if curve.m_max() < cfg.m_max {
        return Err(invalid(format!(
            "curve holds {} points, detector needs m_max = {}",
            curve.sums.len(),
            cfg.m_max
        )));
    }
    if cfg.m_max + 1 < cfg.min_plateau_len + 2 {
        return Err(invalid("curve too short for plateau detection"));
    }
    let sums = &curve.sums[..=cfg.m_max];

    let m_alpha = match sums.iter().position(|&m| m > 0.0) {
        None => cfg.m_max + 1,
        Some(r) => {
            let threshold = sums[r].log10() - cfg.asympt_factor.log10();
            (r + 1..=cfg.m_max)
                .find(|&m| sums[m].log10() >= threshold)
                .unwrap_or(cfg.m_max + 1)
        }
    };

    let mut plateaux = Vec::new();
    let mut start: Option<usize> = None;
    for m in 1..m_alpha {
        if flat_step(sums[m - 1], sums[m], cfg.deriv_tol) {
            start.get_or_insert(m - 1);
        } else if let Some(lo) = start.take() {
            plateaux.push([lo, m - 1]);
        }
    }
    if let Some(lo) = start {
        plateaux.push([lo, m_alpha - 1]);
    }
    plateaux.retain(|[lo, hi]| hi - lo + 1 >= cfg.min_plateau_len);

    let [lo, hi] = *plateaux.last().ok_or(Error::NoPlateau { m_alpha })?;
    let plateau_level = sums[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    Ok(TruncationReport {
        m0: hi,
        m_alpha,
        plateaux,
        plateau_level,
        k0,
        config: *cfg,
    })
}

fn resummed_sum(ratio: f64, values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut power = 1.0;
    for (n, u) in values.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * u * power);
        power *= ratio;
    }
    acc.value()
}

/// `sqrt(2)/(x+1) sum_{n <= m0} (-1)^n u_hat_n ((x-1)/(x+1))^n`.
pub fn evaluate_resummed(x: f64, coeffs: &CoefficientSet, m0: usize) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("resummed expansion needs finite x > 0, got {x}")));
    }
    if coeffs.scale_c != 1.0 {
        return Err(invalid("scaled coefficients must be evaluated with evaluate_scaled"));
    }
    if m0 > coeffs.n_max() {
        return Err(invalid(format!("m0 = {m0} exceeds n_max = {}", coeffs.n_max())));
    }
    let ratio = (x - 1.0) / (x + 1.0);
    Ok(std::f64::consts::SQRT_2 / (x + 1.0) * resummed_sum(ratio, &coeffs.rotated_values[..=m0]))
}

/// `g(1/r)` from coefficients scaled by `c`: the same sum in the variable `c/r`.
pub fn evaluate_scaled(r: f64, coeffs: &CoefficientSet, m0: usize) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(invalid(format!("scaled expansion needs finite r >= 1, got {r}")));
    }
    if m0 > coeffs.n_max() {
        return Err(invalid(format!("m0 = {m0} exceeds n_max = {}", coeffs.n_max())));
    }
    let y = coeffs.scale_c / r;
    let ratio = (y - 1.0) / (y + 1.0);
    Ok(std::f64::consts::SQRT_2 / (y + 1.0) * resummed_sum(ratio, &coeffs.rotated_values[..=m0]))
}

/// The truncated original series `sum_{n <= n0} (-1)^n mu_n x^n / n!`.
pub fn evaluate_standard(x: f64, seq: &MomentSequence, n0: usize) -> Result<f64> {
    if n0 > seq.k0() {
        return Err(invalid(format!("n0 = {n0} exceeds k0 = {}", seq.k0())));
    }
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    for (n, mu) in seq.values()[..=n0].iter().enumerate() {
        if n > 0 {
            term *= -x / n as f64;
        }
        acc.add(term * mu);
    }
    Ok(acc.value())
}
