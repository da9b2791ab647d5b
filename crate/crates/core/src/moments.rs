//! Hausdorff moment sequences: generators, ingestion, noise, finite
//! differences and the interpolation integral `mu(z) = int_0^1 t^z u(t) dt`.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate, integrate_semi_infinite, CompensatedSum, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentSource {
    Cesaro { ell: f64 },
    Holder { ell: f64 },
    Density,
    External,
}

impl fmt::Display for MomentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentSource::Cesaro { ell } => write!(f, "cesaro {ell}"),
            MomentSource::Holder { ell } => write!(f, "holder {ell}"),
            MomentSource::Density => f.write_str("density"),
            MomentSource::External => f.write_str("external"),
        }
    }
}

/// Moments `mu_0..mu_k0`, possibly perturbed by noise of magnitude `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<f64>,
    eta: f64,
    source: MomentSource,
    seed: Option<u64>,
}

impl MomentSequence {
    /// Wraps externally supplied moments. `eta` is the caller's bound on their error.
    pub fn new(values: Vec<f64>, eta: f64, source: MomentSource) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("a moment sequence needs at least mu_0"));
        }
        if !(eta >= 0.0) {
            return Err(invalid(format!("noise magnitude must be >= 0, got {eta}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("moments must be finite"));
        }
        Ok(Self {
            values,
            eta,
            source,
            seed: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k0(&self) -> usize {
        self.values.len() - 1
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Keeps only `mu_0..mu_k0`.
    pub fn truncated(&self, k0: usize) -> Result<Self> {
        if k0 > self.k0() {
            return Err(invalid(format!(
                "cannot truncate to k0 = {k0}, only {} available",
                self.k0()
            )));
        }
        Ok(Self {
            values: self.values[..=k0].to_vec(),
            ..self.clone()
        })
    }

    /// CSV with header `k,mu`, shortest round-trip decimal representation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "mu"])?;
        for (k, mu) in self.values.iter().enumerate() {
            w.write_record([k.to_string(), format!("{mu:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `k,mu` CSV; rows must be listed in order `k = 0, 1, 2, ...`.
    pub fn read_csv<R: Read>(input: R, eta: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "k" || &headers[1] != "mu" {
            return Err(Error::Format(format!("expected header k,mu, got {:?}", headers)));
        }
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let k: usize = rec[0]
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("row {i}: bad index: {e}")))?;
            if k != i {
                return Err(Error::Format(format!("row {i}: expected k = {i}, found {k}")));
            }
            let mu: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("row {i}: bad moment: {e}")))?;
            values.push(mu);
        }
        Self::new(values, eta, MomentSource::External)
    }

    pub fn sidecar(&self) -> MomentSidecar {
        let ell = match self.source {
            MomentSource::Cesaro { ell } | MomentSource::Holder { ell } => Some(ell),
            _ => None,
        };
        MomentSidecar {
            source: self.source.to_string(),
            ell,
            k0: self.k0(),
            eta: self.eta,
            seed: self.seed,
        }
    }
}

/// JSON metadata written next to a moment CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSidecar {
    pub source: String,
    pub ell: Option<f64>,
    pub k0: usize,
    pub eta: f64,
    pub seed: Option<u64>,
}

type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum DensityKind {
    Zero,
    Uniform,
    Cesaro { ell: f64 },
    Holder { ell: f64, norm: f64 },
    Tabulated { t: Vec<f64>, u: Vec<f64> },
    Custom(DensityFn),
}

/// A weight `u(t)` on `[0, support_end]`, zero beyond.
#[derive(Clone)]
pub struct DensitySpec {
    kind: DensityKind,
    support_end: f64,
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            DensityKind::Zero => "zero".to_string(),
            DensityKind::Uniform => "uniform".to_string(),
            DensityKind::Cesaro { ell } => format!("cesaro({ell})"),
            DensityKind::Holder { ell, .. } => format!("holder({ell})"),
            DensityKind::Tabulated { t, .. } => format!("tabulated({} points)", t.len()),
            DensityKind::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("DensitySpec")
            .field("kind", &kind)
            .field("support_end", &self.support_end)
            .finish()
    }
}

impl DensitySpec {
    pub fn zero() -> Self {
        Self {
            kind: DensityKind::Zero,
            support_end: 1.0,
        }
    }

    /// `u = 1` on `[0, 1]`.
    pub fn uniform() -> Self {
        Self {
            kind: DensityKind::Uniform,
            support_end: 1.0,
        }
    }

    /// `u(t) = ell (1 - t)^(ell - 1)` on `[0, 1]`, whose moments are
    /// `binom(k + ell, ell)^-1` and whose Laplace transform is `Phi(1, ell + 1; -x)`.
    pub fn cesaro(ell: f64) -> Result<Self> {
        check_ell(ell)?;
        Ok(Self {
            kind: DensityKind::Cesaro { ell },
            support_end: 1.0,
        })
    }

    /// `u(t) = (-ln t)^(ell - 1) / Gamma(ell)` on `[0, 1]`, with moments `(k + 1)^-ell`.
    pub fn holder(ell: f64) -> Result<Self> {
        check_ell(ell)?;
        Ok(Self {
            kind: DensityKind::Holder {
                ell,
                norm: 1.0 / gamma(ell),
            },
            support_end: 1.0,
        })
    }

    /// Piecewise-linear interpolation of samples; zero outside `[t_0, t_last]`.
    pub fn tabulated(t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if t.len() != u.len() || t.len() < 2 {
            return Err(invalid("tabulated density needs >= 2 matching samples"));
        }
        if t[0] < 0.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated abscissae must be >= 0 and strictly increasing"));
        }
        let support_end = *t.last().unwrap();
        Ok(Self {
            kind: DensityKind::Tabulated { t, u },
            support_end,
        })
    }

    pub fn custom<F>(f: F, support_end: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support_end > 0.0) {
            return Err(invalid("support_end must be > 0"));
        }
        Ok(Self {
            kind: DensityKind::Custom(Arc::new(f)),
            support_end,
        })
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.support_end {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Zero => 0.0,
            DensityKind::Uniform => 1.0,
            DensityKind::Cesaro { ell } => {
                if *ell == 1.0 {
                    1.0
                } else {
                    ell * (1.0 - t).powf(ell - 1.0)
                }
            }
            DensityKind::Holder { ell, norm } => {
                if *ell == 1.0 {
                    1.0
                } else {
                    norm * (-t.ln()).powf(ell - 1.0)
                }
            }
            DensityKind::Tabulated { t: ts, u } => {
                let i = ts.partition_point(|&x| x <= t);
                if i == 0 {
                    0.0
                } else if i == ts.len() {
                    u[ts.len() - 1]
                } else {
                    let (t0, t1) = (ts[i - 1], ts[i]);
                    u[i - 1] + (u[i] - u[i - 1]) * (t - t0) / (t1 - t0)
                }
            }
            DensityKind::Custom(f) => f(t),
        }
    }
}

fn check_ell(ell: f64) -> Result<()> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(invalid(format!("ell must be > 0, got {ell}")));
    }
    Ok(())
}

/// `mu_k = Gamma(ell+1) Gamma(k+1) / Gamma(k+ell+1)`, i.e. `binom(k+ell, ell)^-1`.
///
/// Built from the ratio `mu_k = mu_{k-1} k / (k + ell)`.
pub fn cesaro_moments(ell: f64, k0: usize) -> Result<MomentSequence> {
    check_ell(ell)?;
    let mut values = Vec::with_capacity(k0 + 1);
    let mut mu = 1.0;
    values.push(mu);
    for k in 1..=k0 {
        mu *= k as f64 / (k as f64 + ell);
        values.push(mu);
    }
    Ok(MomentSequence {
        values,
        eta: 0.0,
        source: MomentSource::Cesaro { ell },
        seed: None,
    })
}

/// `mu_n = (n + 1)^-ell`.
pub fn holder_moments(ell: f64, k0: usize) -> Result<MomentSequence> {
    check_ell(ell)?;
    let values = (0..=k0).map(|n| ((n + 1) as f64).powf(-ell)).collect();
    Ok(MomentSequence {
        values,
        eta: 0.0,
        source: MomentSource::Holder { ell },
        seed: None,
    })
}

/// `mu_k = int_0^1 t^k u(t) dt` by adaptive quadrature.
pub fn moments_from_density(density: &DensitySpec, k0: usize, quad: &QuadratureSpec) -> Result<MomentSequence> {
    if density.support_end() > 1.0 {
        return Err(invalid(format!(
            "Hausdorff moments need support in [0, 1], got support_end = {}",
            density.support_end()
        )));
    }
    let end = density.support_end();
    let values = (0..=k0)
        .map(|k| integrate(|t| t.powi(k as i32) * density.eval(t), 0.0, end, quad).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence {
        values,
        eta: 0.0,
        source: MomentSource::Density,
        seed: None,
    })
}

/// Adds independent uniform noise on `[-eta, eta]` to every moment.
///
/// The stream comes from ChaCha8 seeded with `seed`, so equal seeds give
/// identical sequences on every platform.
pub fn add_noise(seq: &MomentSequence, eta: f64, seed: u64) -> Result<MomentSequence> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(invalid(format!("noise magnitude must be finite and >= 0, got {eta}")));
    }
    let values = if eta == 0.0 {
        seq.values.clone()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-eta, eta);
        seq.values.iter().map(|mu| mu + dist.sample(&mut rng)).collect()
    };
    Ok(MomentSequence {
        values,
        eta,
        source: seq.source,
        seed: Some(seed),
    })
}

/// `Delta^order mu_n = sum_m (-1)^m binom(order, m) mu_{n+order-m}` for
/// every `n` with `n + order <= k0`.
pub fn finite_differences(seq: &MomentSequence, order: usize) -> Result<Vec<f64>> {
    if order > seq.k0() {
        return Err(invalid(format!(
            "difference of order {order} needs moments beyond k0 = {}",
            seq.k0()
        )));
    }
    let mut d = seq.values.clone();
    for _ in 0..order {
        d = d.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(d)
}

/// `Delta^order mu_n` for a single `n`.
pub fn finite_difference_at(seq: &MomentSequence, order: usize, n: usize) -> Result<f64> {
    if n + order > seq.k0() {
        return Err(invalid(format!(
            "Delta^{order} mu_{n} needs mu_{} beyond k0 = {}",
            n + order,
            seq.k0()
        )));
    }
    let mut binom = 1.0;
    let mut acc = CompensatedSum::new();
    for m in 0..=order {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binom * seq.values[n + order - m]);
        binom = binom * (order - m) as f64 / (m + 1) as f64;
    }
    Ok(acc.value())
}

/// `(n+1)^(p-1) sum_i |binom(n,i) (-1)^(n-i) Delta^(n-i) mu_i|^p` at one `n`.
///
/// A finite-`n` boundedness indicator for the representability condition;
/// it says nothing about the supremum over all `n`.
pub fn hausdorff_condition_diagnostic(seq: &MomentSequence, p: f64, n: usize) -> Result<f64> {
    if !(p > 1.0) {
        return Err(invalid(format!("p must be > 1, got {p}")));
    }
    if n > seq.k0() {
        return Err(invalid(format!("n = {n} exceeds k0 = {}", seq.k0())));
    }
    let mut binom = 1.0;
    let mut acc = CompensatedSum::new();
    for i in 0..=n {
        let d = finite_difference_at(seq, n - i, i)?;
        acc.add((binom * d).abs().powf(p));
        binom = binom * (n - i) as f64 / (i + 1) as f64;
    }
    Ok(((n + 1) as f64).powf(p - 1.0) * acc.value())
}

/// `mu(z) = int_0^1 t^z u(t) dt`, for `Re z >= -1/2`.
///
/// Evaluated as `int_0^inf e^{-(z+1)s} u(e^{-s}) ds` (with `t = e^{-s}`),
/// which removes the `t^z` singularity at the origin.
pub fn mu_interpolation(density: &DensitySpec, z: Complex64, quad: &QuadratureSpec) -> Result<Complex64> {
    if z.re < -0.5 {
        return Err(invalid(format!("mu(z) needs Re z >= -1/2, got {}", z.re)));
    }
    if density.support_end() > 1.0 {
        return Err(invalid("mu(z) needs a density supported in [0, 1]"));
    }
    // Start the s-integral at the support end: u(e^-s) = 0 for s < -ln(end).
    let s0 = -density.support_end().ln();
    let kernel = |s: f64| {
        let t = (-s).exp();
        // past the underflow of t the weight is below e^{-372}
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = density.eval(t);
        if u == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (-(z + 1.0) * s).exp() * u
    };
    let re = integrate_semi_infinite(|s| kernel(s).re, s0, quad)?;
    let im = if z.im == 0.0 {
        0.0
    } else {
        integrate_semi_infinite(|s| kernel(s).im, s0, quad)?.value
    };
    Ok(Complex64::new(re.value, im))
}
