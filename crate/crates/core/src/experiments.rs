//! Reference functions, error metrics and the scripted experiment sweeps
//! behind the command-line tool.
//!
//! Every sweep writes plain CSV (plus JSON for truncation reports and the
//! manifest) so the curves can be plotted with any external tool.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::inversion::{default_grid, l2_error, reconstruct_density};
use crate::moments::{add_noise, cesaro_moments, DensitySpec, MomentSequence};
use crate::numerics::{compensated_sum, integrate, QuadratureSpec};
use crate::resummation::{
    compute_coefficients, detect_truncation, evaluate_resummed, evaluate_standard, partial_sums, CoefficientSet,
    PartialSumCurve, TruncationConfig, TruncationReport,
};

/// `Phi(1, ell + 1; -x) = int_0^1 e^{-xt} ell (1 - t)^(ell - 1) dt`.
///
/// Integrated in `w = (1 - t)^ell`, which turns the integrand into the
/// bounded `exp(-x (1 - w^(1/ell)))` for every `ell > 0`.
pub fn hypergeometric_oracle(ell: f64, x: f64) -> Result<f64> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(invalid(format!("ell must be > 0, got {ell}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("oracle needs finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let quad = QuadratureSpec::with_tolerance(1e-15, 1e-13);
    let inv = 1.0 / ell;
    let e = integrate(|w: f64| (-x * (1.0 - w.powf(inv))).exp(), 0.0, 1.0, &quad)?;
    Ok(e.value)
}

/// The defining series `sum_n (-1)^n x^n / n! / binom(n + ell, ell)`, summed
/// until the terms stop mattering. Only meant for moderate `x`.
pub fn hypergeometric_series(ell: f64, x: f64) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(invalid(format!("ell must be > 0, got {ell}")));
    }
    let mut terms = Vec::new();
    let mut term = 1.0;
    let mut n = 0usize;
    loop {
        terms.push(term);
        n += 1;
        // ratio of consecutive terms: -x / (n + ell)
        term *= -x / (n as f64 + ell);
        if term.abs() < 1e-18 * terms[0].abs() || n > 10_000 {
            break;
        }
    }
    Ok(compensated_sum(terms))
}

/// Pointwise relative errors plus aggregate metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub x: Vec<f64>,
    pub approx: Vec<f64>,
    pub truth: Vec<f64>,
    pub rel_error: Vec<f64>,
    /// RMS of `approx - truth` over the range.
    pub rms: f64,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
}

pub fn relative_error_curve<A, O>(approx: A, oracle: O, xs: &[f64]) -> Result<ErrorReport>
where
    A: Fn(f64) -> Result<f64>,
    O: Fn(f64) -> Result<f64>,
{
    if xs.is_empty() {
        return Err(invalid("empty x range"));
    }
    let mut a = Vec::with_capacity(xs.len());
    let mut t = Vec::with_capacity(xs.len());
    for &x in xs {
        let truth = oracle(x)?;
        if truth == 0.0 {
            return Err(Error::OracleZero { x });
        }
        a.push(approx(x)?);
        t.push(truth);
    }
    let rel_error: Vec<f64> = a.iter().zip(&t).map(|(a, t)| ((a - t) / t).abs()).collect();
    let pairs: Vec<(f64, f64)> = a.iter().copied().zip(t.iter().copied()).collect();
    let rms = rms_error(&pairs)?;
    let max_abs_error = pairs.iter().map(|(a, t)| (a - t).abs()).fold(0.0, f64::max);
    let max_rel_error = rel_error.iter().copied().fold(0.0, f64::max);
    Ok(ErrorReport {
        x: xs.to_vec(),
        approx: a,
        truth: t,
        rel_error,
        rms,
        max_abs_error,
        max_rel_error,
    })
}

/// `sqrt(mean((approx - true)^2))`.
pub fn rms_error(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(invalid("rms of an empty list"));
    }
    let ss = compensated_sum(pairs.iter().map(|(a, b)| (a - b) * (a - b)));
    Ok((ss / pairs.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl XRange {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let r = Self { lo, hi, count };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0) || !(self.hi > self.lo) || !self.hi.is_finite() {
            return Err(invalid(format!(
                "x range needs 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.count < 2 {
            return Err(invalid("x range needs at least 2 points"));
        }
        Ok(())
    }

    /// Logarithmic spacing when `hi / lo > 10`, linear otherwise.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.count - 1;
        if self.hi / self.lo > 10.0 {
            let (a, b) = (self.lo.ln(), self.hi.ln());
            (0..=n)
                .map(|i| {
                    if i == n {
                        self.hi
                    } else {
                        (a + (b - a) * i as f64 / n as f64).exp()
                    }
                })
                .collect()
        } else {
            (0..=n)
                .map(|i| {
                    if i == n {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / n as f64
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig2,
    Fig3,
    Fig4,
    Custom,
}

/// One sweep. The JSON form uses exactly these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub ell: f64,
    pub k0: usize,
    pub eta: Vec<f64>,
    pub seeds: Vec<u64>,
    pub x_range: XRange,
    pub truncation: TruncationConfig,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Default parameter set for `scenario`.
    pub fn preset(scenario: Scenario, output_dir: impl Into<PathBuf>) -> Self {
        let output_dir = output_dir.into();
        let base = Self {
            scenario,
            ell: 1.0,
            k0: 20,
            eta: vec![0.0],
            seeds: vec![0],
            x_range: XRange {
                lo: 1.0,
                hi: 100.0,
                count: 50,
            },
            truncation: TruncationConfig::for_k0(20),
            output_dir,
        };
        match scenario {
            Scenario::Fig2 | Scenario::Custom => base,
            Scenario::Fig3 => Self {
                x_range: XRange {
                    lo: 0.1,
                    hi: 20.0,
                    count: 200,
                },
                ..base
            },
            Scenario::Fig4 => Self {
                eta: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
                seeds: (0..20).collect(),
                x_range: XRange {
                    lo: 0.1,
                    hi: 10.0,
                    count: 100,
                },
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0) {
            return Err(invalid("ell must be > 0"));
        }
        if self.eta.is_empty() || self.eta.iter().any(|e| !(*e >= 0.0)) {
            return Err(invalid("eta list must be nonempty with entries >= 0"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("need at least one seed"));
        }
        self.x_range.validate()?;
        self.truncation.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One parameter tuple of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub ell: f64,
    pub k0: usize,
    pub eta: f64,
    pub seed: u64,
}

impl Cell {
    pub fn tag(&self) -> String {
        format!("ell{}_k{}_eta{:e}_s{}", self.ell, self.k0, self.eta, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub kind: String,
    pub scenario: Scenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub files: Vec<ManifestEntry>,
}

/// Per-cell outcome recorded in `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub status: String,
    pub report: Option<TruncationReport>,
    pub standard: Option<ErrorReport>,
    pub resummed: Option<ErrorReport>,
    pub l2_error: Option<f64>,
}

/// Output of one cell of a sweep, before the manifest is assembled.
struct CellOutput {
    summary: CellSummary,
    files: Vec<(String, String)>,
}

fn write_file<F>(dir: &Path, name: &str, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Everything downstream of the moments for one cell.
pub struct Analysis {
    pub coeffs: CoefficientSet,
    pub curve: PartialSumCurve,
    pub report: Result<TruncationReport>,
}

/// Coefficients, partial sums and truncation for one moment sequence.
pub fn analyse(seq: &MomentSequence, truncation: &TruncationConfig) -> Result<Analysis> {
    let cfg = TruncationConfig {
        m_max: truncation.m_max.max(3 * seq.k0()),
        ..*truncation
    };
    let coeffs = compute_coefficients(seq, cfg.m_max)?;
    let curve = partial_sums(&coeffs, cfg.m_max)?;
    let report = detect_truncation(&curve, &cfg, seq.k0());
    Ok(Analysis { coeffs, curve, report })
}

pub fn cell_moments(cell: &Cell) -> Result<MomentSequence> {
    add_noise(&cesaro_moments(cell.ell, cell.k0)?, cell.eta, cell.seed)
}

fn run_cell(cell: Cell, cfg: &ExperimentConfig) -> Result<CellOutput> {
    let dir = &cfg.output_dir;
    let tag = cell.tag();
    let mut files = Vec::new();
    let seq = cell_moments(&cell)?;

    let name = format!("{tag}_moments.csv");
    write_file(dir, &name, |w| seq.write_csv(w))?;
    files.push((name, "moments".to_string()));
    let name = format!("{tag}_moments.json");
    write_file(dir, &name, |w| Ok(serde_json::to_writer_pretty(w, &seq.sidecar())?))?;
    files.push((name, "moments_sidecar".to_string()));

    let analysis = match analyse(&seq, &cfg.truncation) {
        Ok(a) => a,
        Err(e) => {
            return Ok(CellOutput {
                summary: CellSummary {
                    cell,
                    status: e.kind().to_string(),
                    report: None,
                    standard: None,
                    resummed: None,
                    l2_error: None,
                },
                files,
            })
        }
    };
    let name = format!("{tag}_coeffs.csv");
    write_file(dir, &name, |w| analysis.coeffs.write_csv(w))?;
    files.push((name, "coefficients".to_string()));
    let name = format!("{tag}_msum.csv");
    write_file(dir, &name, |w| analysis.curve.write_csv(w))?;
    files.push((name, "partial_sums".to_string()));

    let name = format!("{tag}_truncation.json");
    match &analysis.report {
        Ok(r) => write_file(dir, &name, |w| Ok(serde_json::to_writer_pretty(w, r)?))?,
        Err(e) => {
            let m_alpha = match e {
                Error::NoPlateau { m_alpha } => Some(*m_alpha),
                _ => None,
            };
            let body = serde_json::json!({
                "status": e.kind(),
                "m_alpha": m_alpha,
                "message": e.to_string(),
            });
            write_file(dir, &name, |w| Ok(serde_json::to_writer_pretty(w, &body)?))?
        }
    }
    files.push((name, "truncation".to_string()));

    let xs = cfg.x_range.grid();
    let oracle = |x: f64| hypergeometric_oracle(cell.ell, x);
    let standard = relative_error_curve(|x| evaluate_standard(x, &seq, seq.k0()), oracle, &xs)?;
    let report = match analysis.report {
        Ok(r) => r,
        Err(e) => {
            return Ok(CellOutput {
                summary: CellSummary {
                    cell,
                    status: e.kind().to_string(),
                    report: None,
                    standard: Some(standard),
                    resummed: None,
                    l2_error: None,
                },
                files,
            })
        }
    };
    let resummed = relative_error_curve(|x| evaluate_resummed(x, &analysis.coeffs, report.m0), oracle, &xs)?;
    let name = format!("{tag}_eval.csv");
    write_file(dir, &name, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record([
            "x",
            "true",
            "standard",
            "resummed",
            "rel_err_standard",
            "rel_err_resummed",
        ])?;
        for (i, x) in xs.iter().enumerate() {
            c.write_record([
                format!("{x:e}"),
                format!("{:e}", standard.truth[i]),
                format!("{:e}", standard.approx[i]),
                format!("{:e}", resummed.approx[i]),
                format!("{:e}", standard.rel_error[i]),
                format!("{:e}", resummed.rel_error[i]),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    files.push((name, "evaluation".to_string()));

    let rec = reconstruct_density(&analysis.coeffs, report.m0, &default_grid())?;
    let l2 = l2_error(&rec, &DensitySpec::cesaro(cell.ell)?, 5.0).ok();
    let name = format!("{tag}_reconstruction.csv");
    write_file(dir, &name, |w| rec.write_csv(w))?;
    files.push((name, "reconstruction".to_string()));

    Ok(CellOutput {
        summary: CellSummary {
            cell,
            status: "ok".to_string(),
            report: Some(report),
            standard: Some(standard),
            resummed: Some(resummed),
            l2_error: l2,
        },
        files,
    })
}

fn cells_for(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut push_grid = |ell: f64, k0: usize, etas: &[f64]| {
        for &eta in etas {
            if eta == 0.0 {
                cells.push(Cell {
                    ell,
                    k0,
                    eta,
                    seed: cfg.seeds[0],
                });
            } else {
                for &seed in &cfg.seeds {
                    cells.push(Cell { ell, k0, eta, seed });
                }
            }
        }
    };
    match cfg.scenario {
        Scenario::Fig2 => {
            for k0 in [5, 10, 15, 20] {
                push_grid(cfg.ell, k0, &[0.0]);
            }
        }
        Scenario::Fig3 => {
            for ell in [1.0, 2.0, 3.0, 4.0, 5.0, 8.0, 15.0, 20.0] {
                push_grid(ell, cfg.k0, &[0.0]);
            }
        }
        Scenario::Fig4 | Scenario::Custom => push_grid(cfg.ell, cfg.k0, &cfg.eta),
    }
    cells
}

fn write_summary(dir: &Path, summaries: &[CellSummary]) -> Result<()> {
    write_file(dir, "summary.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record([
            "ell",
            "k0",
            "eta",
            "seed",
            "status",
            "m0",
            "m_alpha",
            "plateau_level",
            "rms_standard",
            "rms_resummed",
            "max_rel_standard",
            "max_rel_resummed",
            "l2_error",
        ])?;
        for s in summaries {
            let r = s.report.as_ref();
            c.write_record([
                format!("{}", s.cell.ell),
                s.cell.k0.to_string(),
                format!("{:e}", s.cell.eta),
                s.cell.seed.to_string(),
                s.status.clone(),
                r.map(|r| r.m0.to_string()).unwrap_or_default(),
                r.map(|r| r.m_alpha.to_string()).unwrap_or_default(),
                fmt_opt(r.map(|r| r.plateau_level)),
                fmt_opt(s.standard.as_ref().map(|e| e.rms)),
                fmt_opt(s.resummed.as_ref().map(|e| e.rms)),
                fmt_opt(s.standard.as_ref().map(|e| e.max_rel_error)),
                fmt_opt(s.resummed.as_ref().map(|e| e.max_rel_error)),
                fmt_opt(s.l2_error),
            ])?;
        }
        c.flush()?;
        Ok(())
    })
}

/// Relative error of the resummed expansion for several fixed `m0`.
fn write_relerr_for_m0(dir: &Path, name: &str, cfg: &ExperimentConfig, m0s: &[usize]) -> Result<()> {
    let seq = cesaro_moments(cfg.ell, cfg.k0)?;
    let n_max = m0s.iter().copied().max().unwrap_or(0);
    let coeffs = compute_coefficients(&seq, n_max)?;
    let xs = cfg.x_range.grid();
    write_file(dir, name, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["m0", "x", "rel_err"])?;
        for &m0 in m0s {
            for &x in &xs {
                let truth = hypergeometric_oracle(cfg.ell, x)?;
                let v = evaluate_resummed(x, &coeffs, m0)?;
                c.write_record([
                    m0.to_string(),
                    format!("{x:e}"),
                    format!("{:e}", ((v - truth) / truth).abs()),
                ])?;
            }
        }
        c.flush()?;
        Ok(())
    })
}

fn fig3_extras(cfg: &ExperimentConfig, files: &mut Vec<(String, String)>) -> Result<()> {
    let dir = &cfg.output_dir;
    // RMS over x in (0, 20] as m0 runs over [0, 50].
    let seq = cesaro_moments(cfg.ell, cfg.k0)?;
    let coeffs = compute_coefficients(&seq, 50)?;
    let xs = XRange::new(0.1, 20.0, 200)?.grid();
    let truth: Vec<f64> = xs
        .iter()
        .map(|&x| hypergeometric_oracle(cfg.ell, x))
        .collect::<Result<_>>()?;
    let name = "fig3_rms_vs_m0.csv".to_string();
    write_file(dir, &name, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["m0", "rms"])?;
        for m0 in 0..=50 {
            let pairs = xs
                .iter()
                .zip(&truth)
                .map(|(&x, &t)| Ok((evaluate_resummed(x, &coeffs, m0)?, t)))
                .collect::<Result<Vec<_>>>()?;
            c.write_record([m0.to_string(), format!("{:e}", rms_error(&pairs)?)])?;
        }
        c.flush()?;
        Ok(())
    })?;
    files.push((name, "rms_vs_m0".to_string()));

    // Fixed m0 = 10, k0 varying, x in [1, 1000].
    let xs = XRange::new(1.0, 1000.0, 60)?.grid();
    let name = "fig3_relerr_vs_k0.csv".to_string();
    write_file(dir, &name, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["k0", "x", "rel_err"])?;
        for k0 in [0, 4, 8, 10, 14] {
            let coeffs = compute_coefficients(&cesaro_moments(cfg.ell, k0)?, 10)?;
            for &x in &xs {
                let t = hypergeometric_oracle(cfg.ell, x)?;
                let v = evaluate_resummed(x, &coeffs, 10)?;
                c.write_record([k0.to_string(), format!("{x:e}"), format!("{:e}", ((v - t) / t).abs())])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    files.push((name, "relerr_vs_k0".to_string()));

    // Fixed m0 = 10 across ell.
    let xs = cfg.x_range.grid();
    let name = "fig3_fixed_m0.csv".to_string();
    write_file(dir, &name, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["ell", "x", "true", "resummed"])?;
        for ell in [5.0, 8.0, 15.0, 20.0] {
            let coeffs = compute_coefficients(&cesaro_moments(ell, cfg.k0)?, 10)?;
            for &x in &xs {
                c.write_record([
                    format!("{ell}"),
                    format!("{x:e}"),
                    format!("{:e}", hypergeometric_oracle(ell, x)?),
                    format!("{:e}", evaluate_resummed(x, &coeffs, 10)?),
                ])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    files.push((name, "fixed_m0".to_string()));
    Ok(())
}

/// Runs a sweep, writes every output file into `cfg.output_dir` and returns
/// the manifest (also written as `manifest.json`).
///
/// A failure confined to one cell (no plateau, overflow) becomes a status
/// row in `summary.csv`; I/O errors abort the run.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let cells = cells_for(cfg);
    let outputs = cells
        .par_iter()
        .map(|&cell| run_cell(cell, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut files: Vec<(Option<Cell>, String, String)> = Vec::new();
    let mut summaries = Vec::with_capacity(outputs.len());
    for out in outputs {
        for (name, kind) in out.files {
            files.push((Some(out.summary.cell), name, kind));
        }
        summaries.push(out.summary);
    }
    write_summary(&cfg.output_dir, &summaries)?;
    files.push((None, "summary.csv".to_string(), "summary".to_string()));

    let mut extras = Vec::new();
    match cfg.scenario {
        Scenario::Fig2 => {
            let fig2 = ExperimentConfig { k0: 20, ..cfg.clone() };
            write_relerr_for_m0(&cfg.output_dir, "fig2_relerr_vs_m0.csv", &fig2, &[6, 30, 45])?;
            extras.push(("fig2_relerr_vs_m0.csv".to_string(), "relerr_vs_m0".to_string()));
        }
        Scenario::Fig3 => fig3_extras(cfg, &mut extras)?,
        Scenario::Fig4 | Scenario::Custom => {}
    }
    for (name, kind) in extras {
        files.push((None, name, kind));
    }

    let manifest = Manifest {
        config: cfg.clone(),
        files: files
            .into_iter()
            .map(|(cell, file, kind)| ManifestEntry {
                file,
                kind,
                scenario: cfg.scenario,
                cell,
            })
            .collect(),
    };
    write_file(&cfg.output_dir, "manifest.json", |w| {
        Ok(serde_json::to_writer_pretty(w, &manifest)?)
    })?;
    Ok(manifest)
}
