use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hausdorff_resum::experiments::{analyse, hypergeometric_oracle, run_scenario, ExperimentConfig, Scenario, XRange};
use hausdorff_resum::inversion::{default_grid, reconstruct_density};
use hausdorff_resum::moments::{add_noise, cesaro_moments};
use hausdorff_resum::resummation::{
    evaluate_resummed, evaluate_scaled, evaluate_standard, scaled_coefficients, TruncationConfig,
};
use hausdorff_resum::{Error, MomentSequence, Result};

#[derive(Parser)]
#[command(name = "hresum", version, about = "Resummation of Hausdorff moment series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a (possibly noisy) Cesaro moment sequence.
    Moments(Shared),
    /// Write the rotated expansion coefficients.
    Coeffs(Shared),
    /// Write the partial sums M_m of squared coefficients.
    Msum(Shared),
    /// Print the truncation report as JSON.
    Truncate(Shared),
    /// Evaluate the standard and resummed series on an x grid.
    Eval(Shared),
    /// Reconstruct the density on [0, 5].
    Invert(Shared),
    /// Run a scripted sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct Shared {
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long, default_value_t = 20)]
    k0: usize,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation order; skips plateau detection.
    #[arg(long)]
    m0: Option<usize>,
    /// Scale c of the moments (c = 1 is the plain expansion).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    x_lo: f64,
    #[arg(long, default_value_t = 100.0)]
    x_hi: f64,
    #[arg(long, default_value_t = 50)]
    x_count: usize,
    /// Read moments from a `k,mu` CSV instead of generating them.
    #[arg(long)]
    moments: Option<PathBuf>,
    /// Truncation settings as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Scenario preset, ignored when --config is given.
    #[arg(long, value_parser = parse_scenario, default_value = "fig2")]
    scenario: Scenario,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    k0: Option<usize>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Single seed; overrides the preset seed list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    x_lo: Option<f64>,
    #[arg(long)]
    x_hi: Option<f64>,
    #[arg(long)]
    x_count: Option<usize>,
    /// Full experiment configuration as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown scenario `{s}`"))
}

fn load_moments(a: &Shared) -> Result<MomentSequence> {
    match &a.moments {
        Some(path) => MomentSequence::read_csv(File::open(path)?, a.eta),
        None => add_noise(&cesaro_moments(a.ell, a.k0)?, a.eta, a.seed),
    }
}

fn truncation_config(a: &Shared, k0: usize) -> Result<TruncationConfig> {
    let cfg = match &a.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => TruncationConfig::for_k0(k0),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Opens `out/name`, or stdout when no directory was given.
fn sink(out: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Box::new(BufWriter::new(File::create(dir.join(name))?)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_json<T: serde::Serialize>(out: &Option<PathBuf>, name: &str, value: &T) -> Result<()> {
    let mut w = sink(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn chosen_m0(a: &Shared, seq: &MomentSequence) -> Result<(usize, hausdorff_resum::CoefficientSet)> {
    let cfg = truncation_config(a, seq.k0())?;
    let analysis = analyse(seq, &cfg)?;
    let m0 = match a.m0 {
        Some(m0) => m0,
        None => analysis.report?.m0,
    };
    Ok((m0, analysis.coeffs))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moments(a) => {
            let seq = load_moments(&a)?;
            let mut w = sink(&a.out, "moments.csv")?;
            seq.write_csv(&mut w)?;
            w.flush()?;
            if a.out.is_some() {
                write_json(&a.out, "moments.json", &seq.sidecar())?;
            }
        }
        Command::Coeffs(a) => {
            let seq = load_moments(&a)?;
            let cfg = truncation_config(&a, seq.k0())?;
            let coeffs = scaled_coefficients(&seq, a.c, cfg.m_max.max(3 * seq.k0()))?;
            let mut w = sink(&a.out, "coeffs.csv")?;
            coeffs.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Msum(a) => {
            let seq = load_moments(&a)?;
            let analysis = analyse(&seq, &truncation_config(&a, seq.k0())?)?;
            let mut w = sink(&a.out, "msum.csv")?;
            analysis.curve.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Truncate(a) => {
            let seq = load_moments(&a)?;
            let report = analyse(&seq, &truncation_config(&a, seq.k0())?)?.report?;
            write_json(&a.out, "truncation.json", &report)?;
        }
        Command::Eval(a) => eval(&a)?,
        Command::Invert(a) => {
            let seq = load_moments(&a)?;
            let (m0, coeffs) = chosen_m0(&a, &seq)?;
            let rec = reconstruct_density(&coeffs, m0, &default_grid())?;
            let mut w = sink(&a.out, "reconstruction.csv")?;
            rec.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Experiment(a) => experiment(a)?,
    }
    Ok(())
}

fn eval(a: &Shared) -> Result<()> {
    let seq = load_moments(a)?;
    let (m0, coeffs) = chosen_m0(a, &seq)?;
    let xs = XRange::new(a.x_lo, a.x_hi, a.x_count)?.grid();
    let scaled = if a.c != 1.0 {
        Some(scaled_coefficients(&seq, a.c, m0)?)
    } else {
        None
    };
    let with_truth = a.moments.is_none();
    let mut w = sink(&a.out, "eval.csv")?;
    let mut c = csv::Writer::from_writer(&mut w);
    let mut header = vec!["x", "standard", "resummed"];
    if with_truth {
        header.push("true");
    }
    c.write_record(&header)?;
    for &x in &xs {
        let standard = evaluate_standard(x, &seq, seq.k0())?;
        let resummed = match &scaled {
            Some(sc) => evaluate_scaled(1.0 / x, sc, m0)?,
            None => evaluate_resummed(x, &coeffs, m0)?,
        };
        let mut row = vec![format!("{x:e}"), format!("{standard:e}"), format!("{resummed:e}")];
        if with_truth {
            row.push(format!("{:e}", hypergeometric_oracle(a.ell, x)?));
        }
        c.write_record(&row)?;
    }
    c.flush()?;
    drop(c);
    w.flush()?;
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match &a.config {
        Some(path) => {
            let mut cfg = ExperimentConfig::from_json(&fs::read_to_string(path)?)?;
            if let Some(dir) = &a.out {
                cfg.output_dir = dir.clone();
            }
            cfg
        }
        None => {
            let mut cfg = ExperimentConfig::preset(a.scenario, &out);
            if let Some(ell) = a.ell {
                cfg.ell = ell;
            }
            if let Some(k0) = a.k0 {
                cfg.k0 = k0;
                cfg.truncation = TruncationConfig::for_k0(k0);
            }
            if let Some(eta) = a.eta {
                cfg.eta = eta;
            }
            if let Some(seed) = a.seed {
                cfg.seeds = vec![seed];
            }
            cfg.x_range.lo = a.x_lo.unwrap_or(cfg.x_range.lo);
            cfg.x_range.hi = a.x_hi.unwrap_or(cfg.x_range.hi);
            cfg.x_range.count = a.x_count.unwrap_or(cfg.x_range.count);
            cfg
        }
    };
    let manifest = run_scenario(&cfg)?;
    println!("{}", Path::new(&cfg.output_dir).join("manifest.json").display());
    eprintln!("{} files written", manifest.files.len() + 1);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}

fn report(e: &Error) {
    let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{body}");
}
