use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use unruh_core::oracle::{self, DiffGrid};
use unruh_core::sweep::{self, SweepConfig};
use unruh_core::verify;
use unruh_core::{DetectorConfig, Family, Ordering};

/// Negativity of fermionic Unruh-mode states seen by accelerated detectors.
#[derive(Parser)]
#[command(name = "unruh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the negativity over a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Run the self-check suite; exits non-zero if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in figure configuration (fig2..fig8).
    #[arg(long)]
    preset: Option<String>,
    /// TOML sweep description; command-line flags override it.
    #[arg(long, value_name = "PATH")]
    config_file: Option<PathBuf>,
    /// phi-plus, phi-minus, phi-star or werner.
    #[arg(long)]
    family: Option<Family>,
    /// Detector configurations, e.g. ab-i,ab-ii-particle.
    #[arg(long = "config", value_delimiter = ',')]
    configs: Vec<DetectorConfig>,
    /// State angles; accepts forms like pi/4 or 0.17.
    #[arg(long = "alpha", value_delimiter = ',', value_parser = sweep::parse_angle)]
    alphas: Vec<f64>,
    #[arg(long = "qr", value_delimiter = ',')]
    q_rs: Vec<f64>,
    /// Werner fidelities.
    #[arg(long = "fidelity", value_delimiter = ',')]
    fidelities: Vec<f64>,
    /// Points on the gamma grid [0, pi/4].
    #[arg(long)]
    gamma_steps: Option<usize>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "UNRUH_WORKERS")]
    workers: Option<usize>,
    /// canonical or alternate operator ordering.
    #[arg(long)]
    ordering: Option<Ordering>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "canonical")]
    ordering: Ordering,
    /// Write the printed-table discrepancy report to STEM.txt and STEM.json.
    #[arg(long, value_name = "STEM")]
    oracle_out: Option<PathBuf>,
}

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig> {
    if let (Some(_), Some(name)) = (&args.config_file, &args.preset) {
        bail!("--preset {name} conflicts with --config-file (put `preset = \"{name}\"` in the file)");
    }
    let mut cfg = if let Some(path) = &args.config_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        sweep::config_from_toml(&text)?
    } else if let Some(name) = &args.preset {
        sweep::preset(name)?
    } else if let Some(family) = args.family {
        SweepConfig::new(family)
    } else {
        bail!("sweep needs --preset, --config-file or --family");
    };
    if let Some(family) = args.family {
        cfg.family = family;
    }
    if !args.configs.is_empty() {
        cfg.configs = args.configs.clone();
    }
    if !args.alphas.is_empty() {
        cfg.alphas = args.alphas.clone();
    }
    if !args.q_rs.is_empty() {
        cfg.q_rs = args.q_rs.clone();
    }
    if !args.fidelities.is_empty() {
        cfg.fidelities = args.fidelities.clone();
    }
    if let Some(n) = args.gamma_steps {
        cfg.gamma.steps = n;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(o) = args.ordering {
        cfg.ordering = o;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let cfg = sweep_config(args)?;
    match &cfg.out {
        Some(path) => {
            let rows = sweep::run_sweep_to_file(&cfg, path)?;
            eprintln!("wrote {rows} rows to {}", path.display());
        }
        None => {
            let rows = sweep::run_sweep(&cfg)?;
            sweep::write_csv(&rows, io::stdout().lock())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let report = verify::run_verify(&args.ordering);
    let text = report.render();
    print!("{text}");
    if let Some(path) = &args.report {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(stem) = &args.oracle_out {
        let comparisons = oracle::compare_all(&DiffGrid::default(), &args.ordering)?;
        let (txt, json) =
            oracle::write_reports(&comparisons, stem).with_context(|| format!("writing {}", stem.display()))?;
        eprintln!("oracle report: {} and {}", txt.display(), json.display());
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => run_sweep(args),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
