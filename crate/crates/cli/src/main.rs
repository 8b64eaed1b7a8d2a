//! `pcompact`: batch driver for the certificate toolkit.
//!
//! Exit status: 0 when every certificate in the report is valid, 2 when any
//! row fails, 1 on unreadable input or bad configuration.

mod commands;
mod report;
mod suite;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pcompact::lpcore::DEFAULT_TOL;
use pcompact::pconvex::DEFAULT_EPS;
use pcompact::Exponent;

use commands::Settings;
use report::{Format, Report};
use suite::ExperimentConfig;

#[derive(Parser)]
#[command(name = "pcompact", version, about = "Certified bounds for p-compact sets, polynomials and Taylor models")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GlobalOpts {
    /// Exponents, comma separated (`inf` allowed where meaningful) [default: 2]
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_exponent)]
    p: Vec<Exponent>,
    /// Slack for β constructions, merges and factorizations [default: 0.001]
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Solver and verification tolerance [default: 1e-9]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Random probe samples per bound [default: 512]
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Seed for probes and random instances [default: 24301]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for suites [default: 1]
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bounds on m_p of a finite point set (`{"points": [[[re, im], ...], ...]}`)
    Mp {
        input: PathBuf,
        /// Check a stored certificate instead of computing one
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Write the certificate for the first exponent
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Bounds on κ_p of a homogeneous polynomial (JSON polynomial file)
    Kp {
        input: PathBuf,
        /// Check a stored certificate instead of computing one
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Write the certificate for the first exponent
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// β construction for a truncated sequence with a geometric tail
    Beta { input: PathBuf },
    /// Diagonal merge of covering sequences
    Merge { input: PathBuf },
    /// Factor a polynomial through ℓ_q quotients
    Factorize { input: PathBuf },
    /// Radius window and pointwise verdict for a Taylor model
    Radius {
        input: PathBuf,
        /// Window sizes, comma separated [default: listed degrees]
        #[arg(long, value_delimiter = ',')]
        window: Vec<usize>,
    },
    /// First example family at the origin
    ExampleA {
        #[arg(long, default_value_t = 4)]
        m_max: usize,
    },
    /// Second example family at the origin, or its divergence at e1
    ExampleB {
        #[arg(long, default_value_t = 6)]
        m_max: usize,
        /// Report the divergence certificate at e1 with this many degrees
        #[arg(long)]
        at_e1: Option<usize>,
    },
    /// Seminorm of a Taylor model on a compact set
    Seminorm { input: PathBuf },
    /// Print the column schema of every report as JSON
    Schema,
    /// Seeded experiment suite, by name or from a JSON config
    Suite {
        /// example-a, example-b, example-b-e1, beta, solver, holotype or factor
        name: Option<String>,
        /// JSON experiment config; command-line flags take precedence
        #[arg(long)]
        config: Option<PathBuf>,
        /// Random instances to generate [default: 20]
        #[arg(long)]
        instances: Option<usize>,
        /// Largest degree for the example suites
        #[arg(long)]
        m_max: Option<usize>,
    },
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: pcompact::Error| e.to_string())
}

struct Output {
    out: Option<PathBuf>,
    format: Format,
}

fn settings(g: &GlobalOpts, cfg: &ExperimentConfig) -> Result<(Settings, Output)> {
    let p = if !g.p.is_empty() { g.p.clone() } else { cfg.p.clone().unwrap_or_else(|| vec![Exponent::Finite(2.0)]) };
    if p.is_empty() {
        bail!("no exponents given");
    }
    let s = Settings {
        p,
        eps: g.eps.or(cfg.eps).unwrap_or(DEFAULT_EPS),
        tol: g.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL),
        budget: g.budget.or(cfg.budget).unwrap_or(512),
        seed: g.seed.or(cfg.seed).unwrap_or(0x5eed),
        jobs: g.jobs.or(cfg.jobs).unwrap_or(1),
    };
    if [s.eps, s.tol].iter().any(|v| v.is_nan() || *v <= 0.0) {
        bail!("--eps and --tol must be positive");
    }
    let out = Output {
        out: g.out.clone().or_else(|| cfg.out.clone()),
        format: g.format.or(cfg.format).unwrap_or(Format::Csv),
    };
    Ok((s, out))
}

fn emit(report: &Report, out: &Output) -> Result<()> {
    match &out.out {
        Some(path) => {
            let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            report.write(&mut f, out.format)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write(&mut lock, out.format)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.cmd {
        Cmd::Suite { config: Some(path), .. } => commands::read_json::<ExperimentConfig>(path)?,
        _ => ExperimentConfig::default(),
    };
    if let Cmd::Schema = cli.cmd {
        print!("{}", report::SCHEMA);
        return Ok(true);
    }
    let (s, out) = settings(&cli.global, &cfg)?;
    let report = match &cli.cmd {
        Cmd::Mp { input, certificate, cert_out } => {
            commands::mp(input, certificate.as_deref(), cert_out.as_deref(), &s)?
        }
        Cmd::Kp { input, certificate, cert_out } => {
            commands::kp(input, certificate.as_deref(), cert_out.as_deref(), &s)?
        }
        Cmd::Beta { input } => commands::beta(input, &s)?,
        Cmd::Merge { input } => commands::merge(input, &s)?,
        Cmd::Factorize { input } => commands::factorize(input, &s)?,
        Cmd::Radius { input, window } => commands::radius(input, window, &s)?,
        Cmd::ExampleA { m_max } => commands::example_a(*m_max, &s)?,
        Cmd::ExampleB { m_max, at_e1: None } => commands::example_b(*m_max, &s)?,
        Cmd::ExampleB { at_e1: Some(d), .. } => commands::example_b_e1(*d, &s)?,
        Cmd::Seminorm { input } => commands::seminorm(input, &s)?,
        Cmd::Schema => unreachable!(),
        Cmd::Suite { name, instances, m_max, .. } => {
            let Some(name) = name.clone().or_else(|| cfg.suite.clone()) else {
                bail!("no suite named; expected one of {}", suite::SUITES.join(", "));
            };
            suite::run(&name, &s, m_max.or(cfg.m_max), instances.or(cfg.instances).unwrap_or(20))?
        }
    };
    emit(&report, &out)?;
    Ok(report.valid())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
