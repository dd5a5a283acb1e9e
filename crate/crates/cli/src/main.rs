//! Command-line front end: parses a TOML configuration, runs one experiment
//! from the library, and writes a CSV table whose header records enough
//! provenance (version, seed, full effective configuration and its hash) to
//! reproduce the run byte for byte.

mod config;
mod experiments;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;

/// Errors surfaced to the shell, partitioned by exit code: 2 for anything
/// wrong with the request itself, 3 for mathematical domain problems, 4 for
/// iterations that ran out of budget, 1 for I/O.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(nevai_core::Error),
    Io(std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(e) => match e {
                nevai_core::Error::InvalidParameter(_) => 2,
                nevai_core::Error::Convergence { .. } => 4,
                _ => 3,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(out, "config error: {msg}"),
            CliError::Numeric(e) => write!(out, "{e}"),
            CliError::Io(e) => write!(out, "io error: {e}"),
        }
    }
}

impl From<nevai_core::Error> for CliError {
    fn from(e: nevai_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Parser)]
#[command(name = "nevai", version, about = "Jacobi-matrix spectral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path (stdout when omitted); overrides `run.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed; overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps (0 = all cores); overrides `run.threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Orthonormal-polynomial trace: p_n, kernel, and ratio at every index.
    Eval,
    /// Kernel-ratio decay r_n on a geometric index schedule.
    Nevai,
    /// Transfer-product growth rate at one energy.
    Lyapunov,
    /// Moments of the normalized kernel measure about the energy.
    Eta,
    /// Atoms and weights of a finite truncation's spectral measure.
    Spectrum,
    /// Operator moments at the first coordinate.
    Moments,
    /// Resolvent first-row entries, or a boundary-value probe.
    Green,
    /// Polar (radius/angle) trajectory of the recurrence.
    Prufer,
    /// Randomized checks of the trigonometric/matrix inequalities.
    Bounds,
    /// One diagnostic evaluated over an energy grid, in parallel.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Nevai => "nevai",
            Command::Lyapunov => "lyapunov",
            Command::Eta => "eta",
            Command::Spectrum => "spectrum",
            Command::Moments => "moments",
            Command::Green => "green",
            Command::Prufer => "prufer",
            Command::Bounds => "bounds",
            Command::Sweep => "sweep",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.run.threads = threads;
    }
    if let Some(out) = &cli.out {
        cfg.run.out = Some(out.display().to_string());
    }
    let effective = toml::to_string(&cfg)
        .map_err(|e| CliError::Config(format!("cannot serialize effective config: {e}")))?;

    let table = match cli.command {
        Command::Eval => experiments::eval(&cfg)?,
        Command::Nevai => experiments::nevai(&cfg)?,
        Command::Lyapunov => experiments::lyapunov(&cfg)?,
        Command::Eta => experiments::eta(&cfg)?,
        Command::Spectrum => experiments::spectrum(&cfg)?,
        Command::Moments => experiments::moments(&cfg)?,
        Command::Green => experiments::green(&cfg)?,
        Command::Prufer => experiments::prufer(&cfg)?,
        Command::Bounds => experiments::bounds(&cfg)?,
        Command::Sweep => experiments::sweep(&cfg)?,
    };

    let out_path = cfg.run.out.as_ref().map(PathBuf::from);
    output::write(
        out_path.as_deref(),
        cli.command.name(),
        cfg.run.seed,
        &effective,
        &table,
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nevai: {e}");
            ExitCode::from(e.code())
        }
    }
}
