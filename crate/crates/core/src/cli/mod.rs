//! Command-line front end.
//!
//! Every output embeds a manifest with the graph path, its SHA-256 and all
//! resolved parameters; `qgraph replay` reruns a manifest and reproduces the
//! output byte for byte.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub use commands::{
    CasimirParams, GreensParams, Params, RegularizationParams, SpectrumParams, SweepParams,
};
pub use output::Manifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qgraph",
    version,
    about = "Spectra, Green functions and Casimir energies of quantum graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of a compact graph.
    Spectrum(SpectrumArgs),
    /// Casimir energy by the Green-function trace, the mode sum, or both.
    Casimir(CasimirArgs),
    /// Casimir energy over a range of length scales, as CSV.
    Sweep(SweepArgs),
    /// Green function of an open star or a two-vertex graph.
    Greens(GreensArgs),
    /// Rerun the manifest embedded in a previous output.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub kmax: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Green,
    Modesum,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethodArg {
    Green,
    Modesum,
}

#[derive(Debug, Args)]
pub struct RegularizationArgs {
    /// Largest regulator value.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Smallest regulator value.
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Number of geometrically spaced regulator values.
    #[arg(long)]
    pub tau_steps: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
    /// Imaginary-axis truncation; chosen automatically when absent.
    #[arg(long)]
    pub kappa_max: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub fit_order: usize,
    /// Root tolerance for the spectrum feeding the mode sum.
    #[arg(long, default_value_t = 1e-10)]
    pub spectrum_tol: f64,
}

#[derive(Debug, Args)]
pub struct CasimirArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub regularization: RegularizationArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum)]
    pub method: SweepMethodArg,
    #[command(flatten)]
    pub regularization: RegularizationArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GreensArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Complex wavenumber as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub k: String,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xf: f64,
    #[arg(long, default_value_t = 0)]
    pub lead_in: usize,
    #[arg(long, default_value_t = 0)]
    pub lead_out: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A JSON or CSV file written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_INPUT
        };
        let mut message = e.to_string();
        if let Error::Extrapolation { samples, .. } = &e {
            for (tau, value) in samples {
                message.push_str(&format!("\n  tau = {tau:.6e}  E(tau) = {value:.16e}"));
            }
        }
        Failure { code, message }
    }
}

/// What a command produced: the bytes to write and the exit code to report.
#[derive(Debug)]
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub code: i32,
    pub warning: Option<String>,
}

/// Apply `QGRAPH_THREADS` (0 or unset = one worker per core).
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QGRAPH_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| {
        Failure::input(format!(
            "QGRAPH_THREADS must be a non-negative integer, got {value:?}"
        ))
    })?;
    if n > 0 {
        // A pool may already exist when embedded; that is not an error.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

/// Run the command line `args` (including the program name) and return the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return f.code;
    }
    let (result, output) = match cli.command {
        Command::Spectrum(a) => {
            let out = a.output.clone();
            (commands::spectrum(a), out)
        }
        Command::Casimir(a) => {
            let out = a.output.clone();
            (commands::casimir(a), out)
        }
        Command::Sweep(a) => {
            let out = a.output.clone();
            (commands::sweep(a), out)
        }
        Command::Greens(a) => {
            let out = a.output.clone();
            (commands::greens(a), out)
        }
        Command::Replay(a) => {
            let out = a.output.clone();
            (commands::replay(&a.manifest), out)
        }
    };
    match result {
        Ok(outcome) => {
            if let Some(w) = &outcome.warning {
                eprintln!("warning: {w}");
            }
            if let Err(e) = emit(&outcome.bytes, output.as_deref()) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(bytes: &[u8], path: Option<&std::path::Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| {
            std::io::Error::new(e.kind(), format!("cannot write {}: {e}", p.display()))
        }),
        None => std::io::stdout().lock().write_all(bytes),
    }
}
