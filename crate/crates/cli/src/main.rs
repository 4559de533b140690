//! `heckesum`: command-line access to the Petersson, newform-sum and
//! one-level-density computations.
//!
//! Exit codes: 0 success, 1 usage error, 2 precondition or input error,
//! 3 non-convergence.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Lib(#[from] heckesum::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(heckesum::Error::NotConverged { .. }) | CliError::Lib(heckesum::Error::Quadrature(_)) => 3,
            CliError::Input(_) | CliError::Lib(_) | CliError::Output(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "heckesum", version, about = "Sums of Hecke eigenvalues over newforms via the Petersson formula")]
pub struct Cli {
    /// Output format (JSON by default; `tau` and `density-grid` default to CSV,
    /// `kloosterman` and `besselj` to plain text).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write a run manifest (parameters, versions, diagnostics) to this file.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads; 1 gives the reference reduction order.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Truncation of the Kloosterman `c`-sum.
#[derive(Debug, Clone, Args)]
pub struct Truncation {
    /// Target bound on the neglected tail.
    #[arg(long, conflicts_with = "cmax")]
    tol: Option<f64>,
    /// Sum every modulus up to this value instead.
    #[arg(long)]
    cmax: Option<u64>,
    /// Largest modulus ever summed in tolerance mode.
    #[arg(long = "hard-cap")]
    hard_cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kloosterman sum S(m, n; c).
    Kloosterman {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        c: u64,
    },
    /// Bessel function J_nu(x).
    Besselj {
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        x: f64,
    },
    /// Petersson sum Delta_{k,N}(m, n).
    Delta {
        #[arg(long)]
        k: u32,
        #[arg(long = "N")]
        level: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// Pure newform sum Delta*_{k,N}(n), truncated at L <= X, m <= Y.
    Puresum {
        #[arg(long)]
        k: u32,
        #[arg(long = "N")]
        level: u64,
        #[arg(long)]
        n: u64,
        #[arg(long = "X")]
        x: Option<u64>,
        #[arg(long = "Y")]
        y: Option<u64>,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// Newform count |H*_k(N)| from the pure sum at n = 1.
    Card {
        #[arg(long)]
        k: u32,
        #[arg(long = "N")]
        level: u64,
        #[arg(long = "X")]
        x: Option<u64>,
        #[arg(long = "Y")]
        y: Option<u64>,
        #[command(flatten)]
        trunc: Truncation,
    },
    /// Ramanujan tau(n) for n <= max.
    Tau {
        #[arg(long)]
        max: usize,
    },
    /// dim S_k(Gamma_0(N)).
    Dim {
        #[arg(long)]
        k: u32,
        #[arg(long = "N")]
        level: u64,
    },
    /// Number of newforms |H*_k(N)|.
    Newdim {
        #[arg(long)]
        k: u32,
        #[arg(long = "N")]
        level: u64,
    },
    /// Local quantities of a newform read from an eigenvalue file.
    Basis {
        #[arg(long = "eigen-data")]
        eigen_data: PathBuf,
        /// Ambient level N, a multiple of the form's level.
        #[arg(long = "N")]
        level: Option<u64>,
        /// Evaluate lambda_f(n).
        #[arg(long)]
        n: Option<u64>,
    },
    /// One-level density estimate for H*_k(N) with a Fejer test function.
    Density {
        #[command(flatten)]
        params: DensityArgs,
        #[arg(long = "N")]
        level: u64,
    },
    /// Integral of a Fejer test function against a random-matrix kernel.
    Rmt {
        #[arg(long)]
        group: String,
        #[arg(long)]
        sigma: f64,
    },
    /// Density estimates over a grid of levels read from a key = value file.
    DensityGrid {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    u: f64,
    /// Scaling parameter; k^2 N by default.
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "X")]
    x: Option<u64>,
    #[arg(long = "Y")]
    y: Option<u64>,
    /// Reject u at or beyond the support limit.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    trunc: Truncation,
}

fn run(args: Vec<OsString>) -> Result<(String, bool), CliError> {
    let args = config::merge_config(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Ok((e.to_string(), true));
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))?;
    }
    let result = commands::execute(&cli.command)?;
    let format = cli.format.unwrap_or(result.default_format);
    let text = output::render(&result.payload, format)?;
    if let Some(path) = &cli.manifest {
        let manifest = commands::manifest(&args, &result);
        let body = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))? + "\n";
        std::fs::write(path, body).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok((text, result.converged))
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok((text, converged)) => {
            print!("{text}");
            if converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("warning: a truncated sum did not reach its tolerance");
                ExitCode::from(3)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprint!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
