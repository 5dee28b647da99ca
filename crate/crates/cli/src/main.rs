//! `ncrkhs`: batch front end over the ncrkhs library.
//!
//! Every command prints one JSON document on stdout and a one-line summary on
//! stderr. Exit codes: 0 ok, 2 input error, 3 certificate failed, 4 infeasible.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{Outcome, Status};

#[derive(Parser, Debug)]
#[command(name = "ncrkhs", version, about = "Free nc functions, cp nc kernels and their reproducing kernel spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Relative equality threshold.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_eq: f64,
    /// Eigenvalue floor relative to the spectral norm.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_psd: f64,
    /// Write the JSON payload here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Sampling plan shared by randomized commands.
#[derive(Args, Debug, Clone)]
pub struct Sampling {
    #[arg(long)]
    pub seed: u64,
    /// `nilpotent` or `gaussian`.
    #[arg(long, default_value = "nilpotent")]
    pub sampler: String,
    /// Number of sampled points.
    #[arg(long, default_value_t = 4)]
    pub points: usize,
    /// Point sizes, cycled over the points.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub sizes: Vec<usize>,
    /// Rows of each sampled argument.
    #[arg(long, default_value_t = 2)]
    pub rows: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a series at a point.
    Eval {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Evaluate a series at a nilpotent point, truncating at its nilpotency order.
    NilpEval {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Recover Taylor coefficients from nilpotent evaluations of a series.
    ExtractCoeffs {
        #[arg(long)]
        series: PathBuf,
        #[arg(long = "max-len")]
        max_len: usize,
    },
    /// Direct-sum and intertwining checks of a series on sampled points.
    CheckNcfun {
        #[arg(long)]
        series: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Kernel axioms on sampled points.
    CheckKernel {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Sampled complete-positivity certificate.
    CpCertify {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Kolmogorov factor values on sampled points.
    Kolmogorov {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Validate a model file and emit its kernel file.
    KernelFromBasis {
        #[arg(long)]
        model: PathBuf,
    },
    /// Bergman kernel of the orthonormalized basis.
    Bergman {
        #[arg(long)]
        model: PathBuf,
    },
    /// Minimal state norm interpolating sampled values through a Kolmogorov factor.
    LiftedNorm {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Contractivity certificate for a multiplier between two kernels.
    MultiplierCheck {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        s: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Range and complement decomposition of a contraction between two gram spaces.
    Brangesian {
        #[arg(long)]
        a: PathBuf,
        #[arg(long = "gram-source")]
        gram_source: PathBuf,
        #[arg(long = "gram-target")]
        gram_target: PathBuf,
    },
    /// Contractive containment of `kernel-prime` in `kernel`.
    Containment {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long = "kernel-prime")]
        kernel_prime: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Truncated factorization of a formal kernel.
    FormalFactor {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long = "L")]
        len: usize,
    },
    /// Truncated moment positivity against nilpotent-point positivity.
    FormalPositivity {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long = "L")]
        len: Option<usize>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Stinespring dilation of a cp map.
    Stinespring {
        #[arg(long)]
        map: PathBuf,
    },
    /// cb norm of a cp map with sampled amplifications.
    CbNorm {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        samples: usize,
    },
    /// Sampled Effros–Ruan lower bound for the column maps of a cp map.
    EffrosRuan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = commands::name(&cli.command);
    let outcome = match commands::tolerances(&cli.common) {
        Ok(tol) => commands::run(&cli.command, &tol),
        Err(e) => Outcome::from_error(e),
    };
    eprintln!("{name}: {}", outcome.summary);
    let text = ncrkhs::json::to_stable_string(&outcome.payload);
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                eprintln!("{name}: cannot write {}: {e}", path.display());
                return ExitCode::from(Status::InputError.code());
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(outcome.status.code())
}
