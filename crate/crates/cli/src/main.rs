//! `szj`: conversions between Verblunsky coefficients and Jacobi tail sums,
//! the fixed-point solver, and the equivalence sweeps.
//!
//! Exit codes: 0 success, 2 schema or configuration error, 3 domain error,
//! 4 solver not contracting, 5 solver iteration limit.

mod config;
mod equivalence;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use szj_core::geronimus::{self, JacobiParams, SolverOptions, VerblunskySeq};
use szj_core::harmonic::DEFAULT_GRID;
use szj_core::seqspace::{norm, DecaySeq, SpaceSpec};

use crate::config::{ConfigError, ExperimentConfig};
use crate::equivalence::Direction;

#[derive(Parser)]
#[command(
    name = "szj",
    version,
    about = "Jacobi tail sums, Verblunsky coefficients and class-V checks"
)]
struct Cli {
    /// Base seed for sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Angular grid size (power of two, at least 256).
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid_size: usize,
    /// Solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    max_iter: usize,
    /// l11, l21, intersection or l1s:<s>.
    #[arg(long, global = true, default_value = "l11")]
    space: String,
    /// Output file (forward, solve) or directory (equivalence).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Jacobi parameters and tail sums from a Verblunsky file.
    Forward { input: PathBuf },
    /// Verblunsky coefficients from a tail-sum file.
    Solve {
        input: PathBuf,
        /// Solve the given tails directly instead of stripping rows first.
        #[arg(long)]
        no_strip: bool,
    },
    /// Sample operators or measures and compare decay on both sides.
    Equivalence {
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Largest support of the sampled parameters.
        #[arg(long, default_value_t = 6)]
        max_support: usize,
        /// Add a point mass at this energy to every reverse sample.
        #[arg(long)]
        eigenvalue: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use szj_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::NoContraction { .. } => 4,
                E::MaxIterExceeded(_) => 5,
                E::InvalidSpace(_) | E::InvalidOptions(_) | E::GridMismatch(_) => 2,
                _ => 3,
            };
        }
        if cause.is::<ConfigError>()
            || cause.is::<serde_json::Error>()
            || cause.is::<std::io::Error>()
        {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    let space: SpaceSpec = cli
        .space
        .parse()
        .map_err(|e| ConfigError(format!("--space: {e}")))?;
    let config = ExperimentConfig::new(cli.seed, cli.grid_size, space, cli.tol, cli.max_iter)?;
    match cli.command {
        Command::Forward { input } => {
            let report = forward(&read_json(&input)?)?;
            emit(cli.out.as_deref(), &report)
        }
        Command::Solve { input, no_strip } => {
            let report = solve(&read_json(&input)?, &config, no_strip)?;
            emit(cli.out.as_deref(), &report)
        }
        Command::Equivalence {
            direction,
            samples,
            max_support,
            eigenvalue,
        } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("szj-out"));
            let sweep = equivalence::Sweep {
                config,
                direction,
                samples,
                max_support,
                eigenvalue,
            };
            equivalence::run(&sweep, &out)
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

/// Verblunsky file as written; range checks happen after parsing so that an
/// out-of-disc coefficient is a domain error, not a schema error.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaFile {
    alpha: Vec<f64>,
    #[serde(default = "minus_one")]
    alpha_minus1: f64,
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Serialize)]
struct TailNorms {
    lambda: f64,
    kappa: f64,
}

#[derive(Serialize)]
struct Norms {
    l11: TailNorms,
    l21: TailNorms,
    intersection: TailNorms,
}

#[derive(Serialize)]
struct ForwardReport {
    a: Vec<f64>,
    b: Vec<f64>,
    lambda: DecaySeq,
    kappa: DecaySeq,
    norms: Norms,
}

fn forward(file: &AlphaFile) -> Result<ForwardReport> {
    if file.alpha_minus1 != -1.0 {
        return Err(ConfigError(format!(
            "alpha_minus1 must be -1, got {}",
            file.alpha_minus1
        ))
        .into());
    }
    let alpha = VerblunskySeq::new(file.alpha.clone())?;
    let j = geronimus::forward(&alpha)?;
    let (lambda, kappa) = j.tail_sums();
    let pair = |space| TailNorms {
        lambda: norm(&lambda, space),
        kappa: norm(&kappa, space),
    };
    let norms = Norms {
        l11: pair(SpaceSpec::L11),
        l21: pair(SpaceSpec::L21),
        intersection: pair(SpaceSpec::Intersection),
    };
    Ok(ForwardReport {
        a: j.a_values().to_vec(),
        b: j.b_values().to_vec(),
        lambda,
        kappa,
        norms,
    })
}

/// Accepts the output of `forward` as well as a bare `{lambda, kappa}` file.
#[derive(Deserialize)]
struct TailsFile {
    lambda: DecaySeq,
    kappa: DecaySeq,
}

#[derive(Serialize)]
struct SolveReport {
    alpha: VerblunskySeq,
    #[serde(rename = "N_stripped")]
    n_stripped: usize,
    residual: f64,
    iterations: usize,
    /// The operator generated by the recovered coefficients.
    operator: JacobiParams,
}

fn solve(file: &TailsFile, config: &ExperimentConfig, no_strip: bool) -> Result<SolveReport> {
    let lambda = DecaySeq::new(file.lambda.offset, file.lambda.values.clone())?;
    let kappa = DecaySeq::new(file.kappa.offset, file.kappa.values.clone())?;
    let opts: SolverOptions = config.solver_options();
    let (n_stripped, solution) = if no_strip {
        (0, geronimus::solve(&lambda, &kappa, opts)?)
    } else {
        let s = geronimus::strip_and_solve_tails(&lambda, &kappa, config.space, opts)?;
        (s.n_stripped, s.solution)
    };
    Ok(SolveReport {
        operator: geronimus::forward(&solution.alpha)?,
        alpha: solution.alpha,
        n_stripped,
        residual: solution.residual,
        iterations: solution.iterations,
    })
}
