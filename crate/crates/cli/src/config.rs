use std::fmt;

use szj_core::geronimus::SolverOptions;
use szj_core::harmonic;
use szj_core::seqspace::SpaceSpec;

/// Invalid flags or input files; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const MIN_GRID: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid_size: usize,
    pub space: SpaceSpec,
    pub tol: f64,
    pub max_iter: usize,
}

impl ExperimentConfig {
    pub fn new(
        seed: u64,
        grid_size: usize,
        space: SpaceSpec,
        tol: f64,
        max_iter: usize,
    ) -> Result<Self, ConfigError> {
        if grid_size < MIN_GRID || !grid_size.is_power_of_two() {
            return Err(ConfigError(format!(
                "--grid-size {grid_size}: need a power of two >= {MIN_GRID}"
            )));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ConfigError(format!("--tol {tol}: must be positive")));
        }
        if max_iter == 0 {
            return Err(ConfigError("--max-iter must be at least 1".into()));
        }
        Ok(Self {
            seed,
            grid_size,
            space,
            tol,
            max_iter,
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            contraction_check: true,
        }
    }

    /// Largest truncation of every decay profile.
    pub fn window(&self) -> usize {
        harmonic::diagnostic_window(self.grid_size)
    }
}

/// Worker count from `SZJ_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>, ConfigError> {
    match std::env::var("SZJ_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError(format!(
                "SZJ_THREADS={v:?} is not a positive integer"
            ))),
        },
    }
}
