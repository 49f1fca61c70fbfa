//! Settings shared by every subcommand.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use crate::fock::{FockBasis, MIN_DIM};
use crate::grid::Grid;
use crate::io::Format;

use super::CliError;

/// Pass/fail thresholds for `evolve` and `verify`. The defaults are the
/// acceptance thresholds, so a default run reproduces them.
#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize)]
pub struct Tolerances {
    /// Largest allowed norm change per operator chain
    #[arg(long = "tol", default_value_t = 1e-9, global = true)]
    pub norm_drift: f64,
    /// Closed-form vs RK4 coefficients (max abs)
    #[arg(long = "tol-ode", default_value_t = 1e-7, global = true)]
    pub ode: f64,
    /// Factored propagator vs exact diagonal in the Fock basis
    #[arg(long = "tol-fock", default_value_t = 1e-8, global = true)]
    pub fock_diagonal: f64,
    /// Factored squeeze matrix vs direct exponential
    #[arg(long = "tol-squeeze", default_value_t = 1e-6, global = true)]
    pub squeeze_matrix: f64,
    /// Grid squeeze vs closed-form state, pointwise
    #[arg(long = "tol-pointwise", default_value_t = 1e-8, global = true)]
    pub pointwise: f64,
    /// Grid time evolution vs closed form, pointwise after phase alignment
    #[arg(long = "tol-evolution", default_value_t = 1e-6, global = true)]
    pub evolution: f64,
    /// Renormalized even/odd densities, closed form vs grid
    #[arg(long = "tol-density", default_value_t = 1e-5, global = true)]
    pub density: f64,
    /// Identities that hold to rounding (phases, density forms, integrals)
    #[arg(long = "tol-exact", default_value_t = 1e-9, global = true)]
    pub exact: f64,
    /// T(a + b) vs T(a) T(b) on the grid
    #[arg(long = "tol-group", default_value_t = 1e-7, global = true)]
    pub group: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm_drift: 1e-9,
            ode: 1e-7,
            fock_diagonal: 1e-8,
            squeeze_matrix: 1e-6,
            pointwise: 1e-8,
            evolution: 1e-6,
            density: 1e-5,
            exact: 1e-9,
            group: 1e-7,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("tol", self.norm_drift),
            ("tol-ode", self.ode),
            ("tol-fock", self.fock_diagonal),
            ("tol-squeeze", self.squeeze_matrix),
            ("tol-pointwise", self.pointwise),
            ("tol-evolution", self.evolution),
            ("tol-density", self.density),
            ("tol-exact", self.exact),
            ("tol-group", self.group),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct RunConfig {
    /// Left edge of the position grid
    #[arg(long, default_value_t = -12.0, allow_hyphen_values = true, global = true)]
    pub grid_min: f64,
    /// Right edge of the position grid (exclusive)
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true, global = true)]
    pub grid_max: f64,
    /// Grid points; a power of two, at least 16
    #[arg(long, default_value_t = 2048, global = true)]
    pub grid_n: usize,
    /// Fock basis size for matrix checks
    #[arg(long, visible_alias = "dim", default_value_t = crate::fock::DEFAULT_DIM, global = true)]
    pub fock_dim: usize,
    /// RK4 steps for coefficient integration
    #[arg(long, default_value_t = 1000, global = true)]
    pub ode_steps: usize,
    #[command(flatten)]
    pub tol: Tolerances,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Output file; standard output if absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_min: -12.0,
            grid_max: 12.0,
            grid_n: 2048,
            fock_dim: crate::fock::DEFAULT_DIM,
            ode_steps: 1000,
            tol: Tolerances::default(),
            format: Format::Csv,
            out: None,
        }
    }
}

impl RunConfig {
    /// Checks every numeric field; errors name the offending flag.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        if self.fock_dim < MIN_DIM {
            return Err(CliError::Config(format!("--fock-dim {} is below the minimum of {MIN_DIM}", self.fock_dim)));
        }
        if self.ode_steps == 0 {
            return Err(CliError::Config("--ode-steps must be positive".into()));
        }
        for (flag, value) in self.tol.entries() {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!("--{flag} must be a positive number (got {value})")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid_min, self.grid_max, self.grid_n)
            .map_err(|e| CliError::Config(format!("--grid-min/--grid-max/--grid-n: {e}")))
    }

    pub fn basis(&self) -> Result<FockBasis, CliError> {
        FockBasis::new(self.fock_dim).map_err(|e| CliError::Config(format!("--fock-dim: {e}")))
    }
}
