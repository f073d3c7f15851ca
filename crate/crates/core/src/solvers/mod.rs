//! Steady-state solvers, backward Euler steps and the adaptive transient
//! driver for the Fokker-Planck, porous medium and drift-diffusion models.

mod dd;
mod fp;
mod pme;
mod runs;
mod stepper;

use thiserror::Error;

use crate::entropy::EntropyError;
use crate::linalg::{LinalgError, NonConvergenceReason};
use crate::schemes::SchemeError;

pub use dd::{dd_initial_state, solve_dd_steady, solve_dd_thermal, step_dd, DdState, DdStepper};
pub use fp::{solve_fp_steady, step_fp, FpStepper};
pub use pme::{solve_pme_steady, step_pme, PmeStepper, NEGATIVE_TOLERANCE};
pub use runs::{run_dd, run_fp, run_pme, ModelRun, DD_COLUMNS, FP_COLUMNS, PME_COLUMNS};
pub use stepper::{run_transient, Evolution, RunSummary, StepOutcome, StepperConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("Newton did not converge after {iterations} iterations (residual {residual:.3e}, {reason:?})")]
    NonConvergence { iterations: usize, residual: f64, reason: NonConvergenceReason, last: Vec<f64> },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid stepper configuration {0}")]
    Config(String),
}
