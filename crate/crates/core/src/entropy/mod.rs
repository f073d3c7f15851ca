//! Discrete relative entropies, their dissipations, distances and decay-rate
//! estimates.

mod functionals;
mod phi;
mod rates;
mod trace;

use thiserror::Error;

pub use functionals::{
    boltzmann_h, dd_entropy, entrophy, entrophy_dissipation, lp_distance, phi_dissipation, relative_phi_entropy,
    PhiDissipation,
};
pub use phi::{phi_mean, PhiFunction};
pub use rates::{fit_decay_rate, theoretical_rate_fp, theoretical_rate_pme, DecayFit, UNIT_SQUARE_POINCARE};
pub use trace::EntropyTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("reference or density must be positive (index {index}: {value})")]
    NonPositive { index: usize, value: f64 },
    #[error("field has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("non-positive value {value} at t = {t} inside the fit window")]
    NonPositiveSample { t: f64, value: f64 },
    #[error("fit window holds {got} samples, need at least {needed}")]
    TooFewSamples { got: usize, needed: usize },
    #[error("trace has no column `{0}`")]
    UnknownColumn(String),
}
