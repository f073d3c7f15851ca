//! B-function two-point fluxes and the assembled operators and residuals of
//! the Fokker-Planck, porous medium and drift-diffusion schemes.

mod bfunc;
mod data;
mod dd;
mod fp;
mod pme;

use thiserror::Error;

pub use bfunc::{bernoulli, bernoulli_derivative, BScheme, CustomB};
pub use data::{
    advection_from_potential, cell_means, dirichlet_means, discretize_coefficients, edge_diffusion, sample_potential,
    segment_mean, Diffusion, TransportData,
};
pub use dd::{
    assemble_dd_residual, assemble_poisson, poisson_boundary, DdData, DdSystem, DdTime, ThermalPoisson,
};
pub use fp::{
    assemble_fp_operator, assemble_from_coefficients, edge_steady_weight, edge_steady_weights, flux_fp,
    neighbor_value, peclet_guard, EdgeCoefficients, PecletPolicy, PecletViolation,
};
pub use pme::{assemble_pme_residual, signed_pow, signed_pow_derivative, PmeStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("{what} has length {got}, expected {expected}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("diffusion coefficient must be positive (index {index}: {value})")]
    Diffusion { index: usize, value: f64 },
    #[error("boundary value on Dirichlet edge {edge} must be positive, got {value}")]
    DirichletValue { edge: usize, value: f64 },
    #[error("no potential value supplied on Dirichlet edge {edge}")]
    MissingDirichletPotential { edge: usize },
    #[error("Péclet condition fails at {count} incidences (worst: edge {edge}, B = {value:.3e} < {beta})")]
    Peclet { count: usize, edge: usize, value: f64, beta: f64 },
    #[error("invalid B-function {0}")]
    InvalidB(String),
    #[error("mesh has no vertex geometry to sample boundary data")]
    NeedsGeometry,
    #[error("{0}")]
    Data(String),
}
