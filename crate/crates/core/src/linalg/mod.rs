//! Sparse operators, direct solves, M-matrix structure checks and Newton.

mod mmatrix;
mod newton;
mod solve;
mod sparse;

use thiserror::Error;

pub use mmatrix::{check_m_matrix_structure, MMatrixReport, MMatrixViolation};
pub use newton::{newton_solve, NewtonConfig, NewtonOutcome, NonConvergenceReason, NonlinearSystem};
pub use solve::{max_norm, solve_linear, Factorization};
pub use sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular matrix (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("solve residual {residual:.3e} above bound {bound:.3e}")]
    Inaccurate { residual: f64, bound: f64 },
    #[error("sparse backend: {0}")]
    Backend(String),
}

/// Central-difference check of a Jacobian along direction `v`: returns the
/// relative mismatch `‖J v − (R(x+hv) − R(x−hv))/2h‖∞ / max(‖J v‖∞, 1)`.
pub fn jacobian_fd_mismatch<S: NonlinearSystem + ?Sized>(system: &S, x: &[f64], v: &[f64], h: f64) -> f64 {
    let jv = system.jacobian(x).matvec(v);
    let shifted = |s: f64| -> Vec<f64> { x.iter().zip(v).map(|(a, b)| a + s * h * b).collect() };
    let rp = system.residual(&shifted(1.0));
    let rm = system.residual(&shifted(-1.0));
    let fd: Vec<f64> = rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
    let diff: Vec<f64> = jv.iter().zip(&fd).map(|(a, b)| a - b).collect();
    max_norm(&diff) / max_norm(&jv).max(1.0)
}
