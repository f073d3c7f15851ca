use super::{max_norm, solve_linear, LinalgError, SparseMatrix};

/// Stopping rule for [`newton_solve`]: absolute max-norm of the residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tolerance: 1e-11, max_iterations: 50 }
    }
}

impl NewtonConfig {
    pub fn is_valid(&self) -> bool {
        self.tolerance > 0.0 && self.max_iterations >= 1
    }
}

/// A square nonlinear system `R(x) = 0` with its exact Jacobian.
pub trait NonlinearSystem {
    fn dim(&self) -> usize;

    fn residual(&self, x: &[f64]) -> Vec<f64>;

    fn jacobian(&self, x: &[f64]) -> SparseMatrix;

    fn residual_and_jacobian(&self, x: &[f64]) -> (Vec<f64>, SparseMatrix) {
        (self.residual(x), self.jacobian(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonConvergenceReason {
    IterationBudget,
    SingularJacobian(usize),
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NewtonOutcome {
    Converged { solution: Vec<f64>, iterations: usize },
    NonConvergence { last: Vec<f64>, iterations: usize, residual: f64, reason: NonConvergenceReason },
}

impl NewtonOutcome {
    pub fn converged(self) -> Option<Vec<f64>> {
        match self {
            NewtonOutcome::Converged { solution, .. } => Some(solution),
            NewtonOutcome::NonConvergence { .. } => None,
        }
    }
}

/// Undamped Newton iteration from `x0`. Failure is a value, not an error, so
/// callers such as the adaptive time stepper can react to it.
pub fn newton_solve<S: NonlinearSystem + ?Sized>(system: &S, x0: Vec<f64>, cfg: &NewtonConfig) -> NewtonOutcome {
    let mut x = x0;
    let mut r = system.residual(&x);
    let mut norm = max_norm(&r);
    if norm <= cfg.tolerance {
        return NewtonOutcome::Converged { solution: x, iterations: 0 };
    }
    for it in 1..=cfg.max_iterations {
        let jac = system.jacobian(&x);
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = match solve_linear(&jac, &neg_r) {
            Ok(dx) => dx,
            Err(LinalgError::Singular { pivot }) => {
                return NewtonOutcome::NonConvergence {
                    last: x,
                    iterations: it,
                    residual: norm,
                    reason: NonConvergenceReason::SingularJacobian(pivot),
                }
            }
            Err(_) => {
                return NewtonOutcome::NonConvergence {
                    last: x,
                    iterations: it,
                    residual: norm,
                    reason: NonConvergenceReason::NonFinite,
                }
            }
        };
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        r = system.residual(&x);
        norm = max_norm(&r);
        if !norm.is_finite() {
            return NewtonOutcome::NonConvergence {
                last: x,
                iterations: it,
                residual: norm,
                reason: NonConvergenceReason::NonFinite,
            };
        }
        if norm <= cfg.tolerance {
            return NewtonOutcome::Converged { solution: x, iterations: it };
        }
    }
    NewtonOutcome::NonConvergence {
        last: x,
        iterations: cfg.max_iterations,
        residual: norm,
        reason: NonConvergenceReason::IterationBudget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Shift(Vec<f64>);

    impl NonlinearSystem for Shift {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn residual(&self, x: &[f64]) -> Vec<f64> {
            x.iter().zip(&self.0).map(|(a, c)| a - c).collect()
        }
        fn jacobian(&self, _: &[f64]) -> SparseMatrix {
            SparseMatrix::identity(self.0.len())
        }
    }

    struct Cubic;

    impl NonlinearSystem for Cubic {
        fn dim(&self) -> usize {
            1
        }
        fn residual(&self, x: &[f64]) -> Vec<f64> {
            vec![x[0].powi(3) - 8.0]
        }
        fn jacobian(&self, x: &[f64]) -> SparseMatrix {
            SparseMatrix::from_dense(&[vec![3.0 * x[0] * x[0]]])
        }
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_residual_converges_in_one_step() {
        let out = newton_solve(&Shift(vec![1.0, -3.0]), vec![7.0, 2.0], &NewtonConfig::default());
        assert_eq!(out, NewtonOutcome::Converged { solution: vec![1.0, -3.0], iterations: 1 });
    }

    #[test]
    fn cubic_matches_bisection() {
        let root = bisect(|x| x * x * x - 8.0, 0.0, 5.0);
        match newton_solve(&Cubic, vec![3.0], &NewtonConfig::default()) {
            NewtonOutcome::Converged { solution, iterations } => {
                assert!((solution[0] - root).abs() < 1e-12);
                assert!(iterations <= 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let cfg = NewtonConfig { tolerance: 1e-11, max_iterations: 1 };
        let out = newton_solve(&Cubic, vec![3.0], &cfg);
        assert!(matches!(
            out,
            NewtonOutcome::NonConvergence { reason: NonConvergenceReason::IterationBudget, iterations: 1, .. }
        ));
    }

    #[test]
    fn singular_jacobian_is_non_convergence() {
        // derivative vanishes at the start point
        let out = newton_solve(&Cubic, vec![0.0], &NewtonConfig::default());
        assert!(matches!(out, NewtonOutcome::NonConvergence { reason: NonConvergenceReason::SingularJacobian(0), .. }));
    }
}
