use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::{LinalgError, SparseMatrix};

const RESIDUAL_RTOL: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 3;

/// Sparse LU factorization, reusable across right-hand sides.
pub struct Factorization {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl Factorization {
    pub fn new(a: &SparseMatrix) -> Result<Self, LinalgError> {
        let n = a.n();
        for i in 0..n {
            if a.row(i).all(|(_, v)| v == 0.0) {
                return Err(LinalgError::Singular { pivot: i });
            }
        }
        let triplets: Vec<_> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| LinalgError::Backend(format!("{e:?}")))?;
        let lu = csc.sp_lu().map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => LinalgError::Singular { pivot: index },
            other => LinalgError::Backend(format!("{other:?}")),
        })?;
        Ok(Factorization { matrix: a.clone(), lu })
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solve `A x = b` to a max-norm residual of `1e-10 (1 + ‖b‖∞)`, with a
    /// few steps of iterative refinement if the first pass falls short.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        assert_eq!(b.len(), self.n(), "right-hand side length");
        let bound = RESIDUAL_RTOL * (1.0 + max_norm(b));
        let mut x = self.raw_solve(b);
        if let Some(pivot) = x.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::Singular { pivot });
        }
        let mut res = residual(&self.matrix, &x, b);
        for _ in 0..REFINEMENT_STEPS {
            if max_norm(&res) <= bound {
                break;
            }
            let dx = self.raw_solve(&res);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            res = residual(&self.matrix, &x, b);
        }
        let r = max_norm(&res);
        if !(r <= bound) {
            return Err(LinalgError::Inaccurate { residual: r, bound });
        }
        Ok(x)
    }
}

/// One-shot direct solve of `A x = b`.
pub fn solve_linear(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Factorization::new(a)?.solve(b)
}

/// `b - A x`
fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}
