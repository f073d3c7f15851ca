use std::collections::VecDeque;

use super::SparseMatrix;

const DOMINANCE_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MMatrixViolation {
    PositiveOffDiagonal { row: usize, col: usize, value: f64 },
    NonPositiveDiagonal { row: usize, value: f64 },
    /// Column sum of |off-diagonals| exceeds the diagonal.
    ColumnDominance { col: usize, deficit: f64 },
    /// A Dirichlet-touched column is only weakly dominant.
    NotStrict { col: usize },
    /// No chain of nonzeros leads from this column to a strictly dominant one.
    NoChain { col: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MMatrixReport {
    pub violations: Vec<MMatrixViolation>,
}

impl MMatrixReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the sign pattern and column diagonal dominance that make a TPFA
/// operator a nonsingular M-matrix.
///
/// `dirichlet_touched[j]` marks the unknowns adjacent to a Dirichlet edge;
/// their columns must be strictly dominant, and every other column must be
/// linked to one of them through nonzero entries.
pub fn check_m_matrix_structure(a: &SparseMatrix, dirichlet_touched: &[bool]) -> MMatrixReport {
    let n = a.n();
    assert_eq!(dirichlet_touched.len(), n);
    let mut out = Vec::new();
    let mut diag = vec![0.0; n];
    let mut off_sum = vec![0.0; n];
    for (i, j, v) in a.triplets() {
        if i == j {
            diag[j] = v;
        } else {
            if v > 0.0 {
                out.push(MMatrixViolation::PositiveOffDiagonal { row: i, col: j, value: v });
            }
            off_sum[j] += v.abs();
        }
    }

    let mut strict = vec![false; n];
    for j in 0..n {
        if diag[j] <= 0.0 {
            out.push(MMatrixViolation::NonPositiveDiagonal { row: j, value: diag[j] });
            continue;
        }
        let margin = diag[j] - off_sum[j];
        let tol = DOMINANCE_RTOL * diag[j];
        if margin < -tol {
            out.push(MMatrixViolation::ColumnDominance { col: j, deficit: -margin });
        }
        strict[j] = margin > tol;
        if dirichlet_touched[j] && !strict[j] {
            out.push(MMatrixViolation::NotStrict { col: j });
        }
    }

    // Reverse search from strictly dominant columns: column j reaches k when
    // the entry (k, j) is nonzero, so k is reachable backwards from j.
    let at = a.transpose();
    let mut reached = strict.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&j| strict[j]).collect();
    while let Some(k) = queue.pop_front() {
        for (j, v) in a.row(k).chain(at.row(k)) {
            if v != 0.0 && !reached[j] {
                reached[j] = true;
                queue.push_back(j);
            }
        }
    }
    out.extend((0..n).filter(|&j| !reached[j]).map(|col| MMatrixViolation::NoChain { col }));
    MMatrixReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cell_operator_is_clean() {
        let a = SparseMatrix::from_dense(&[vec![6.0, -2.0], vec![-2.0, 6.0]]);
        assert!(check_m_matrix_structure(&a, &[true, true]).is_empty());
    }

    #[test]
    fn positive_off_diagonal_is_flagged() {
        let a = SparseMatrix::from_dense(&[vec![6.0, 2.0], vec![-2.0, 6.0]]);
        let r = check_m_matrix_structure(&a, &[true, true]);
        assert_eq!(r.violations, vec![MMatrixViolation::PositiveOffDiagonal { row: 0, col: 1, value: 2.0 }]);
    }

    #[test]
    fn chain_through_weak_columns() {
        // 1D Laplacian with one Dirichlet end: only column 0 is strict
        let a = SparseMatrix::from_dense(&[
            vec![3.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ]);
        assert!(check_m_matrix_structure(&a, &[true, false, false]).is_empty());
        // decoupled last unknown without strict dominance
        let b = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        let r = check_m_matrix_structure(&b, &[true, false]);
        assert!(r.violations.contains(&MMatrixViolation::NonPositiveDiagonal { row: 1, value: 0.0 }));
        assert!(r.violations.contains(&MMatrixViolation::NoChain { col: 1 }));
    }

    #[test]
    fn dirichlet_column_must_be_strict() {
        let a = SparseMatrix::from_dense(&[vec![1.0, -1.0], vec![-1.0, 2.0]]);
        let r = check_m_matrix_structure(&a, &[true, true]);
        assert!(r.violations.contains(&MMatrixViolation::NotStrict { col: 0 }));
    }
}
