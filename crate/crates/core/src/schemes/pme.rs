use crate::linalg::{NonlinearSystem, SparseMatrix, TripletBuilder};
use crate::mesh::{EdgeTag, Mesh};

/// `sign(f) |f|^m`, so that Newton iterates dipping below zero stay defined.
#[inline]
pub fn signed_pow(f: f64, m: f64) -> f64 {
    f.signum() * f.abs().powf(m)
}

#[inline]
pub fn signed_pow_derivative(f: f64, m: f64) -> f64 {
    if f == 0.0 {
        if m == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        m * f.abs().powf(m - 1.0)
    }
}

/// One backward Euler step of the porous medium equation,
/// `m(K)(f_K - f_prev,K)/Δt + Σ_σ τ_σ (f_K^m - f_{K,σ}^m) = 0`, with the
/// Dirichlet values `(f^D)^m` across Dirichlet edges and no flux across
/// Neumann edges.
pub struct PmeStep<'a> {
    pub mesh: &'a Mesh,
    pub exponent: f64,
    /// Boundary value per edge, read on Dirichlet edges only.
    pub dirichlet: &'a [f64],
    pub f_prev: &'a [f64],
    pub dt: f64,
}

impl NonlinearSystem for PmeStep<'_> {
    fn dim(&self) -> usize {
        self.mesh.n_cells()
    }

    fn residual(&self, f: &[f64]) -> Vec<f64> {
        let m = self.exponent;
        let mut r: Vec<f64> = self
            .mesh
            .cells()
            .iter()
            .enumerate()
            .map(|(k, c)| c.measure * (f[k] - self.f_prev[k]) / self.dt)
            .collect();
        for (e, edge) in self.mesh.edges().iter().enumerate() {
            let k = edge.cells.0;
            let t = edge.transmissibility;
            match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(l)) => {
                    let flux = t * (signed_pow(f[k], m) - signed_pow(f[l], m));
                    r[k] += flux;
                    r[l] -= flux;
                }
                (EdgeTag::Dirichlet, _) => {
                    r[k] += t * (signed_pow(f[k], m) - signed_pow(self.dirichlet[e], m));
                }
                _ => {}
            }
        }
        r
    }

    fn jacobian(&self, f: &[f64]) -> SparseMatrix {
        let m = self.exponent;
        let n = self.dim();
        let mut j = TripletBuilder::with_capacity(n, n + 4 * self.mesh.n_edges());
        for (k, c) in self.mesh.cells().iter().enumerate() {
            j.add(k, k, c.measure / self.dt);
        }
        for edge in self.mesh.edges() {
            let k = edge.cells.0;
            let t = edge.transmissibility;
            match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(l)) => {
                    let (dk, dl) = (t * signed_pow_derivative(f[k], m), t * signed_pow_derivative(f[l], m));
                    j.add(k, k, dk);
                    j.add(k, l, -dl);
                    j.add(l, l, dl);
                    j.add(l, k, -dk);
                }
                (EdgeTag::Dirichlet, _) => j.add(k, k, t * signed_pow_derivative(f[k], m)),
                _ => {}
            }
        }
        j.build()
    }
}

pub fn assemble_pme_residual(
    mesh: &Mesh,
    f_prev: &[f64],
    f: &[f64],
    exponent: f64,
    dt: f64,
    dirichlet: &[f64],
) -> (Vec<f64>, SparseMatrix) {
    let s = PmeStep { mesh, exponent, dirichlet, f_prev, dt };
    (s.residual(f), s.jacobian(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobian_fd_mismatch;
    use crate::mesh::{reference_mesh, two_cell_strip, BoundarySpec};

    #[test]
    fn single_cell_without_flux() {
        let mesh = crate::mesh::Mesh::from_parts(
            vec![crate::mesh::Cell { measure: 0.5, center: [0.5, 0.5], edges: vec![] }],
            vec![],
            1.0,
            0.5,
            None,
        );
        let (r, _) = assemble_pme_residual(&mesh, &[1.0], &[1.4], 3.0, 0.1, &[]);
        assert!((r[0] - 0.5 * 0.4 / 0.1).abs() < 1e-14);
    }

    #[test]
    fn constant_boundary_state_is_fixed() {
        let mesh = two_cell_strip();
        let fd = vec![1.3; mesh.n_edges()];
        let f = [1.3, 1.3];
        let (r, _) = assemble_pme_residual(&mesh, &f, &f, 4.0, 1e-2, &fd);
        assert!(r.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn jacobian_matches_differences() {
        let mesh = reference_mesh(0, BoundarySpec::left_right_dirichlet()).unwrap();
        let n = mesh.n_cells();
        let f: Vec<f64> = (0..n).map(|k| 0.1 + 9.9 * ((k as f64 * 0.73).sin() * 0.5 + 0.5)).collect();
        let prev = vec![0.5; n];
        let v: Vec<f64> = (0..n).map(|k| (k as f64 * 1.31).cos()).collect();
        let fd = vec![1.0; mesh.n_edges()];
        let s = PmeStep { mesh: &mesh, exponent: 4.0, dirichlet: &fd, f_prev: &prev, dt: 1e-2 };
        assert!(jacobian_fd_mismatch(&s, &f, &v, 1e-7) < 1e-5);
    }

    #[test]
    fn signed_power_is_odd() {
        assert_eq!(signed_pow(-2.0, 2.0), -4.0);
        assert_eq!(signed_pow_derivative(-2.0, 2.0), 4.0);
        assert_eq!(signed_pow_derivative(0.0, 4.0), 0.0);
    }
}
