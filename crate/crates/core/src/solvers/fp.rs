use crate::linalg::{solve_linear, Factorization, SparseMatrix};
use crate::mesh::Mesh;
use crate::schemes::{assemble_fp_operator, BScheme, PecletPolicy, TransportData};

use super::{Evolution, SolverError, StepOutcome};

/// Discrete steady state `M f∞ = b^D`. Fails if the solution is not
/// strictly positive, which the assembly conditions rule out.
pub fn solve_fp_steady(mesh: &Mesh, data: &TransportData, scheme: &BScheme, policy: PecletPolicy) -> Result<Vec<f64>, SolverError> {
    let (m, b) = assemble_fp_operator(mesh, data, scheme, policy)?;
    if !mesh.has_dirichlet() {
        return Err(SolverError::Precondition("steady Fokker-Planck problem needs a Dirichlet edge".into()));
    }
    let f = solve_linear(&m, &b)?;
    if let Some(k) = f.iter().position(|v| !(*v > 0.0)) {
        return Err(SolverError::Precondition(format!("steady state not positive at cell {k}: {}", f[k])));
    }
    Ok(f)
}

/// One backward Euler step `(diag m(K) + Δt M) f = m(K) f_prev + Δt b^D`.
pub fn step_fp(
    mesh: &Mesh,
    data: &TransportData,
    scheme: &BScheme,
    policy: PecletPolicy,
    f_prev: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SolverError> {
    let mut s = FpStepper::new(mesh, data, scheme, policy)?;
    s.advance(f_prev, dt)
}

/// Linear Fokker-Planck stepper reusing the factorization while `Δt`
/// stays the same.
pub struct FpStepper {
    operator: SparseMatrix,
    boundary: Vec<f64>,
    measures: Vec<f64>,
    cached: Option<(u64, Factorization)>,
}

impl FpStepper {
    pub fn new(mesh: &Mesh, data: &TransportData, scheme: &BScheme, policy: PecletPolicy) -> Result<Self, SolverError> {
        let (operator, boundary) = assemble_fp_operator(mesh, data, scheme, policy)?;
        let measures = mesh.cells().iter().map(|c| c.measure).collect();
        Ok(FpStepper { operator, boundary, measures, cached: None })
    }

    pub fn operator(&self) -> (&SparseMatrix, &[f64]) {
        (&self.operator, &self.boundary)
    }

    pub fn advance(&mut self, f_prev: &[f64], dt: f64) -> Result<Vec<f64>, SolverError> {
        if f_prev.len() != self.measures.len() {
            return Err(SolverError::Precondition(format!(
                "state has {} entries, mesh has {} cells",
                f_prev.len(),
                self.measures.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(SolverError::Precondition(format!("time step must be positive, got {dt}")));
        }
        let key = dt.to_bits();
        if self.cached.as_ref().map(|c| c.0) != Some(key) {
            let a = self.operator.scaled_plus_diagonal(dt, &self.measures);
            self.cached = Some((key, Factorization::new(&a)?));
        }
        let rhs: Vec<f64> = self
            .measures
            .iter()
            .zip(f_prev)
            .zip(&self.boundary)
            .map(|((m, f), b)| m * f + dt * b)
            .collect();
        let fact = &self.cached.as_ref().expect("factorization cached above").1;
        Ok(fact.solve(&rhs)?)
    }
}

impl Evolution for FpStepper {
    type State = Vec<f64>;

    fn step(&mut self, state: &Vec<f64>, dt: f64) -> Result<StepOutcome<Vec<f64>>, SolverError> {
        self.advance(state, dt).map(StepOutcome::Accepted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_norm;
    use crate::mesh::{reference_mesh, two_cell_strip, BoundarySpec};
    use crate::schemes::{advection_from_potential, discretize_coefficients, flux_fp, sample_potential, Diffusion};

    fn strip(fd: (f64, f64)) -> (Mesh, TransportData) {
        let mesh = two_cell_strip();
        let mut d = vec![0.0; mesh.n_edges()];
        d[0] = fd.0;
        d[1] = fd.1;
        let data = TransportData::new(&mesh, vec![1.0; mesh.n_edges()], vec![0.0; mesh.n_edges()], d).unwrap();
        (mesh, data)
    }

    fn toy(level: usize) -> (Mesh, TransportData) {
        let mesh = reference_mesh(level, BoundarySpec::left_right_dirichlet()).unwrap();
        let (pc, pe) = sample_potential(&mesh, &|p| p[0]).unwrap();
        let adv = advection_from_potential(&mesh, &pc, &pe).unwrap();
        let data = discretize_coefficients(&mesh, &Diffusion::Constant(1.0), &|p| p[0].exp(), adv).unwrap();
        (mesh, data)
    }

    #[test]
    fn two_cell_linear_profile() {
        let (mesh, data) = strip((1.0, 2.0));
        let f = solve_fp_steady(&mesh, &data, &BScheme::Upwind, PecletPolicy::default()).unwrap();
        assert!((f[0] - 1.25).abs() < 1e-14 && (f[1] - 1.75).abs() < 1e-14);
    }

    #[test]
    fn constants_are_steady() {
        let (mesh, data) = strip((0.7, 0.7));
        for s in BScheme::builtin() {
            let f = solve_fp_steady(&mesh, &data, &s, PecletPolicy::default()).unwrap();
            assert!(f.iter().all(|v| (v - 0.7).abs() < 1e-14));
        }
    }

    #[test]
    fn sg_reproduces_exponential() {
        let (mesh, data) = toy(0);
        let f = solve_fp_steady(&mesh, &data, &BScheme::ScharfetterGummel, PecletPolicy::default()).unwrap();
        let err: f64 = mesh.cells().iter().zip(&f).map(|(c, v)| c.measure * (v - c.center[0].exp()).abs()).sum();
        assert!(err < 1e-12, "{err}");
        for k in 0..mesh.n_cells() {
            let div: f64 = mesh.cell(k).edges.iter().map(|&e| flux_fp(&mesh, &data, &BScheme::ScharfetterGummel, &f, k, e)).sum();
            assert!(div.abs() < 1e-12);
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let (mesh, data) = toy(1);
        let s = BScheme::Centered;
        let finf = solve_fp_steady(&mesh, &data, &s, PecletPolicy::default()).unwrap();
        let next = step_fp(&mesh, &data, &s, PecletPolicy::default(), &finf, 1e-2).unwrap();
        let d: Vec<f64> = next.iter().zip(&finf).map(|(a, b)| a - b).collect();
        assert!(max_norm(&d) < 1e-12);
    }

    #[test]
    fn huge_step_lands_on_steady_state() {
        let (mesh, data) = toy(0);
        let s = BScheme::Upwind;
        let finf = solve_fp_steady(&mesh, &data, &s, PecletPolicy::default()).unwrap();
        let f0 = vec![5.0; mesh.n_cells()];
        let f1 = step_fp(&mesh, &data, &s, PecletPolicy::default(), &f0, 1e6).unwrap();
        for (a, b) in f1.iter().zip(&finf) {
            assert!((a - b).abs() <= 1e-4 * b);
        }
    }

    #[test]
    fn mass_changes_only_through_boundary() {
        let (mesh, data) = toy(0);
        let s = BScheme::ScharfetterGummel;
        let f0: Vec<f64> = mesh.cells().iter().map(|c| 1.0 + c.center[1]).collect();
        let dt = 1e-2;
        let f1 = step_fp(&mesh, &data, &s, PecletPolicy::default(), &f0, dt).unwrap();
        let mass = |f: &[f64]| mesh.cells().iter().zip(f).map(|(c, v)| c.measure * v).sum::<f64>();
        let mut outflow = 0.0;
        for (e, edge) in mesh.edges().iter().enumerate() {
            if !edge.is_interior() {
                outflow += flux_fp(&mesh, &data, &s, &f1, edge.cells.0, e);
            }
        }
        assert!((mass(&f1) - mass(&f0) + dt * outflow).abs() < 1e-13);
        assert!(f1.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn cache_is_keyed_by_step() {
        let (mesh, data) = toy(0);
        let s = BScheme::Upwind;
        let mut st = FpStepper::new(&mesh, &data, &s, PecletPolicy::default()).unwrap();
        let f0 = vec![1.0; mesh.n_cells()];
        let a = st.advance(&f0, 1e-2).unwrap();
        let _ = st.advance(&f0, 2e-2).unwrap();
        let b = st.advance(&f0, 1e-2).unwrap();
        assert_eq!(a, b);
        let fresh = step_fp(&mesh, &data, &s, PecletPolicy::default(), &f0, 1e-2).unwrap();
        assert_eq!(a, fresh);
    }
}
