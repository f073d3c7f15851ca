use crate::linalg::{newton_solve, solve_linear, NewtonConfig, NewtonOutcome};
use crate::mesh::{EdgeTag, Mesh};
use crate::schemes::{assemble_poisson, poisson_boundary, signed_pow, PmeStep};

use super::{Evolution, SolverError, StepOutcome};

/// Converged Newton iterates may dip this far below zero before a step is
/// rejected; smaller excursions are clamped to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

fn check_exponent(m: f64) -> Result<(), SolverError> {
    if m >= 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(SolverError::Precondition(format!("porous medium exponent must be at least 1, got {m}")))
    }
}

/// Steady porous medium state. With Dirichlet edges this is the TPFA
/// Laplace problem in `u = f^m` with `u^D = (f^D)^m`; without them the
/// steady state is the constant carrying the mass of `initial`.
pub fn solve_pme_steady(mesh: &Mesh, dirichlet: &[f64], m: f64, initial: Option<&[f64]>) -> Result<Vec<f64>, SolverError> {
    check_exponent(m)?;
    if !mesh.has_dirichlet() {
        let f0 = initial.ok_or_else(|| {
            SolverError::Precondition("all-Neumann porous medium problem needs initial data to fix the mass".into())
        })?;
        if f0.len() != mesh.n_cells() {
            return Err(SolverError::Precondition(format!("initial data has {} entries", f0.len())));
        }
        let mass: f64 = mesh.cells().iter().zip(f0).map(|(c, v)| c.measure * v).sum();
        let total: f64 = mesh.cells().iter().map(|c| c.measure).sum();
        return Ok(vec![mass / total; mesh.n_cells()]);
    }
    if dirichlet.len() != mesh.n_edges() {
        return Err(SolverError::Precondition(format!("boundary data has {} entries", dirichlet.len())));
    }
    let mut ud = vec![0.0; mesh.n_edges()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.tag == EdgeTag::Dirichlet {
            if !(dirichlet[e] > 0.0) {
                return Err(SolverError::Precondition(format!("boundary value {} on edge {e}", dirichlet[e])));
            }
            ud[e] = dirichlet[e].powf(m);
        }
    }
    let a = assemble_poisson(mesh, 1.0);
    let b = poisson_boundary(mesh, 1.0, &ud);
    let u = solve_linear(&a, &b)?;
    Ok(u.iter().map(|v| signed_pow(*v, 1.0 / m)).collect())
}

/// One backward Euler step by Newton from `f_prev`. Non-convergence and
/// clearly negative results come back as [`StepOutcome::Rejected`].
pub fn step_pme(
    mesh: &Mesh,
    dirichlet: &[f64],
    m: f64,
    f_prev: &[f64],
    dt: f64,
    newton: &NewtonConfig,
) -> Result<StepOutcome<Vec<f64>>, SolverError> {
    check_exponent(m)?;
    if f_prev.len() != mesh.n_cells() || dirichlet.len() != mesh.n_edges() {
        return Err(SolverError::Precondition("field lengths do not match the mesh".into()));
    }
    if let Some(k) = f_prev.iter().position(|v| !(*v >= -NEGATIVE_TOLERANCE)) {
        return Err(SolverError::Precondition(format!("previous state negative at cell {k}: {}", f_prev[k])));
    }
    if !(dt > 0.0) {
        return Err(SolverError::Precondition(format!("time step must be positive, got {dt}")));
    }
    let sys = PmeStep { mesh, exponent: m, dirichlet, f_prev, dt };
    match newton_solve(&sys, f_prev.to_vec(), newton) {
        NewtonOutcome::Converged { mut solution, .. } => {
            let min = solution.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -NEGATIVE_TOLERANCE {
                return Ok(StepOutcome::Rejected(format!("negative density {min:e}")));
            }
            solution.iter_mut().for_each(|v| *v = v.max(0.0));
            Ok(StepOutcome::Accepted(solution))
        }
        NewtonOutcome::NonConvergence { iterations, residual, reason, .. } => Ok(StepOutcome::Rejected(format!(
            "Newton stopped after {iterations} iterations at residual {residual:e} ({reason:?})"
        ))),
    }
}

pub struct PmeStepper<'a> {
    pub mesh: &'a Mesh,
    pub dirichlet: &'a [f64],
    pub exponent: f64,
    pub newton: NewtonConfig,
}

impl Evolution for PmeStepper<'_> {
    type State = Vec<f64>;

    fn step(&mut self, state: &Vec<f64>, dt: f64) -> Result<StepOutcome<Vec<f64>>, SolverError> {
        step_pme(self.mesh, self.dirichlet, self.exponent, state, dt, &self.newton)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{reference_mesh, two_cell_strip, BoundarySpec, Segment};
    use crate::schemes::{dirichlet_means, BScheme, PecletPolicy, TransportData};
    use crate::solvers::step_fp;

    fn accepted(o: StepOutcome<Vec<f64>>) -> Vec<f64> {
        match o {
            StepOutcome::Accepted(f) => f,
            StepOutcome::Rejected(why) => panic!("{why}"),
        }
    }

    #[test]
    fn constant_boundary_gives_constant() {
        let mesh = reference_mesh(1, BoundarySpec::all_dirichlet()).unwrap();
        let fd = vec![1.7; mesh.n_edges()];
        let f = solve_pme_steady(&mesh, &fd, 3.0, None).unwrap();
        assert!(f.iter().all(|v| (v - 1.7).abs() < 1e-12));
    }

    #[test]
    fn neumann_uses_mass() {
        let mesh = reference_mesh(0, BoundarySpec::all_neumann()).unwrap();
        let fd = vec![0.0; mesh.n_edges()];
        assert!(solve_pme_steady(&mesh, &fd, 2.0, None).is_err());
        let f0 = vec![0.018; mesh.n_cells()];
        let f = solve_pme_steady(&mesh, &fd, 2.0, Some(&f0)).unwrap();
        assert!(f.iter().all(|v| (v - 0.018).abs() < 1e-15));
    }

    #[test]
    fn steady_is_fixed_point_of_step() {
        let mesh = reference_mesh(0, BoundarySpec::left_right_dirichlet()).unwrap();
        let fd = dirichlet_means(&mesh, &|p| 1.0 + p[0]).unwrap();
        let finf = solve_pme_steady(&mesh, &fd, 2.0, None).unwrap();
        let next = accepted(step_pme(&mesh, &fd, 2.0, &finf, 1e-2, &NewtonConfig::default()).unwrap());
        for (a, b) in next.iter().zip(&finf) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn linear_case_matches_fokker_planck() {
        let mesh = two_cell_strip();
        let mut fd = vec![0.0; mesh.n_edges()];
        fd[0] = 1.0;
        fd[1] = 2.0;
        let f0 = [0.3, 0.9];
        let a = accepted(step_pme(&mesh, &fd, 1.0, &f0, 0.1, &NewtonConfig::default()).unwrap());
        let data = TransportData::new(&mesh, vec![1.0; mesh.n_edges()], vec![0.0; mesh.n_edges()], fd).unwrap();
        let b = step_fp(&mesh, &data, &BScheme::Upwind, PecletPolicy::default(), &f0, 0.1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn first_filling_step_enters_through_the_boundary() {
        let bs = BoundarySpec::new(vec![Segment::right()], vec![Segment::left(), Segment::top(), Segment::bottom()]);
        let mesh = reference_mesh(1, bs).unwrap();
        let fd = dirichlet_means(&mesh, &|p| if p[1] > 0.3 && p[1] < 0.7 { 2.5 } else { 1.0 }).unwrap();
        let f0 = vec![0.0; mesh.n_cells()];
        let dt = 1e-3;
        let f1 = accepted(step_pme(&mesh, &fd, 4.0, &f0, dt, &NewtonConfig::default()).unwrap());
        let mut inflow = 0.0;
        let (mut near_min, mut near_max, mut far_max) = (f64::INFINITY, 0.0f64, 0.0f64);
        for (k, c) in mesh.cells().iter().enumerate() {
            let mut touches = false;
            for &e in &c.edges {
                let edge = mesh.edge(e);
                if edge.tag == EdgeTag::Dirichlet {
                    touches = true;
                    inflow += edge.transmissibility * (fd[e].powi(4) - f1[k].powi(4));
                }
            }
            if touches {
                near_min = near_min.min(f1[k]);
                near_max = near_max.max(f1[k]);
            } else {
                far_max = far_max.max(f1[k]);
            }
        }
        let mass: f64 = mesh.cells().iter().zip(&f1).map(|(c, v)| c.measure * v).sum();
        assert!((mass - dt * inflow).abs() < 1e-12);
        assert!(near_min > 0.0 && far_max < near_max, "{near_min} {far_max}");
        assert!(f1.iter().all(|v| *v >= 0.0 && *v <= 2.5));
    }
}
