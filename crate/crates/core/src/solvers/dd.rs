use crate::linalg::{newton_solve, solve_linear, NewtonConfig, NewtonOutcome};
use crate::mesh::{EdgeTag, Mesh};
use crate::schemes::{assemble_poisson, poisson_boundary, BScheme, DdData, DdSystem, DdTime, ThermalPoisson};

use super::{Evolution, SolverError, StepOutcome};

/// Boundary data count as thermal when both constants agree to this.
const THERMAL_TOLERANCE: f64 = 1e-12;
/// Pseudo-time continuation for the steady solver stops growing `Δt` here.
const CONTINUATION_DT_MAX: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct DdState {
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
}

impl DdState {
    pub fn stacked(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * self.n.len());
        x.extend_from_slice(&self.n);
        x.extend_from_slice(&self.p);
        x.extend_from_slice(&self.v);
        x
    }

    pub fn from_stacked(x: &[f64]) -> Self {
        let n = x.len() / 3;
        DdState { n: x[..n].to_vec(), p: x[n..2 * n].to_vec(), v: x[2 * n..].to_vec() }
    }

    pub fn densities_positive(&self) -> bool {
        self.n.iter().chain(&self.p).all(|v| *v > 0.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n.len()
    }
}

fn thermal_state(alpha_n: f64, alpha_p: f64, v: Vec<f64>) -> DdState {
    DdState {
        n: v.iter().map(|v| (alpha_n + v).exp()).collect(),
        p: v.iter().map(|v| (alpha_p - v).exp()).collect(),
        v,
    }
}

/// Thermal equilibrium: Newton on the nonlinear Poisson equation, then
/// `N = exp(α_N + V)`, `P = exp(α_P - V)`. The first guess is the locally
/// charge-neutral potential; on failure Newton restarts from `V = 0`.
pub fn solve_dd_thermal(
    mesh: &Mesh,
    data: &DdData,
    alpha_n: f64,
    alpha_p: f64,
    newton: &NewtonConfig,
) -> Result<DdState, SolverError> {
    data.check(mesh)?;
    match data.thermal_constants(mesh, THERMAL_TOLERANCE) {
        Some((a, b)) if (a - alpha_n).abs() <= THERMAL_TOLERANCE && (b - alpha_p).abs() <= THERMAL_TOLERANCE => {}
        Some((a, b)) => {
            return Err(SolverError::Precondition(format!(
                "boundary data are thermal with constants ({a}, {b}), not ({alpha_n}, {alpha_p})"
            )))
        }
        None => return Err(SolverError::Precondition("boundary data are not in thermal equilibrium".into())),
    }
    let sys = ThermalPoisson::new(mesh, data, alpha_n, alpha_p);
    let shift = 0.5 * (alpha_p - alpha_n);
    let scale = 2.0 * (0.5 * (alpha_n + alpha_p)).exp();
    let neutral: Vec<f64> = data.doping.iter().map(|c| shift + (c / scale).asinh()).collect();
    let mut last = None;
    for guess in [neutral, vec![0.0; mesh.n_cells()]] {
        match newton_solve(&sys, guess, newton) {
            NewtonOutcome::Converged { solution, .. } => return Ok(thermal_state(alpha_n, alpha_p, solution)),
            fail => last = Some(fail),
        }
    }
    match last {
        Some(NewtonOutcome::NonConvergence { last, iterations, residual, reason }) => {
            Err(SolverError::NonConvergence { iterations, residual, reason, last })
        }
        _ => unreachable!("both guesses failed"),
    }
}

/// Densities from the given cell fields and the potential of the linear
/// Poisson equation with charge `P - N + C`.
pub fn dd_initial_state(mesh: &Mesh, data: &DdData, n0: Vec<f64>, p0: Vec<f64>) -> Result<DdState, SolverError> {
    data.check(mesh)?;
    if n0.len() != mesh.n_cells() || p0.len() != mesh.n_cells() {
        return Err(SolverError::Precondition("initial densities do not match the mesh".into()));
    }
    if !n0.iter().chain(&p0).all(|v| *v > 0.0) {
        return Err(SolverError::Precondition("initial densities must be positive".into()));
    }
    let charge: Vec<f64> = (0..mesh.n_cells()).map(|k| p0[k] - n0[k] + data.doping[k]).collect();
    let v = linear_potential(mesh, data, &charge)?;
    Ok(DdState { n: n0, p: p0, v })
}

fn linear_potential(mesh: &Mesh, data: &DdData, charge: &[f64]) -> Result<Vec<f64>, SolverError> {
    if !mesh.has_dirichlet() {
        return Err(SolverError::Precondition("potential needs a Dirichlet edge".into()));
    }
    let a = assemble_poisson(mesh, data.lambda);
    let mut b = poisson_boundary(mesh, data.lambda, &data.v_dirichlet);
    for (k, c) in mesh.cells().iter().enumerate() {
        b[k] += c.measure * charge[k];
    }
    Ok(solve_linear(&a, &b)?)
}

/// Start for the steady solve when the boundary data are not thermal:
/// `V` from the Poisson equation with the doping alone, densities
/// `exp(ᾱ_N + V)` and `exp(ᾱ_P - V)` with boundary-averaged constants.
fn biased_guess(mesh: &Mesh, data: &DdData) -> Result<DdState, SolverError> {
    let v = linear_potential(mesh, data, &data.doping)?;
    let (mut an, mut ap, mut count) = (0.0, 0.0, 0.0);
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.tag == EdgeTag::Dirichlet {
            an += data.n_dirichlet[e].ln() - data.v_dirichlet[e];
            ap += data.p_dirichlet[e].ln() + data.v_dirichlet[e];
            count += 1.0;
        }
    }
    Ok(thermal_state(an / count, ap / count, v))
}

/// Steady drift-diffusion state by coupled Newton. The start is the thermal
/// equilibrium when the boundary data allow one. If Newton fails, the
/// solver marches in pseudo-time with growing implicit steps and polishes
/// the result with a final steady Newton solve.
pub fn solve_dd_steady(mesh: &Mesh, data: &DdData, scheme: &BScheme, newton: &NewtonConfig) -> Result<DdState, SolverError> {
    data.check(mesh)?;
    let guess = match data.thermal_constants(mesh, THERMAL_TOLERANCE) {
        Some((an, ap)) => solve_dd_thermal(mesh, data, an, ap, newton)?,
        None => biased_guess(mesh, data)?,
    };
    let sys = DdSystem { mesh, data, scheme, time: DdTime::Steady };
    if let NewtonOutcome::Converged { solution, .. } = newton_solve(&sys, guess.stacked(), newton) {
        let s = DdState::from_stacked(&solution);
        if s.densities_positive() {
            return Ok(s);
        }
    }
    let mut state = guess;
    let mut dt = 1e-3;
    while dt < CONTINUATION_DT_MAX {
        match step_dd(mesh, data, scheme, &state, dt, newton)? {
            StepOutcome::Accepted(s) => {
                state = s;
                dt *= 2.0;
            }
            StepOutcome::Rejected(why) => {
                dt /= 2.0;
                if dt < 1e-10 {
                    return Err(SolverError::Precondition(format!("pseudo-time continuation stalled: {why}")));
                }
            }
        }
    }
    match newton_solve(&sys, state.stacked(), newton) {
        NewtonOutcome::Converged { solution, .. } => Ok(DdState::from_stacked(&solution)),
        NewtonOutcome::NonConvergence { last, iterations, residual, reason } => {
            Err(SolverError::NonConvergence { iterations, residual, reason, last })
        }
    }
}

/// One fully coupled backward Euler step by Newton from `prev`.
pub fn step_dd(
    mesh: &Mesh,
    data: &DdData,
    scheme: &BScheme,
    prev: &DdState,
    dt: f64,
    newton: &NewtonConfig,
) -> Result<StepOutcome<DdState>, SolverError> {
    if prev.n_cells() != mesh.n_cells() {
        return Err(SolverError::Precondition("state does not match the mesh".into()));
    }
    if !prev.densities_positive() {
        return Err(SolverError::Precondition("previous densities must be positive".into()));
    }
    if !(dt > 0.0) {
        return Err(SolverError::Precondition(format!("time step must be positive, got {dt}")));
    }
    let sys = DdSystem { mesh, data, scheme, time: DdTime::Implicit { n_prev: &prev.n, p_prev: &prev.p, dt } };
    match newton_solve(&sys, prev.stacked(), newton) {
        NewtonOutcome::Converged { solution, .. } => {
            let s = DdState::from_stacked(&solution);
            if s.densities_positive() {
                Ok(StepOutcome::Accepted(s))
            } else {
                Ok(StepOutcome::Rejected("non-positive density".into()))
            }
        }
        NewtonOutcome::NonConvergence { iterations, residual, reason, .. } => Ok(StepOutcome::Rejected(format!(
            "Newton stopped after {iterations} iterations at residual {residual:e} ({reason:?})"
        ))),
    }
}

pub struct DdStepper<'a> {
    pub mesh: &'a Mesh,
    pub data: &'a DdData,
    pub scheme: &'a BScheme,
    pub newton: NewtonConfig,
}

impl Evolution for DdStepper<'_> {
    type State = DdState;

    fn step(&mut self, state: &DdState, dt: f64) -> Result<StepOutcome<DdState>, SolverError> {
        step_dd(self.mesh, self.data, self.scheme, state, dt, &self.newton)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_norm;
    use crate::mesh::{reference_mesh, BoundarySpec, Segment};
    use crate::schemes::cell_means;
    use std::f64::consts::E;

    fn junction(level: usize, bias: f64) -> (Mesh, DdData) {
        let bs = BoundarySpec::new(
            vec![Segment::bottom(), Segment::horizontal(1.0, 0.0, 0.25)],
            vec![Segment::horizontal(1.0, 0.25, 1.0), Segment::left(), Segment::right()],
        );
        let mesh = reference_mesh(level, bs).unwrap();
        let ne = mesh.n_edges();
        let (mut nd, mut pd, mut vd) = (vec![1.0; ne], vec![1.0; ne], vec![0.0; ne]);
        for e in 0..ne {
            if mesh.edge(e).tag == EdgeTag::Dirichlet && mesh.edge_midpoint(e).unwrap()[1] < 0.5 {
                nd[e] = E;
                pd[e] = 1.0 / E;
                vd[e] = 1.0 + bias;
            } else if mesh.edge(e).tag == EdgeTag::Dirichlet {
                vd[e] = -bias;
            }
        }
        let doping = (0..mesh.n_cells())
            .map(|k| {
                let c = mesh.centroid(k);
                if c[0] < 0.5 && c[1] > 0.5 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let data = DdData::new(&mesh, doping, 1.0, nd, pd, vd).unwrap();
        (mesh, data)
    }

    #[test]
    fn neutral_constants() {
        let (mesh, mut data) = junction(0, 0.0);
        data.n_dirichlet.iter_mut().for_each(|v| *v = 1.0);
        data.p_dirichlet.iter_mut().for_each(|v| *v = 1.0);
        data.v_dirichlet.iter_mut().for_each(|v| *v = 0.0);
        data.doping.iter_mut().for_each(|v| *v = 0.0);
        let s = solve_dd_thermal(&mesh, &data, 0.0, 0.0, &NewtonConfig::default()).unwrap();
        assert!(max_norm(&s.v) < 1e-14);
        let st = solve_dd_steady(&mesh, &data, &BScheme::Upwind, &NewtonConfig::default()).unwrap();
        assert!(st.n.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn thermal_relations_hold() {
        let (mesh, data) = junction(1, 0.0);
        let s = solve_dd_thermal(&mesh, &data, 0.0, 0.0, &NewtonConfig::default()).unwrap();
        for k in 0..mesh.n_cells() {
            assert!((s.n[k].ln() - s.v[k]).abs() < 1e-12);
            assert!((s.p[k].ln() + s.v[k]).abs() < 1e-12);
        }
        assert!(solve_dd_thermal(&mesh, &data, 0.5, 0.0, &NewtonConfig::default()).is_err());
    }

    #[test]
    fn sg_steady_is_thermal_but_upwind_is_not() {
        let (mesh, data) = junction(1, 0.0);
        let cfg = NewtonConfig::default();
        let th = solve_dd_thermal(&mesh, &data, 0.0, 0.0, &cfg).unwrap();
        let sg = solve_dd_steady(&mesh, &data, &BScheme::ScharfetterGummel, &cfg).unwrap();
        let diff: Vec<f64> = sg.stacked().iter().zip(th.stacked()).map(|(a, b)| a - b).collect();
        assert!(max_norm(&diff) < 1e-9);
        let up = solve_dd_steady(&mesh, &data, &BScheme::Upwind, &cfg).unwrap();
        let dev = (0..mesh.n_cells()).map(|k| (up.n[k].ln() - up.v[k]).abs()).fold(0.0, f64::max);
        assert!(dev > 1e-6);
    }

    #[test]
    fn biased_steady_state_solves() {
        let (mesh, data) = junction(0, 2.5);
        assert!(data.thermal_constants(&mesh, 1e-12).is_none());
        let s = solve_dd_steady(&mesh, &data, &BScheme::ScharfetterGummel, &NewtonConfig::default()).unwrap();
        assert!(s.densities_positive());
        let sys = DdSystem { mesh: &mesh, data: &data, scheme: &BScheme::ScharfetterGummel, time: DdTime::Steady };
        use crate::linalg::NonlinearSystem;
        assert!(max_norm(&sys.residual(&s.stacked())) <= 1e-11);
    }

    #[test]
    fn step_from_junction_data_and_gauss_law() {
        let (mesh, data) = junction(1, 0.0);
        let n0 = cell_means(&mesh, &|p| E + (1.0 - E) * (1.0 - p[1].sqrt()));
        let p0 = cell_means(&mesh, &|p| 1.0 / E + (1.0 - 1.0 / E) * (1.0 - p[1].sqrt()));
        let s0 = dd_initial_state(&mesh, &data, n0, p0).unwrap();
        let s1 = match step_dd(&mesh, &data, &BScheme::ScharfetterGummel, &s0, 1e-2, &NewtonConfig::default()).unwrap() {
            StepOutcome::Accepted(s) => s,
            StepOutcome::Rejected(w) => panic!("{w}"),
        };
        let mut total = 0.0;
        for (k, c) in mesh.cells().iter().enumerate() {
            total += c.measure * (s1.p[k] - s1.n[k] + data.doping[k]);
        }
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.tag == EdgeTag::Dirichlet {
                total += data.lambda.powi(2) * edge.transmissibility * (data.v_dirichlet[e] - s1.v[edge.cells.0]);
            }
        }
        assert!(total.abs() < 1e-9, "{total}");
    }

    #[test]
    fn steady_state_is_fixed_point() {
        let (mesh, data) = junction(0, 0.0);
        let cfg = NewtonConfig::default();
        let s = solve_dd_steady(&mesh, &data, &BScheme::Centered, &cfg).unwrap();
        let next = match step_dd(&mesh, &data, &BScheme::Centered, &s, 1e-2, &cfg).unwrap() {
            StepOutcome::Accepted(x) => x,
            StepOutcome::Rejected(w) => panic!("{w}"),
        };
        let d: Vec<f64> = next.stacked().iter().zip(s.stacked()).map(|(a, b)| a - b).collect();
        assert!(max_norm(&d) < 1e-10);
    }
}
