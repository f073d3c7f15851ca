//! The built-in experiments and the discrete problems they describe.

use std::f64::consts::{E, PI};

use crate::mesh::{reference_mesh, BoundarySpec, EdgeTag, Mesh, Point, Segment};
use crate::schemes::{
    advection_from_potential, cell_means, dirichlet_means, discretize_coefficients, sample_potential, DdData, Diffusion,
    TransportData,
};
use crate::solvers::{dd_initial_state, DdState};

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    FokkerPlanck,
    Pme,
    DriftDiffusion,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::FokkerPlanck => "fokker-planck",
            Model::Pme => "pme",
            Model::DriftDiffusion => "drift-diffusion",
        }
    }
}

/// Tunable data; each preset reads the fields relevant to its model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub m: f64,
    pub m_d: f64,
    pub lambda: f64,
    pub bias: f64,
    pub a_drain: f64,
    pub a_barrier: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { m: 4.0, m_d: 1.0, lambda: 1.0, bias: 0.0, a_drain: 3.0, a_barrier: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub model: Model,
    pub level: usize,
    /// Constant time step, or `None` for the adaptive policy.
    pub dt: Option<f64>,
    pub final_time: f64,
    pub params: Params,
    pub summary: &'static str,
}

/// Exponents and boundary values swept by `pme-sweep`.
pub const SWEEP_EXPONENTS: [f64; 6] = [2.0, 2.4, 2.8, 3.2, 3.6, 4.0];
pub const SWEEP_BOUNDARY_VALUES: [f64; 3] = [0.1, 1.0, 5.0];

pub fn presets() -> Vec<Preset> {
    let base = Params::default();
    vec![
        Preset {
            name: "fp-toy",
            model: Model::FokkerPlanck,
            level: 0,
            dt: Some(1e-2),
            final_time: 2.0,
            params: base,
            summary: "advection along x1 with boundary values 1 and e; exact solution known",
        },
        Preset {
            name: "fp-hetero",
            model: Model::FokkerPlanck,
            level: 4,
            dt: Some(1e-2),
            final_time: 20.0,
            params: base,
            summary: "drain (a = 3) crossed by two barriers (a = 0.01), fed from the top",
        },
        Preset {
            name: "pme-fill",
            model: Model::Pme,
            level: 4,
            dt: None,
            final_time: 15.0,
            params: Params { m: 4.0, ..base },
            summary: "porous medium filled through the right edge from zero initial data",
        },
        Preset {
            name: "pme-sweep",
            model: Model::Pme,
            level: 4,
            dt: None,
            final_time: 10.0,
            params: Params { m: 2.0, m_d: 1.0, ..base },
            summary: "decay rates over exponents m and constant boundary values m_D",
        },
        Preset {
            name: "dd-pn",
            model: Model::DriftDiffusion,
            level: 3,
            dt: Some(1e-2),
            final_time: 20.0,
            params: Params { lambda: 1.0, bias: 0.0, ..base },
            summary: "PN junction with thermal boundary contacts",
        },
        Preset {
            name: "dd-bias",
            model: Model::DriftDiffusion,
            level: 3,
            dt: Some(1e-2),
            final_time: 20.0,
            params: Params { lambda: 1.0, bias: 2.5, ..base },
            summary: "PN junction with the contact potentials shifted by +-bias",
        },
    ]
}

pub fn find_preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// A fully discretized problem ready for the solvers.
#[derive(Clone, Debug)]
pub enum Problem {
    FokkerPlanck {
        mesh: Mesh,
        data: TransportData,
        initial: Vec<f64>,
        /// Known steady state at the cell centers, if any.
        reference: Option<Vec<f64>>,
    },
    Pme {
        mesh: Mesh,
        dirichlet: Vec<f64>,
        m: f64,
        initial: Vec<f64>,
    },
    DriftDiffusion {
        mesh: Mesh,
        data: DdData,
        initial: DdState,
    },
}

impl Problem {
    pub fn mesh(&self) -> &Mesh {
        match self {
            Problem::FokkerPlanck { mesh, .. } | Problem::Pme { mesh, .. } | Problem::DriftDiffusion { mesh, .. } => mesh,
        }
    }
}

pub fn build_problem(preset: &Preset, level: usize, params: &Params) -> Result<Problem, CliError> {
    match preset.name {
        "fp-toy" => toy_problem(level),
        "fp-hetero" => hetero_problem(level, params.a_drain, params.a_barrier),
        "pme-fill" => filling_problem(level, params.m),
        "pme-sweep" => sweep_problem(level, params.m, params.m_d),
        "dd-pn" | "dd-bias" => junction_problem(level, params.lambda, params.bias),
        other => Err(CliError::UnknownPreset(other.to_string())),
    }
}

/// Exact toy-model solution `exp(x1) + exp(x1/2 - (π² + 1/4) t) sin(π x1)`.
pub fn toy_exact(t: f64, p: Point) -> f64 {
    p[0].exp() + (p[0] / 2.0 - (PI * PI + 0.25) * t).exp() * (PI * p[0]).sin()
}

pub fn toy_decay_rate() -> f64 {
    PI * PI + 0.25
}

pub fn toy_problem(level: usize) -> Result<Problem, CliError> {
    let mesh = reference_mesh(level, BoundarySpec::left_right_dirichlet())?;
    let (pc, pe) = sample_potential(&mesh, &|p| p[0])?;
    let adv = advection_from_potential(&mesh, &pc, &pe)?;
    let data = discretize_coefficients(&mesh, &Diffusion::Constant(1.0), &|p| if p[0] < 0.5 { 1.0 } else { E }, adv)?;
    let initial = mesh.cells().iter().map(|c| toy_exact(0.0, c.center)).collect();
    let reference = Some(mesh.cells().iter().map(|c| c.center[0].exp()).collect());
    Ok(Problem::FokkerPlanck { mesh, data, initial, reference })
}

/// Barrier region of the heterogeneous test: two horizontal bands, each
/// open on one side.
pub fn in_barrier(p: Point) -> bool {
    let lower = p[0] < 0.75 && p[1] > 0.25 && p[1] < 0.375;
    let upper = p[0] > 0.25 && p[1] > 0.625 && p[1] < 0.75;
    lower || upper
}

pub fn hetero_problem(level: usize, a_drain: f64, a_barrier: f64) -> Result<Problem, CliError> {
    let mesh = reference_mesh(level, BoundarySpec::top_bottom_dirichlet())?;
    let a: Vec<f64> = (0..mesh.n_cells()).map(|k| if in_barrier(mesh.centroid(k)) { a_barrier } else { a_drain }).collect();
    // U = (-1/2, 0) is the gradient of -x1/2.
    let (pc, pe) = sample_potential(&mesh, &|p| -p[0] / 2.0)?;
    let adv = advection_from_potential(&mesh, &pc, &pe)?;
    let data = discretize_coefficients(&mesh, &Diffusion::Cellwise(a), &|p| if p[1] > 0.5 { 1.0 } else { 0.018 }, adv)?;
    let initial = vec![0.018; mesh.n_cells()];
    Ok(Problem::FokkerPlanck { mesh, data, initial, reference: None })
}

pub fn filling_problem(level: usize, m: f64) -> Result<Problem, CliError> {
    let bs = BoundarySpec::new(vec![Segment::right()], vec![Segment::left(), Segment::top(), Segment::bottom()]);
    let mesh = reference_mesh(level, bs)?;
    let dirichlet = dirichlet_means(&mesh, &|p| if p[1] > 0.3 && p[1] < 0.7 { 2.5 } else { 1.0 })?;
    let initial = vec![0.0; mesh.n_cells()];
    Ok(Problem::Pme { mesh, dirichlet, m, initial })
}

pub fn sweep_problem(level: usize, m: f64, m_d: f64) -> Result<Problem, CliError> {
    let mesh = reference_mesh(level, BoundarySpec::all_dirichlet())?;
    let dirichlet: Vec<f64> =
        mesh.edges().iter().map(|e| if e.tag == EdgeTag::Dirichlet { m_d } else { 0.0 }).collect();
    let initial = vec![0.0; mesh.n_cells()];
    Ok(Problem::Pme { mesh, dirichlet, m, initial })
}

/// Contacts of the PN junction: the whole bottom edge and the left quarter
/// of the top edge.
pub fn junction_boundary() -> BoundarySpec {
    BoundarySpec::new(
        vec![Segment::bottom(), Segment::horizontal(1.0, 0.0, 0.25)],
        vec![Segment::horizontal(1.0, 0.25, 1.0), Segment::left(), Segment::right()],
    )
}

/// Doping `-1` in the P region `[0, 1/2] × [1/2, 1]`, `+1` elsewhere.
pub fn junction_doping(p: Point) -> f64 {
    if p[0] < 0.5 && p[1] > 0.5 {
        -1.0
    } else {
        1.0
    }
}

pub fn junction_data(mesh: &Mesh, lambda: f64, bias: f64) -> Result<DdData, CliError> {
    let bottom = |p: Point| p[1] < 0.5;
    let n_d = dirichlet_means(mesh, &|p| if bottom(p) { E } else { 1.0 })?;
    let p_d = dirichlet_means(mesh, &|p| if bottom(p) { 1.0 / E } else { 1.0 })?;
    // (log N^D - log P^D)/2 plus the bias, +bias at the bottom and -bias at the top
    let v_d = dirichlet_means(mesh, &|p| if bottom(p) { 1.0 + bias } else { -bias })?;
    let doping = (0..mesh.n_cells()).map(|k| junction_doping(mesh.centroid(k))).collect();
    Ok(DdData::new(mesh, doping, lambda, n_d, p_d, v_d)?)
}

pub fn junction_initial_densities(mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
    let n0 = cell_means(mesh, &|p| E + (1.0 - E) * (1.0 - p[1].sqrt()));
    let p0 = cell_means(mesh, &|p| 1.0 / E + (1.0 - 1.0 / E) * (1.0 - p[1].sqrt()));
    (n0, p0)
}

pub fn junction_problem(level: usize, lambda: f64, bias: f64) -> Result<Problem, CliError> {
    let mesh = reference_mesh(level, junction_boundary())?;
    let data = junction_data(&mesh, lambda, bias)?;
    let (n0, p0) = junction_initial_densities(&mesh);
    let initial = dd_initial_state(&mesh, &data, n0, p0)?;
    Ok(Problem::DriftDiffusion { mesh, data, initial })
}
