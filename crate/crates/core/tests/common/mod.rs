#![allow(dead_code)]

use entrofv::mesh::{reference_mesh, BoundarySpec, Mesh, Point};
use entrofv::schemes::{advection_from_potential, dirichlet_means, discretize_coefficients, sample_potential, Diffusion, TransportData};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const SEED: [u8; 32] = *b"entrofv structural property run!";

/// Deterministic runner: ChaCha with a fixed seed.
pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

pub fn boundary_layout(i: usize) -> BoundarySpec {
    match i % 4 {
        0 => BoundarySpec::all_dirichlet(),
        1 => BoundarySpec::left_right_dirichlet(),
        2 => BoundarySpec::top_bottom_dirichlet(),
        _ => BoundarySpec::all_neumann(),
    }
}

/// Smooth potential `c0 x + c1 y + c2 sin(π x y)`.
pub fn potential(c: [f64; 3]) -> impl Fn(Point) -> f64 {
    move |p: Point| c[0] * p[0] + c[1] * p[1] + c[2] * (std::f64::consts::PI * p[0] * p[1]).sin()
}

/// Transport data with potential-driven advection, cellwise diffusion and
/// boundary values `g`.
pub fn transport(mesh: &Mesh, c: [f64; 3], a: Vec<f64>, g: &dyn Fn(Point) -> f64) -> TransportData {
    let phi = potential(c);
    let (pc, pe) = sample_potential(mesh, &phi).unwrap();
    let adv = advection_from_potential(mesh, &pc, &pe).unwrap();
    discretize_coefficients(mesh, &Diffusion::Cellwise(a), g, adv).unwrap()
}

pub fn coarse(boundary: BoundarySpec) -> Mesh {
    reference_mesh(0, boundary).unwrap()
}

pub fn boundary_values(mesh: &Mesh, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
    dirichlet_means(mesh, g).unwrap()
}
