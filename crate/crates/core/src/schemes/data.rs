use crate::mesh::{EdgeTag, Mesh, Point};

use super::SchemeError;

/// Sub-intervals and 3-point Gauss-Legendre nodes for edge means. Many
/// sub-intervals keep piecewise-constant boundary data accurate on edges
/// that straddle a jump.
const MEAN_SUBINTERVALS: usize = 32;
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Per-edge problem data of a linear convection-diffusion equation.
///
/// `advection[e]` is `U_{K,σ}` seen from the reference cell `edges[e].cells.0`;
/// the value seen from the other cell is its negative, so antisymmetry holds
/// by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportData {
    pub diffusion: Vec<f64>,
    pub advection: Vec<f64>,
    /// Boundary value on Dirichlet edges, ignored elsewhere.
    pub dirichlet: Vec<f64>,
}

impl TransportData {
    pub fn new(mesh: &Mesh, diffusion: Vec<f64>, advection: Vec<f64>, dirichlet: Vec<f64>) -> Result<Self, SchemeError> {
        let d = TransportData { diffusion, advection, dirichlet };
        d.check(mesh)?;
        Ok(d)
    }

    pub fn check(&self, mesh: &Mesh) -> Result<(), SchemeError> {
        let ne = mesh.n_edges();
        for (what, v) in [("diffusion", &self.diffusion), ("advection", &self.advection), ("dirichlet", &self.dirichlet)] {
            if v.len() != ne {
                return Err(SchemeError::Length { what, expected: ne, got: v.len() });
            }
        }
        for (e, edge) in mesh.edges().iter().enumerate() {
            if !(self.diffusion[e] > 0.0) {
                return Err(SchemeError::Diffusion { index: e, value: self.diffusion[e] });
            }
            if !self.advection[e].is_finite() {
                return Err(SchemeError::Data(format!("non-finite advection on edge {e}")));
            }
            if edge.tag == EdgeTag::Dirichlet && !(self.dirichlet[e] > 0.0) {
                return Err(SchemeError::DirichletValue { edge: e, value: self.dirichlet[e] });
            }
        }
        Ok(())
    }

    /// `U_{K,σ}` seen from cell `k`.
    pub fn advection_from(&self, mesh: &Mesh, e: usize, k: usize) -> f64 {
        mesh.edge(e).orientation(k) * self.advection[e]
    }

    /// Local Péclet number `U_{K,σ} d_σ / a_σ` seen from the reference cell.
    pub fn peclet(&self, mesh: &Mesh, e: usize) -> f64 {
        self.advection[e] * mesh.edge(e).dist / self.diffusion[e]
    }
}

/// Diffusion coefficient in one of the forms accepted by
/// [`discretize_coefficients`].
#[derive(Clone, Debug, PartialEq)]
pub enum Diffusion {
    Constant(f64),
    /// One value per cell; interior edges get the harmonic-type average.
    Cellwise(Vec<f64>),
    Edgewise(Vec<f64>),
}

/// Edge diffusion values. Cellwise data use
/// `a_σ = d_σ a_K a_L / (d_{L,σ} a_K + d_{K,σ} a_L)` inside and `a_K` on the
/// boundary.
pub fn edge_diffusion(mesh: &Mesh, a: &Diffusion) -> Result<Vec<f64>, SchemeError> {
    let out = match a {
        Diffusion::Constant(c) => vec![*c; mesh.n_edges()],
        Diffusion::Edgewise(v) => {
            if v.len() != mesh.n_edges() {
                return Err(SchemeError::Length { what: "diffusion", expected: mesh.n_edges(), got: v.len() });
            }
            v.clone()
        }
        Diffusion::Cellwise(v) => {
            if v.len() != mesh.n_cells() {
                return Err(SchemeError::Length { what: "diffusion", expected: mesh.n_cells(), got: v.len() });
            }
            if let Some(k) = v.iter().position(|x| !(*x > 0.0)) {
                return Err(SchemeError::Diffusion { index: k, value: v[k] });
            }
            mesh.edges()
                .iter()
                .map(|e| match (e.cells, e.cell_dist) {
                    ((k, Some(l)), _) if v[k] == v[l] => v[k],
                    ((k, Some(l)), (dk, Some(dl))) => e.dist * v[k] * v[l] / (dl * v[k] + dk * v[l]),
                    ((k, _), _) => v[k],
                })
                .collect()
        }
    };
    if let Some(e) = out.iter().position(|x| !(*x > 0.0)) {
        return Err(SchemeError::Diffusion { index: e, value: out[e] });
    }
    Ok(out)
}

/// Mean of `g` over each Dirichlet edge (zero elsewhere).
pub fn dirichlet_means(mesh: &Mesh, g: &dyn Fn(Point) -> f64) -> Result<Vec<f64>, SchemeError> {
    (0..mesh.n_edges())
        .map(|e| {
            if mesh.edge(e).tag != EdgeTag::Dirichlet {
                return Ok(0.0);
            }
            let [p, q] = mesh.edge_endpoints(e).ok_or(SchemeError::NeedsGeometry)?;
            Ok(segment_mean(p, q, g))
        })
        .collect()
}

/// Composite Gauss mean of `g` on the segment `pq`. Constant samples are
/// returned as they are, so piecewise constant data stay exact.
pub fn segment_mean(p: Point, q: Point, g: &dyn Fn(Point) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut first = None;
    let mut constant = true;
    let h = 1.0 / MEAN_SUBINTERVALS as f64;
    for i in 0..MEAN_SUBINTERVALS {
        let mid = (i as f64 + 0.5) * h;
        for (node, w) in GAUSS3 {
            let s = mid + 0.5 * h * node;
            let v = g([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
            constant &= *first.get_or_insert(v) == v;
            acc += 0.5 * h * w * v;
        }
    }
    match first {
        Some(v) if constant => v,
        _ => acc,
    }
}

/// Cell averages of `g` by the edge-midpoint rule (exact for quadratics);
/// center values when the mesh has no vertex geometry.
pub fn cell_means(mesh: &Mesh, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
    match mesh.geometry() {
        Some(geo) => geo
            .cell_vertices
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|v| geo.vertices[v]);
                let mid = |p: Point, q: Point| [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
                (g(mid(a, b)) + g(mid(b, c)) + g(mid(c, a))) / 3.0
            })
            .collect(),
        None => mesh.cells().iter().map(|c| g(c.center)).collect(),
    }
}

/// Assemble [`TransportData`] from a diffusion field, boundary function and
/// precomputed advection.
pub fn discretize_coefficients(
    mesh: &Mesh,
    a: &Diffusion,
    f_dirichlet: &dyn Fn(Point) -> f64,
    advection: Vec<f64>,
) -> Result<TransportData, SchemeError> {
    TransportData::new(mesh, edge_diffusion(mesh, a)?, advection, dirichlet_means(mesh, f_dirichlet)?)
}

/// Potential sampled at cell centers and at the midpoints of Dirichlet
/// edges, the orthogonal projections of the adjacent centers.
pub fn sample_potential(mesh: &Mesh, phi: &dyn Fn(Point) -> f64) -> Result<(Vec<f64>, Vec<Option<f64>>), SchemeError> {
    let cells = mesh.cells().iter().map(|c| phi(c.center)).collect();
    let edges = (0..mesh.n_edges())
        .map(|e| {
            if mesh.edge(e).tag == EdgeTag::Dirichlet {
                mesh.edge_midpoint(e).map(|p| Some(phi(p))).ok_or(SchemeError::NeedsGeometry)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok((cells, edges))
}

/// Discrete advection `U_{K,σ} = (φ_{K,σ} - φ_K) / d_σ` seen from each
/// edge's reference cell; zero on Neumann edges.
pub fn advection_from_potential(
    mesh: &Mesh,
    phi_cells: &[f64],
    phi_dirichlet: &[Option<f64>],
) -> Result<Vec<f64>, SchemeError> {
    if phi_cells.len() != mesh.n_cells() {
        return Err(SchemeError::Length { what: "potential", expected: mesh.n_cells(), got: phi_cells.len() });
    }
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let k = edge.cells.0;
            let other = match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(l)) => phi_cells[l],
                (EdgeTag::Dirichlet, _) => phi_dirichlet
                    .get(e)
                    .copied()
                    .flatten()
                    .ok_or(SchemeError::MissingDirichletPotential { edge: e })?,
                _ => return Ok(0.0),
            };
            Ok((other - phi_cells[k]) / edge.dist)
        })
        .collect()
}
