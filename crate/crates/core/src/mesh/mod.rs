//! Admissible orthogonal meshes seen as a two-point flux graph.
//!
//! A [`Mesh`] stores exactly what the TPFA schemes consume: cell measures and
//! centers, edge measures, center distances, per-incidence distances,
//! transmissibilities and boundary tags. Meshes built from triangles also keep
//! their vertex [`Geometry`], which refinement and boundary-data sampling need.

mod boundary;
pub mod io;
mod reference;
mod validate;

use std::collections::HashMap;

use thiserror::Error;

pub use boundary::{BoundarySpec, Segment};
pub use reference::{reference_mesh, refine, COARSE_CELL_COUNT, MAX_LEVEL};
pub use validate::{validate, AdmissibilityReport, Hypothesis, Violation};

pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge {edge} references missing cell {cell}")]
    MissingCell { edge: usize, cell: usize },
    #[error("inconsistent incidence: {0}")]
    Incidence(String),
    #[error("refinement level {level} exceeds the limit of {max}")]
    LevelTooLarge { level: usize, max: usize },
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("boundary edge with midpoint ({x}, {y}) is {problem}")]
    Boundary { x: f64, y: f64, problem: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interior,
    Dirichlet,
    Neumann,
}

impl EdgeTag {
    pub fn code(self) -> char {
        match self {
            EdgeTag::Interior => 'I',
            EdgeTag::Dirichlet => 'D',
            EdgeTag::Neumann => 'N',
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "I" => Some(EdgeTag::Interior),
            "D" => Some(EdgeTag::Dirichlet),
            "N" => Some(EdgeTag::Neumann),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub measure: f64,
    pub center: Point,
    /// Incident edge ids, ascending.
    pub edges: Vec<usize>,
}

/// An edge of the flux graph.
///
/// `cells.0` is the reference side: per-edge quantities with an orientation
/// (advection, difference quotients) are stored as seen from that cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub measure: f64,
    /// Center-to-center distance, or center-to-edge distance on the boundary.
    pub dist: f64,
    pub transmissibility: f64,
    pub tag: EdgeTag,
    pub cells: (usize, Option<usize>),
    /// Distance from each incident cell center to the edge.
    pub cell_dist: (f64, Option<f64>),
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.tag == EdgeTag::Interior
    }

    /// The cell across the edge from `k`, if any.
    pub fn neighbor(&self, k: usize) -> Option<usize> {
        match self.cells {
            (a, Some(b)) if a == k => Some(b),
            (a, Some(b)) if b == k => Some(a),
            _ => None,
        }
    }

    /// +1 when `k` is the reference cell, -1 otherwise.
    pub fn orientation(&self, k: usize) -> f64 {
        if self.cells.0 == k {
            1.0
        } else {
            -1.0
        }
    }

    pub fn dist_from(&self, k: usize) -> f64 {
        if self.cells.0 == k {
            self.cell_dist.0
        } else {
            self.cell_dist.1.unwrap_or(f64::NAN)
        }
    }
}

/// Vertex geometry of a triangulated mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub vertices: Vec<Point>,
    pub cell_vertices: Vec<[usize; 3]>,
    pub edge_vertices: Vec<[usize; 2]>,
    pub boundary: BoundarySpec,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    xi: f64,
    domain_measure: f64,
    geometry: Option<Geometry>,
}

impl Mesh {
    /// Assemble a mesh from raw parts without any admissibility check.
    pub fn from_parts(
        cells: Vec<Cell>,
        edges: Vec<Edge>,
        xi: f64,
        domain_measure: f64,
        geometry: Option<Geometry>,
    ) -> Self {
        Mesh { cells, edges, xi, domain_measure, geometry }
    }

    pub fn into_parts(self) -> (Vec<Cell>, Vec<Edge>, f64, f64, Option<Geometry>) {
        (self.cells, self.edges, self.xi, self.domain_measure, self.geometry)
    }

    /// Build the TPFA graph of a triangulation, with circumcenters as cell
    /// centers. Exterior edges are tagged by `boundary`.
    pub fn from_triangles(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: BoundarySpec,
    ) -> Result<Self, MeshError> {
        let spec = boundary.clone();
        Mesh::triangulate(vertices, triangles, boundary, |_, mid| spec.classify(mid))
    }

    /// Like [`Mesh::from_triangles`], but exterior edges are tagged by
    /// `classify(edge id, midpoint)`.
    pub(crate) fn triangulate<F>(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: BoundarySpec,
        mut classify: F,
    ) -> Result<Self, MeshError>
    where
        F: FnMut(usize, Point) -> Result<EdgeTag, MeshError>,
    {
        if let Some(v) = triangles.iter().flatten().find(|v| **v >= vertices.len()) {
            return Err(MeshError::Incidence(format!("triangle references missing vertex {v}")));
        }
        let mut cell_vertices = Vec::with_capacity(triangles.len());
        let mut cells = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
            if area == 0.0 {
                return Err(MeshError::UnsupportedGeometry("degenerate triangle".into()));
            }
            let tri = if area > 0.0 { *tri } else { [tri[0], tri[2], tri[1]] };
            cell_vertices.push(tri);
            cells.push(Cell { measure: area.abs(), center: circumcenter(a, b, c), edges: Vec::with_capacity(3) });
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
        let mut edge_cells: Vec<Vec<usize>> = Vec::new();
        for (k, tri) in cell_vertices.iter().enumerate() {
            for i in 0..3 {
                let (p, q) = (tri[i], tri[(i + 1) % 3]);
                let key = (p.min(q), p.max(q));
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edge_vertices.push([p, q]);
                    edge_cells.push(Vec::with_capacity(2));
                    edge_vertices.len() - 1
                });
                edge_cells[id].push(k);
                cells[k].edges.push(id);
            }
        }
        for cell in &mut cells {
            cell.edges.sort_unstable();
        }

        let mut edges = Vec::with_capacity(edge_vertices.len());
        for (id, (ev, ec)) in edge_vertices.iter().zip(&edge_cells).enumerate() {
            let (p, q) = (vertices[ev[0]], vertices[ev[1]]);
            let measure = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            let side_dist = |k: usize| {
                let opposite = cell_vertices[k].iter().copied().find(|v| !ev.contains(v)).unwrap();
                signed_distance(p, q, cells[k].center, vertices[opposite])
            };
            let edge = match ec.as_slice() {
                [k] => {
                    let d = side_dist(*k);
                    let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
                    let tag = classify(id, mid)?;
                    Edge {
                        measure,
                        dist: d,
                        transmissibility: measure / d,
                        tag,
                        cells: (*k, None),
                        cell_dist: (d, None),
                    }
                }
                [k, l] => {
                    let (ck, cl) = (cells[*k].center, cells[*l].center);
                    let d = ((cl[0] - ck[0]).powi(2) + (cl[1] - ck[1]).powi(2)).sqrt();
                    Edge {
                        measure,
                        dist: d,
                        transmissibility: measure / d,
                        tag: EdgeTag::Interior,
                        cells: (*k, Some(*l)),
                        cell_dist: (side_dist(*k), Some(side_dist(*l))),
                    }
                }
                other => {
                    return Err(MeshError::Incidence(format!(
                        "edge {id} is shared by {} triangles",
                        other.len()
                    )))
                }
            };
            edges.push(edge);
        }

        let xi = regularity_constant(&edges);
        let domain_measure = cells.iter().map(|c| c.measure).sum();
        Ok(Mesh {
            cells,
            edges,
            xi,
            domain_measure,
            geometry: Some(Geometry { vertices, cell_vertices, edge_vertices, boundary }),
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cell(&self, k: usize) -> &Cell {
        &self.cells[k]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain_measure
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.edges.iter().any(|e| e.tag == EdgeTag::Dirichlet && e.measure > 0.0)
    }

    /// Midpoint of edge `e`. For circumcentric cells this is also the
    /// orthogonal projection of the cell center onto the edge.
    pub fn edge_midpoint(&self, e: usize) -> Option<Point> {
        let g = self.geometry.as_ref()?;
        let [p, q] = g.edge_vertices[e].map(|v| g.vertices[v]);
        Some([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0])
    }

    pub fn edge_endpoints(&self, e: usize) -> Option<[Point; 2]> {
        let g = self.geometry.as_ref()?;
        Some(g.edge_vertices[e].map(|v| g.vertices[v]))
    }

    /// Barycenter of cell `k`, falling back to its center without geometry.
    pub fn centroid(&self, k: usize) -> Point {
        match &self.geometry {
            Some(g) => {
                let [a, b, c] = g.cell_vertices[k].map(|v| g.vertices[v]);
                [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
            }
            None => self.cells[k].center,
        }
    }

    /// Largest cell diameter.
    pub fn mesh_size(&self) -> Option<f64> {
        let g = self.geometry.as_ref()?;
        let diam = |tri: &[usize; 3]| {
            let mut d: f64 = 0.0;
            for i in 0..3 {
                let (p, q) = (g.vertices[tri[i]], g.vertices[tri[(i + 1) % 3]]);
                d = d.max(((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt());
            }
            d
        };
        Some(g.cell_vertices.iter().map(diam).fold(0.0, f64::max))
    }

    /// Field-by-field comparison of the flux graph, ignoring vertex geometry.
    pub fn same_graph(&self, other: &Mesh, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        let close_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => close(a, b),
            (None, None) => true,
            _ => false,
        };
        self.cells.len() == other.cells.len()
            && self.edges.len() == other.edges.len()
            && close(self.xi, other.xi)
            && close(self.domain_measure, other.domain_measure)
            && self.cells.iter().zip(&other.cells).all(|(a, b)| {
                close(a.measure, b.measure)
                    && close(a.center[0], b.center[0])
                    && close(a.center[1], b.center[1])
                    && a.edges == b.edges
            })
            && self.edges.iter().zip(&other.edges).all(|(a, b)| {
                close(a.measure, b.measure)
                    && close(a.dist, b.dist)
                    && close(a.transmissibility, b.transmissibility)
                    && a.tag == b.tag
                    && a.cells == b.cells
                    && close(a.cell_dist.0, b.cell_dist.0)
                    && close_opt(a.cell_dist.1, b.cell_dist.1)
            })
    }
}

/// The unit square cut at x₁ = 1/2 into two rectangles: Dirichlet on the
/// left (edge 0) and right (edge 1), interior edge 2, Neumann edges 3..=6
/// on top and bottom. Small enough to assemble by hand.
pub fn two_cell_strip() -> Mesh {
    let cell = |x: f64, edges: Vec<usize>| Cell { measure: 0.5, center: [x, 0.5], edges };
    let boundary = |tag, k, measure: f64, d: f64| Edge {
        measure,
        dist: d,
        transmissibility: measure / d,
        tag,
        cells: (k, None),
        cell_dist: (d, None),
    };
    let edges = vec![
        boundary(EdgeTag::Dirichlet, 0, 1.0, 0.25),
        boundary(EdgeTag::Dirichlet, 1, 1.0, 0.25),
        Edge {
            measure: 1.0,
            dist: 0.5,
            transmissibility: 2.0,
            tag: EdgeTag::Interior,
            cells: (0, Some(1)),
            cell_dist: (0.25, Some(0.25)),
        },
        boundary(EdgeTag::Neumann, 0, 0.5, 0.5),
        boundary(EdgeTag::Neumann, 0, 0.5, 0.5),
        boundary(EdgeTag::Neumann, 1, 0.5, 0.5),
        boundary(EdgeTag::Neumann, 1, 0.5, 0.5),
    ];
    let xi = regularity_constant(&edges);
    Mesh::from_parts(vec![cell(0.25, vec![0, 2, 3, 4]), cell(0.75, vec![1, 2, 5, 6])], edges, xi, 1.0, None)
}

/// Smallest ratio d_{K,σ} / d_σ over all incidences.
pub(crate) fn regularity_constant(edges: &[Edge]) -> f64 {
    edges
        .iter()
        .flat_map(|e| [Some(e.cell_dist.0), e.cell_dist.1].into_iter().flatten().map(move |d| d / e.dist))
        .fold(f64::INFINITY, f64::min)
}

fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let (a2, b2, c2) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1], c[0] * c[0] + c[1] * c[1]);
    [
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ]
}

/// Distance from `x` to the line through `p`, `q`, positive on the side of `inside`.
fn signed_distance(p: Point, q: Point, x: Point, inside: Point) -> f64 {
    let n = [q[1] - p[1], p[0] - q[0]];
    let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
    let side = ((inside[0] - p[0]) * n[0] + (inside[1] - p[1]) * n[1]).signum();
    side * ((x[0] - p[0]) * n[0] + (x[1] - p[1]) * n[1]) / len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circumcenter_of_right_triangle_is_hypotenuse_midpoint() {
        let c = circumcenter([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_triangles_share_one_interior_edge() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mesh = Mesh::from_triangles(verts, vec![[0, 1, 3], [1, 2, 3]], BoundarySpec::all_dirichlet()).unwrap();
        assert_eq!(mesh.n_cells(), 2);
        assert_eq!(mesh.n_edges(), 5);
        let interior: Vec<_> = mesh.edges().iter().filter(|e| e.is_interior()).collect();
        assert_eq!(interior.len(), 1);
        // both circumcenters sit on the shared hypotenuse
        assert!(interior[0].dist.abs() < 1e-15);
    }

    #[test]
    fn orientation_and_neighbor() {
        let e = Edge {
            measure: 1.0,
            dist: 0.5,
            transmissibility: 2.0,
            tag: EdgeTag::Interior,
            cells: (3, Some(7)),
            cell_dist: (0.2, Some(0.3)),
        };
        assert_eq!(e.neighbor(3), Some(7));
        assert_eq!(e.neighbor(7), Some(3));
        assert_eq!(e.orientation(3), 1.0);
        assert_eq!(e.orientation(7), -1.0);
        assert_eq!(e.dist_from(7), 0.3);
    }
}
