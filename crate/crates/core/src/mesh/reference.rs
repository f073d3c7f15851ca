//! The unit-square mesh family used throughout the experiments.
//!
//! The coarsest mesh (Δx = 1/4) is a 2×2 grid of a 14-triangle tile; each
//! refinement contracts the mesh by 1/2 and lays four copies side by side.

use std::collections::HashMap;

use super::{BoundarySpec, Mesh, MeshError, Point};

pub const MAX_LEVEL: usize = 8;
pub const COARSE_CELL_COUNT: usize = 56;

const TILE_VERTICES: [Point; 12] = [
    [0.0, 0.0],
    [0.5, 0.0],
    [1.0, 0.0],
    [1.0, 0.5],
    [1.0, 1.0],
    [0.5, 1.0],
    [0.0, 1.0],
    [0.0, 0.5],
    [0.3, 0.3],
    [0.65, 0.35],
    [0.7, 0.7],
    [0.35, 0.65],
];

const TILE_TRIANGLES: [[usize; 3]; 14] = [
    [0, 1, 8],
    [0, 8, 7],
    [1, 9, 8],
    [1, 2, 9],
    [2, 3, 9],
    [3, 10, 9],
    [3, 4, 10],
    [4, 5, 10],
    [5, 11, 10],
    [5, 6, 11],
    [6, 7, 11],
    [7, 8, 11],
    [8, 9, 11],
    [9, 10, 11],
];

/// Member `level` of the reference family: `56 · 4^level` triangles.
pub fn reference_mesh(level: usize, boundary: BoundarySpec) -> Result<Mesh, MeshError> {
    if level > MAX_LEVEL {
        return Err(MeshError::LevelTooLarge { level, max: MAX_LEVEL });
    }
    // The tile is coarser than level 0, so the requested boundary is only
    // applied once the tile has been laid out.
    let tile = Mesh::from_triangles(TILE_VERTICES.to_vec(), TILE_TRIANGLES.to_vec(), BoundarySpec::all_dirichlet())?;
    let mut mesh = refine_with(&tile, boundary)?;
    for _ in 0..level {
        mesh = refine(&mesh)?;
    }
    Ok(mesh)
}

/// Contract a unit-square mesh by 1/2 and tile the square with 2×2 copies.
pub fn refine(mesh: &Mesh) -> Result<Mesh, MeshError> {
    let g = mesh
        .geometry()
        .ok_or_else(|| MeshError::UnsupportedGeometry("mesh carries no vertex geometry".into()))?;
    refine_with(mesh, g.boundary.clone())
}

fn refine_with(mesh: &Mesh, boundary: BoundarySpec) -> Result<Mesh, MeshError> {
    let g = mesh
        .geometry()
        .ok_or_else(|| MeshError::UnsupportedGeometry("mesh carries no vertex geometry".into()))?;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &g.vertices {
        for i in 0..2 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let unit = lo.iter().all(|x| x.abs() < 1e-12)
        && hi.iter().all(|x| (x - 1.0).abs() < 1e-12)
        && (mesh.domain_measure() - 1.0).abs() < 1e-12;
    if !unit {
        return Err(MeshError::UnsupportedGeometry("refinement needs the unit square".into()));
    }

    let mut vertices: Vec<Point> = Vec::with_capacity(4 * g.vertices.len());
    let mut lookup: HashMap<(i64, i64), usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(4 * g.cell_vertices.len());
    for qy in 0..2 {
        for qx in 0..2 {
            let local: Vec<usize> = g
                .vertices
                .iter()
                .map(|v| {
                    let p = [0.5 * (v[0] + qx as f64), 0.5 * (v[1] + qy as f64)];
                    let key = ((p[0] * 1e11).round() as i64, (p[1] * 1e11).round() as i64);
                    *lookup.entry(key).or_insert_with(|| {
                        vertices.push(p);
                        vertices.len() - 1
                    })
                })
                .collect();
            triangles.extend(g.cell_vertices.iter().map(|t| t.map(|v| local[v])));
        }
    }
    Mesh::from_triangles(vertices, triangles, boundary)
}
