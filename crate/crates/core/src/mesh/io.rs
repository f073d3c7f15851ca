//! Line-oriented text format for the TPFA graph.
//!
//! ```text
//! tpfa 1
//! cells N
//! <id> <measure> <x> <y>
//! edges M
//! <id> <measure> <d> <tag> <cellA> [<cellB>] <dA> [<dB>]
//! xi <value>
//! [vertices V
//!  <id> <x> <y>
//!  triangles N
//!  <id> <a> <b> <c>]
//! ```
//!
//! `tag` is one of `I`, `D`, `N`; interior edges carry two cells and two
//! distances. `#` starts a comment. The trailing vertex block is optional;
//! when present the triangulation is rebuilt and must reproduce the graph,
//! and the loaded mesh can be refined. Its boundary is then described by one
//! segment per exterior edge, carrying the stored tag.

use std::fmt::Write;

use super::{BoundarySpec, Cell, Edge, EdgeTag, Mesh, MeshError, Point, Segment};

/// Relative tolerance when checking a rebuilt triangulation against the graph.
const REBUILD_TOL: f64 = 1e-12;

pub fn save_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("tpfa 1\n");
    let _ = writeln!(out, "cells {}", mesh.n_cells());
    for (id, c) in mesh.cells().iter().enumerate() {
        let _ = writeln!(out, "{id} {:e} {:e} {:e}", c.measure, c.center[0], c.center[1]);
    }
    let _ = writeln!(out, "edges {}", mesh.n_edges());
    for (id, e) in mesh.edges().iter().enumerate() {
        let _ = write!(out, "{id} {:e} {:e} {}", e.measure, e.dist, e.tag.code());
        match (e.cells.1, e.cell_dist.1) {
            (Some(l), Some(dl)) => {
                let _ = writeln!(out, " {} {} {:e} {:e}", e.cells.0, l, e.cell_dist.0, dl);
            }
            _ => {
                let _ = writeln!(out, " {} {:e}", e.cells.0, e.cell_dist.0);
            }
        }
    }
    let _ = writeln!(out, "xi {:e}", mesh.xi());
    if let Some(g) = mesh.geometry() {
        let _ = writeln!(out, "vertices {}", g.vertices.len());
        for (id, v) in g.vertices.iter().enumerate() {
            let _ = writeln!(out, "{id} {:e} {:e}", v[0], v[1]);
        }
        let _ = writeln!(out, "triangles {}", g.cell_vertices.len());
        for (id, t) in g.cell_vertices.iter().enumerate() {
            let _ = writeln!(out, "{id} {} {} {}", t[0], t[1], t[2]);
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with comments stripped, with its 1-based number.
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshError> {
        let last = self.last;
        self.next().ok_or_else(|| MeshError::Parse { line: last + 1, msg: format!("unexpected end of input, expected {what}") })
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse { line, msg: format!("invalid {what} '{tok}'") })
}

fn keyword(line: usize, tokens: &[&str], key: &str) -> Result<usize, MeshError> {
    match tokens {
        [k, n] if *k == key => num(line, n, "count"),
        _ => Err(MeshError::Parse { line, msg: format!("expected '{key} <count>'") }),
    }
}

pub fn load_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };

    let (line, header) = lines.expect("header 'tpfa 1'")?;
    if header != ["tpfa", "1"] {
        return Err(MeshError::Parse { line, msg: "expected header 'tpfa 1'".into() });
    }

    let (line, tokens) = lines.expect("cell count")?;
    let n_cells = keyword(line, &tokens, "cells")?;
    let mut cells = Vec::with_capacity(n_cells);
    for expected in 0..n_cells {
        let (line, t) = lines.expect("cell record")?;
        if t.len() != 4 {
            return Err(MeshError::Parse { line, msg: "cell record needs 'id m x y'".into() });
        }
        let id: usize = num(line, t[0], "cell id")?;
        if id != expected {
            return Err(MeshError::Parse { line, msg: format!("cell id {id} out of order, expected {expected}") });
        }
        cells.push(Cell {
            measure: num(line, t[1], "measure")?,
            center: [num(line, t[2], "coordinate")?, num(line, t[3], "coordinate")?],
            edges: Vec::new(),
        });
    }

    let (line, tokens) = lines.expect("edge count")?;
    let n_edges = keyword(line, &tokens, "edges")?;
    let mut edges = Vec::with_capacity(n_edges);
    for expected in 0..n_edges {
        let (line, t) = lines.expect("edge record")?;
        if t.len() < 6 {
            return Err(MeshError::Parse { line, msg: "edge record too short".into() });
        }
        let id: usize = num(line, t[0], "edge id")?;
        if id != expected {
            return Err(MeshError::Parse { line, msg: format!("edge id {id} out of order, expected {expected}") });
        }
        let measure: f64 = num(line, t[1], "measure")?;
        let dist: f64 = num(line, t[2], "distance")?;
        let tag = EdgeTag::from_code(t[3]).ok_or_else(|| MeshError::Parse { line, msg: format!("unknown tag '{}'", t[3]) })?;
        let (cells_of, cell_dist) = match (tag, t.len()) {
            (EdgeTag::Interior, 8) => (
                (num(line, t[4], "cell id")?, Some(num(line, t[5], "cell id")?)),
                (num(line, t[6], "distance")?, Some(num(line, t[7], "distance")?)),
            ),
            (EdgeTag::Dirichlet | EdgeTag::Neumann, 6) => {
                ((num(line, t[4], "cell id")?, None), (num(line, t[5], "distance")?, None))
            }
            _ => {
                return Err(MeshError::Incidence(format!(
                    "edge {id}: tag {} does not match {} fields",
                    tag.code(),
                    t.len()
                )))
            }
        };
        for cell in [Some(cells_of.0), cells_of.1].into_iter().flatten() {
            if cell >= n_cells {
                return Err(MeshError::MissingCell { edge: id, cell });
            }
        }
        edges.push(Edge { measure, dist, transmissibility: measure / dist, tag, cells: cells_of, cell_dist });
    }

    let (line, t) = lines.expect("'xi <value>'")?;
    let xi = match t.as_slice() {
        ["xi", v] => num(line, v, "xi")?,
        _ => return Err(MeshError::Parse { line, msg: "expected 'xi <value>'".into() }),
    };
    let geometry = match lines.next() {
        None => None,
        Some((line, t)) => Some(read_geometry(&mut lines, line, &t, n_cells)?),
    };

    for (id, e) in edges.iter().enumerate() {
        cells[e.cells.0].edges.push(id);
        if let Some(l) = e.cells.1 {
            if l == e.cells.0 {
                return Err(MeshError::Incidence(format!("edge {id} joins cell {l} to itself")));
            }
            cells[l].edges.push(id);
        }
    }
    let domain_measure = cells.iter().map(|c| c.measure).sum();
    let graph = Mesh::from_parts(cells, edges, xi, domain_measure, None);
    match geometry {
        None => Ok(graph),
        Some((vertices, triangles)) => rebuild(&graph, vertices, triangles),
    }
}

type RawGeometry = (Vec<Point>, Vec<[usize; 3]>);

fn read_geometry(lines: &mut Lines<'_>, line: usize, tokens: &[&str], n_cells: usize) -> Result<RawGeometry, MeshError> {
    let n_vertices = keyword(line, tokens, "vertices")
        .map_err(|_| MeshError::Parse { line, msg: "expected end of input or 'vertices <count>'".into() })?;
    let mut vertices = Vec::with_capacity(n_vertices);
    for expected in 0..n_vertices {
        let (line, t) = lines.expect("vertex record")?;
        if t.len() != 3 || num::<usize>(line, t[0], "vertex id")? != expected {
            return Err(MeshError::Parse { line, msg: format!("expected vertex record '{expected} x y'") });
        }
        vertices.push([num(line, t[1], "coordinate")?, num(line, t[2], "coordinate")?]);
    }
    let (line, t) = lines.expect("triangle count")?;
    let n_triangles = keyword(line, &t, "triangles")?;
    if n_triangles != n_cells {
        return Err(MeshError::Parse { line, msg: format!("{n_triangles} triangles for {n_cells} cells") });
    }
    let mut triangles = Vec::with_capacity(n_triangles);
    for expected in 0..n_triangles {
        let (line, t) = lines.expect("triangle record")?;
        if t.len() != 4 || num::<usize>(line, t[0], "triangle id")? != expected {
            return Err(MeshError::Parse { line, msg: format!("expected triangle record '{expected} a b c'") });
        }
        let mut tri = [0usize; 3];
        for (slot, tok) in tri.iter_mut().zip(&t[1..]) {
            *slot = num(line, tok, "vertex id")?;
            if *slot >= n_vertices {
                return Err(MeshError::Parse { line, msg: format!("vertex {} out of range", *slot) });
            }
        }
        triangles.push(tri);
    }
    if let Some((line, _)) = lines.next() {
        return Err(MeshError::Parse { line, msg: "trailing content after triangles".into() });
    }
    Ok((vertices, triangles))
}

/// Rebuild the triangulation, tag exterior edges as stored and check that the
/// result is the graph that was read.
fn rebuild(graph: &Mesh, vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
    let tags: Vec<EdgeTag> = graph.edges().iter().map(|e| e.tag).collect();
    let mut mesh = Mesh::triangulate(vertices, triangles, BoundarySpec::default(), |id, _| {
        match tags.get(id) {
            Some(EdgeTag::Interior) | None => Err(MeshError::Incidence(format!("edge {id} is exterior in the triangulation"))),
            Some(tag) => Ok(*tag),
        }
    })?;
    if !mesh.same_graph(graph, REBUILD_TOL) {
        return Err(MeshError::Incidence("vertex block does not reproduce the stored graph".into()));
    }
    if let Some(g) = mesh.geometry.as_mut() {
        let mut spec = BoundarySpec::default();
        for (e, ev) in g.edge_vertices.iter().enumerate() {
            let seg = Segment::new(g.vertices[ev[0]], g.vertices[ev[1]]);
            match tags[e] {
                EdgeTag::Dirichlet => spec.dirichlet.push(seg),
                EdgeTag::Neumann => spec.neumann.push(seg),
                EdgeTag::Interior => {}
            }
        }
        g.boundary = spec;
    }
    Ok(mesh)
}
