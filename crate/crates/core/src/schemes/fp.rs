use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::{EdgeTag, Mesh};
use crate::par::Execution;

use super::{BScheme, SchemeError, TransportData};

/// Per-edge flux coefficients seen from the reference cell:
/// `F_{K,σ} = weight (minus f_K - plus f_{K,σ})`. From the other cell the
/// roles of `minus` and `plus` swap. All three vanish on Neumann edges.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCoefficients {
    pub weight: Vec<f64>,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl EdgeCoefficients {
    pub fn compute(mesh: &Mesh, data: &TransportData, scheme: &BScheme) -> Self {
        Self::compute_with(mesh, data, scheme, Execution::default())
    }

    pub fn compute_with(mesh: &Mesh, data: &TransportData, scheme: &BScheme, exec: Execution) -> Self {
        let triples = exec.map_range(mesh.n_edges(), |e| {
            let edge = mesh.edge(e);
            if edge.tag == EdgeTag::Neumann {
                return (0.0, 0.0, 0.0);
            }
            let x = data.peclet(mesh, e);
            (edge.transmissibility * data.diffusion[e], scheme.eval(-x), scheme.eval(x))
        });
        let mut c = EdgeCoefficients {
            weight: Vec::with_capacity(triples.len()),
            minus: Vec::with_capacity(triples.len()),
            plus: Vec::with_capacity(triples.len()),
        };
        for (w, m, p) in triples {
            c.weight.push(w);
            c.minus.push(m);
            c.plus.push(p);
        }
        c
    }

    /// `(B^-_{K,σ}, B^+_{K,σ})` seen from cell `k`.
    pub fn from_cell(&self, mesh: &Mesh, e: usize, k: usize) -> (f64, f64) {
        if mesh.edge(e).cells.0 == k {
            (self.minus[e], self.plus[e])
        } else {
            (self.plus[e], self.minus[e])
        }
    }
}

/// Péclet-type condition failure at one cell-edge incidence.
#[derive(Clone, Debug, PartialEq)]
pub struct PecletViolation {
    pub edge: usize,
    pub cell: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PecletPolicy {
    pub beta: f64,
    pub force: bool,
}

impl Default for PecletPolicy {
    fn default() -> Self {
        PecletPolicy { beta: 0.05, force: false }
    }
}

/// Check `B(|U_{K,σ}| d_σ / a_σ) ≥ β` on every non-Neumann incidence.
pub fn peclet_guard(mesh: &Mesh, data: &TransportData, scheme: &BScheme, beta: f64) -> Result<(), Vec<PecletViolation>> {
    let mut out = Vec::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.tag == EdgeTag::Neumann {
            continue;
        }
        let value = scheme.eval(data.peclet(mesh, e).abs());
        if !(value >= beta) {
            out.push(PecletViolation { edge: e, cell: edge.cells.0, value });
            if let Some(l) = edge.cells.1 {
                out.push(PecletViolation { edge: e, cell: l, value });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Steady operator `M` and boundary vector `b^D` with
/// `(M f - b^D)_K = Σ_σ F_{K,σ}(f)`.
pub fn assemble_fp_operator(
    mesh: &Mesh,
    data: &TransportData,
    scheme: &BScheme,
    policy: PecletPolicy,
) -> Result<(SparseMatrix, Vec<f64>), SchemeError> {
    data.check(mesh)?;
    if !policy.force {
        if let Err(v) = peclet_guard(mesh, data, scheme, policy.beta) {
            let worst = v.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
            return Err(SchemeError::Peclet {
                count: v.len(),
                edge: worst.edge,
                value: worst.value,
                beta: policy.beta,
            });
        }
    }
    let c = EdgeCoefficients::compute(mesh, data, scheme);
    Ok(assemble_from_coefficients(mesh, data, &c))
}

pub fn assemble_from_coefficients(mesh: &Mesh, data: &TransportData, c: &EdgeCoefficients) -> (SparseMatrix, Vec<f64>) {
    let n = mesh.n_cells();
    let mut t = TripletBuilder::with_capacity(n, 4 * mesh.n_edges());
    let mut b = vec![0.0; n];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let (w, bm, bp) = (c.weight[e], c.minus[e], c.plus[e]);
        let k = edge.cells.0;
        match (edge.tag, edge.cells.1) {
            (EdgeTag::Interior, Some(l)) => {
                t.add(k, k, w * bm);
                t.add(k, l, -w * bp);
                t.add(l, l, w * bp);
                t.add(l, k, -w * bm);
            }
            (EdgeTag::Dirichlet, _) => {
                t.add(k, k, w * bm);
                b[k] += w * bp * data.dirichlet[e];
            }
            _ => {}
        }
    }
    (t.build(), b)
}

/// Value `f_{K,σ}` across edge `e` from cell `k`: the neighbor, the boundary
/// value or `f_K` itself on Neumann edges.
pub fn neighbor_value(mesh: &Mesh, e: usize, k: usize, f: &[f64], dirichlet: &[f64]) -> f64 {
    let edge = mesh.edge(e);
    match edge.tag {
        EdgeTag::Interior => f[edge.neighbor(k).expect("interior edge has two cells")],
        EdgeTag::Dirichlet => dirichlet[e],
        EdgeTag::Neumann => f[k],
    }
}

/// `F_{K,σ} = τ_σ a_σ (B^-_{K,σ} f_K - B^+_{K,σ} f_{K,σ})`, zero on Neumann edges.
pub fn flux_fp(mesh: &Mesh, data: &TransportData, scheme: &BScheme, f: &[f64], k: usize, e: usize) -> f64 {
    let edge = mesh.edge(e);
    if edge.tag == EdgeTag::Neumann {
        return 0.0;
    }
    let x = edge.orientation(k) * data.peclet(mesh, e);
    let w = edge.transmissibility * data.diffusion[e];
    w * (scheme.eval(-x) * f[k] - scheme.eval(x) * neighbor_value(mesh, e, k, f, &data.dirichlet))
}

/// Edge value of the steady state, `min(B^- f∞_K, B^+ f∞_{K,σ})`; the same
/// from either side, zero on Neumann edges.
pub fn edge_steady_weight(mesh: &Mesh, data: &TransportData, scheme: &BScheme, f_inf: &[f64], e: usize) -> f64 {
    let edge = mesh.edge(e);
    if edge.tag == EdgeTag::Neumann {
        return 0.0;
    }
    let k = edge.cells.0;
    let x = data.peclet(mesh, e);
    let other = neighbor_value(mesh, e, k, f_inf, &data.dirichlet);
    (scheme.eval(-x) * f_inf[k]).min(scheme.eval(x) * other)
}

pub fn edge_steady_weights(mesh: &Mesh, data: &TransportData, c: &EdgeCoefficients, f_inf: &[f64]) -> Vec<f64> {
    (0..mesh.n_edges())
        .map(|e| {
            let edge = mesh.edge(e);
            if edge.tag == EdgeTag::Neumann {
                return 0.0;
            }
            let k = edge.cells.0;
            let other = neighbor_value(mesh, e, k, f_inf, &data.dirichlet);
            (c.minus[e] * f_inf[k]).min(c.plus[e] * other)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::two_cell_strip;

    fn strip_data(mesh: &Mesh, u: f64) -> TransportData {
        let mut fd = vec![0.0; mesh.n_edges()];
        fd[0] = 1.0;
        fd[1] = 2.0;
        let adv = mesh
            .edges()
            .iter()
            .map(|e| if e.tag == EdgeTag::Neumann { 0.0 } else { u })
            .collect();
        TransportData::new(mesh, vec![1.0; mesh.n_edges()], adv, fd).unwrap()
    }

    #[test]
    fn two_cell_operator() {
        let mesh = two_cell_strip();
        let data = strip_data(&mesh, 0.0);
        let (m, b) = assemble_fp_operator(&mesh, &data, &BScheme::Upwind, PecletPolicy::default()).unwrap();
        assert_eq!(m.to_dense(), vec![vec![6.0, -2.0], vec![-2.0, 6.0]]);
        assert_eq!(b, vec![4.0, 8.0]);
    }

    #[test]
    fn operator_matches_flux_sums() {
        let mesh = two_cell_strip();
        let data = strip_data(&mesh, 0.7);
        for s in BScheme::builtin() {
            let (m, b) = assemble_fp_operator(&mesh, &data, &s, PecletPolicy::default()).unwrap();
            let f = [0.3, 1.7];
            let mf = m.matvec(&f);
            for k in 0..2 {
                let sum: f64 = mesh.cell(k).edges.iter().map(|&e| flux_fp(&mesh, &data, &s, &f, k, e)).sum();
                assert!((mf[k] - b[k] - sum).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn upwind_flux_value() {
        // τ = 2, a = 1, U d / a = 1 on the interior edge
        let mesh = two_cell_strip();
        let mut data = strip_data(&mesh, 0.0);
        data.advection[2] = 1.0 / mesh.edge(2).dist;
        let f = [2.0, 1.0];
        assert!((flux_fp(&mesh, &data, &BScheme::Upwind, &f, 0, 2) - 6.0).abs() < 1e-14);
        assert_eq!(flux_fp(&mesh, &data, &BScheme::Upwind, &f, 0, 3), 0.0);
    }

    #[test]
    fn peclet_guard_thresholds() {
        let mesh = two_cell_strip();
        let d = mesh.edge(2).dist;
        let mut data = strip_data(&mesh, 0.0);
        data.advection[2] = 1.9 / d;
        assert!(peclet_guard(&mesh, &data, &BScheme::Centered, 0.05 - 1e-12).is_ok());
        assert!(peclet_guard(&mesh, &data, &BScheme::Upwind, 1.0).is_ok());
        data.advection[2] = 2.1 / d;
        let v = peclet_guard(&mesh, &data, &BScheme::Centered, 0.05).unwrap_err();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| x.edge == 2));
        let err = assemble_fp_operator(&mesh, &data, &BScheme::Centered, PecletPolicy::default());
        assert!(matches!(err, Err(SchemeError::Peclet { .. })));
        let forced = PecletPolicy { force: true, ..PecletPolicy::default() };
        assert!(assemble_fp_operator(&mesh, &data, &BScheme::Centered, forced).is_ok());
    }

    #[test]
    fn steady_weight_of_constant() {
        let mesh = two_cell_strip();
        let mut data = strip_data(&mesh, 0.0);
        data.dirichlet[0] = 1.5;
        data.dirichlet[1] = 1.5;
        for e in 0..mesh.n_edges() {
            let w = edge_steady_weight(&mesh, &data, &BScheme::ScharfetterGummel, &[1.5, 1.5], e);
            let expect = if mesh.edge(e).tag == EdgeTag::Neumann { 0.0 } else { 1.5 };
            assert_eq!(w, expect);
        }
    }

    #[test]
    fn sequential_and_parallel_coefficients_agree() {
        let mesh = crate::mesh::reference_mesh(2, crate::mesh::BoundarySpec::all_dirichlet()).unwrap();
        let adv: Vec<f64> = (0..mesh.n_edges()).map(|e| ((e as f64) * 0.61).sin() * 3.0).collect();
        let data = TransportData::new(&mesh, vec![0.7; mesh.n_edges()], adv, vec![1.0; mesh.n_edges()]).unwrap();
        for s in BScheme::builtin() {
            let a = EdgeCoefficients::compute_with(&mesh, &data, &s, Execution::Sequential);
            let b = EdgeCoefficients::compute_with(&mesh, &data, &s, Execution::Parallel);
            assert_eq!(a, b);
        }
    }
}
