use crate::linalg::{NonlinearSystem, SparseMatrix, TripletBuilder};
use crate::mesh::{EdgeTag, Mesh};

use super::{BScheme, SchemeError};

/// Drift-diffusion data with unit mobilities.
///
/// Boundary triples are stored per edge and read on Dirichlet edges only.
#[derive(Clone, Debug, PartialEq)]
pub struct DdData {
    pub doping: Vec<f64>,
    pub lambda: f64,
    pub n_dirichlet: Vec<f64>,
    pub p_dirichlet: Vec<f64>,
    pub v_dirichlet: Vec<f64>,
}

impl DdData {
    pub fn new(
        mesh: &Mesh,
        doping: Vec<f64>,
        lambda: f64,
        n_dirichlet: Vec<f64>,
        p_dirichlet: Vec<f64>,
        v_dirichlet: Vec<f64>,
    ) -> Result<Self, SchemeError> {
        let d = DdData { doping, lambda, n_dirichlet, p_dirichlet, v_dirichlet };
        d.check(mesh)?;
        Ok(d)
    }

    pub fn check(&self, mesh: &Mesh) -> Result<(), SchemeError> {
        if self.doping.len() != mesh.n_cells() {
            return Err(SchemeError::Length { what: "doping", expected: mesh.n_cells(), got: self.doping.len() });
        }
        for (what, v) in [("N boundary", &self.n_dirichlet), ("P boundary", &self.p_dirichlet), ("V boundary", &self.v_dirichlet)] {
            if v.len() != mesh.n_edges() {
                return Err(SchemeError::Length { what, expected: mesh.n_edges(), got: v.len() });
            }
        }
        if !(self.lambda > 0.0) {
            return Err(SchemeError::Data(format!("Debye length must be positive, got {}", self.lambda)));
        }
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.tag != EdgeTag::Dirichlet {
                continue;
            }
            for v in [self.n_dirichlet[e], self.p_dirichlet[e]] {
                if !(v > 0.0) {
                    return Err(SchemeError::DirichletValue { edge: e, value: v });
                }
            }
        }
        Ok(())
    }

    /// `(α_N, α_P)` if every Dirichlet edge satisfies
    /// `log N^D - V^D = α_N` and `log P^D + V^D = α_P` within `tol`.
    pub fn thermal_constants(&self, mesh: &Mesh, tol: f64) -> Option<(f64, f64)> {
        let mut alpha: Option<(f64, f64)> = None;
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.tag != EdgeTag::Dirichlet {
                continue;
            }
            let an = self.n_dirichlet[e].ln() - self.v_dirichlet[e];
            let ap = self.p_dirichlet[e].ln() + self.v_dirichlet[e];
            match alpha {
                None => alpha = Some((an, ap)),
                Some((a, b)) if (a - an).abs() <= tol && (b - ap).abs() <= tol => {}
                Some(_) => return None,
            }
        }
        alpha
    }
}

/// Time discretization of the drift-diffusion residual.
#[derive(Clone, Copy, Debug)]
pub enum DdTime<'a> {
    Steady,
    Implicit { n_prev: &'a [f64], p_prev: &'a [f64], dt: f64 },
}

/// Fully coupled drift-diffusion-Poisson system in the stacked unknown
/// `[N, P, V]`, with every flux evaluated at the new state.
pub struct DdSystem<'a> {
    pub mesh: &'a Mesh,
    pub data: &'a DdData,
    pub scheme: &'a BScheme,
    pub time: DdTime<'a>,
}

struct EdgeState {
    k: usize,
    l: Option<usize>,
    tau: f64,
    dv: f64,
    n_other: f64,
    p_other: f64,
}

impl DdSystem<'_> {
    fn edges(&self, x: &[f64]) -> impl Iterator<Item = EdgeState> + '_ {
        let n = self.mesh.n_cells();
        let (nn, pp, vv) = (x[..n].to_vec(), x[n..2 * n].to_vec(), x[2 * n..].to_vec());
        self.mesh.edges().iter().enumerate().filter_map(move |(e, edge)| {
            let k = edge.cells.0;
            let (l, v_other, n_other, p_other) = match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(l)) => (Some(l), vv[l], nn[l], pp[l]),
                (EdgeTag::Dirichlet, _) => {
                    (None, self.data.v_dirichlet[e], self.data.n_dirichlet[e], self.data.p_dirichlet[e])
                }
                _ => return None,
            };
            Some(EdgeState { k, l, tau: edge.transmissibility, dv: v_other - vv[k], n_other, p_other })
        })
    }

    /// Electron and hole fluxes across one edge from its reference cell.
    pub fn edge_fluxes(&self, dv: f64, n_k: f64, n_other: f64, p_k: f64, p_other: f64, tau: f64) -> (f64, f64) {
        let (bm, bp) = (self.scheme.eval(-dv), self.scheme.eval(dv));
        (tau * (bm * n_k - bp * n_other), tau * (bp * p_k - bm * p_other))
    }
}

impl NonlinearSystem for DdSystem<'_> {
    fn dim(&self) -> usize {
        3 * self.mesh.n_cells()
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let n = self.mesh.n_cells();
        let lam2 = self.data.lambda * self.data.lambda;
        let mut r = vec![0.0; 3 * n];
        for (k, c) in self.mesh.cells().iter().enumerate() {
            if let DdTime::Implicit { n_prev, p_prev, dt } = self.time {
                r[k] = c.measure * (x[k] - n_prev[k]) / dt;
                r[n + k] = c.measure * (x[n + k] - p_prev[k]) / dt;
            }
            r[2 * n + k] = -c.measure * (x[n + k] - x[k] + self.data.doping[k]);
        }
        for s in self.edges(x) {
            let (f, g) = self.edge_fluxes(s.dv, x[s.k], s.n_other, x[n + s.k], s.p_other, s.tau);
            let q = -lam2 * s.tau * s.dv;
            r[s.k] += f;
            r[n + s.k] += g;
            r[2 * n + s.k] += q;
            if let Some(l) = s.l {
                r[l] -= f;
                r[n + l] -= g;
                r[2 * n + l] -= q;
            }
        }
        r
    }

    fn jacobian(&self, x: &[f64]) -> SparseMatrix {
        let n = self.mesh.n_cells();
        let lam2 = self.data.lambda * self.data.lambda;
        let mut j = TripletBuilder::with_capacity(3 * n, 5 * n + 20 * self.mesh.n_edges());
        for (k, c) in self.mesh.cells().iter().enumerate() {
            if let DdTime::Implicit { dt, .. } = self.time {
                j.add(k, k, c.measure / dt);
                j.add(n + k, n + k, c.measure / dt);
            }
            j.add(2 * n + k, k, c.measure);
            j.add(2 * n + k, n + k, -c.measure);
        }
        let b = self.scheme;
        for s in self.edges(x) {
            let (k, t, dv) = (s.k, s.tau, s.dv);
            let (nk, pk) = (x[k], x[n + k]);
            let (bm, bp) = (b.eval(-dv), b.eval(dv));
            let (dbm, dbp) = (b.derivative(-dv), b.derivative(dv));
            // derivatives of F, G with respect to D V
            let f_dv = t * (-dbm * nk - dbp * s.n_other);
            let g_dv = t * (dbp * pk + dbm * s.p_other);
            let sides: &[(usize, f64)] = match s.l {
                Some(l) => &[(k, 1.0), (l, -1.0)],
                None => &[(k, 1.0)],
            };
            for &(row, sign) in sides {
                j.add(row, k, sign * t * bm);
                j.add(n + row, n + k, sign * t * bp);
                j.add(row, 2 * n + k, -sign * f_dv);
                j.add(n + row, 2 * n + k, -sign * g_dv);
                j.add(2 * n + row, 2 * n + k, sign * lam2 * t);
                if let Some(l) = s.l {
                    j.add(row, l, -sign * t * bp);
                    j.add(n + row, n + l, -sign * t * bm);
                    j.add(row, 2 * n + l, sign * f_dv);
                    j.add(n + row, 2 * n + l, sign * g_dv);
                    j.add(2 * n + row, 2 * n + l, -sign * lam2 * t);
                }
            }
        }
        j.build()
    }
}

pub fn assemble_dd_residual(
    mesh: &Mesh,
    data: &DdData,
    scheme: &BScheme,
    time: DdTime<'_>,
    state: &[f64],
) -> (Vec<f64>, SparseMatrix) {
    let s = DdSystem { mesh, data, scheme, time };
    (s.residual(state), s.jacobian(state))
}

/// Nonlinear Poisson equation of thermal equilibrium in `V`:
/// `-λ² Σ τ D V = m(K)(exp(α_P - V_K) - exp(α_N + V_K) + C_K)`.
pub struct ThermalPoisson<'a> {
    pub mesh: &'a Mesh,
    pub data: &'a DdData,
    pub alpha_n: f64,
    pub alpha_p: f64,
    poisson: SparseMatrix,
    boundary: Vec<f64>,
}

impl<'a> ThermalPoisson<'a> {
    pub fn new(mesh: &'a Mesh, data: &'a DdData, alpha_n: f64, alpha_p: f64) -> Self {
        let poisson = assemble_poisson(mesh, data.lambda);
        let boundary = poisson_boundary(mesh, data.lambda, &data.v_dirichlet);
        ThermalPoisson { mesh, data, alpha_n, alpha_p, poisson, boundary }
    }
}

impl NonlinearSystem for ThermalPoisson<'_> {
    fn dim(&self) -> usize {
        self.mesh.n_cells()
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let av = self.poisson.matvec(v);
        self.mesh
            .cells()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let rhs = (self.alpha_p - v[k]).exp() - (self.alpha_n + v[k]).exp() + self.data.doping[k];
                av[k] - self.boundary[k] - c.measure * rhs
            })
            .collect()
    }

    fn jacobian(&self, v: &[f64]) -> SparseMatrix {
        let diag: Vec<f64> = self
            .mesh
            .cells()
            .iter()
            .enumerate()
            .map(|(k, c)| c.measure * ((self.alpha_p - v[k]).exp() + (self.alpha_n + v[k]).exp()))
            .collect();
        self.poisson.scaled_plus_diagonal(1.0, &diag)
    }
}

/// TPFA Laplacian `λ² Σ_σ τ_σ (V_K - V_{K,σ})` with Dirichlet values moved
/// to [`poisson_boundary`] and Neumann edges absent.
pub fn assemble_poisson(mesh: &Mesh, lambda: f64) -> SparseMatrix {
    let lam2 = lambda * lambda;
    let mut t = TripletBuilder::with_capacity(mesh.n_cells(), 4 * mesh.n_edges());
    for edge in mesh.edges() {
        let k = edge.cells.0;
        let w = lam2 * edge.transmissibility;
        match (edge.tag, edge.cells.1) {
            (EdgeTag::Interior, Some(l)) => {
                t.add(k, k, w);
                t.add(k, l, -w);
                t.add(l, l, w);
                t.add(l, k, -w);
            }
            (EdgeTag::Dirichlet, _) => t.add(k, k, w),
            _ => {}
        }
    }
    t.build()
}

pub fn poisson_boundary(mesh: &Mesh, lambda: f64, v_dirichlet: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; mesh.n_cells()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.tag == EdgeTag::Dirichlet {
            b[edge.cells.0] += lambda * lambda * edge.transmissibility * v_dirichlet[e];
        }
    }
    b
}
