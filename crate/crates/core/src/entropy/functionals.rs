use crate::mesh::{EdgeTag, Mesh};
use crate::schemes::{edge_steady_weights, signed_pow, BScheme, EdgeCoefficients, TransportData};

use super::{EntropyError, PhiFunction};

fn check_positive(v: &[f64]) -> Result<(), EntropyError> {
    match v.iter().position(|x| !(*x > 0.0)) {
        Some(i) => Err(EntropyError::NonPositive { index: i, value: v[i] }),
        None => Ok(()),
    }
}

fn check_len(mesh: &Mesh, v: &[f64]) -> Result<(), EntropyError> {
    if v.len() != mesh.n_cells() {
        return Err(EntropyError::Length { expected: mesh.n_cells(), got: v.len() });
    }
    Ok(())
}

/// `Σ_K m(K) φ(f_K / f∞_K) f∞_K`
pub fn relative_phi_entropy(mesh: &Mesh, f: &[f64], f_inf: &[f64], phi: PhiFunction) -> Result<f64, EntropyError> {
    check_len(mesh, f)?;
    check_len(mesh, f_inf)?;
    check_positive(f_inf)?;
    Ok(mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(k, c)| c.measure * phi.value(f[k] / f_inf[k]) * f_inf[k])
        .sum())
}

/// Dissipation of a relative φ-entropy along a linear Fokker-Planck scheme,
/// with the edge steady weights and flux coefficients evaluated once.
#[derive(Clone, Debug)]
pub struct PhiDissipation {
    weight: Vec<f64>,
    f_inf: Vec<f64>,
}

impl PhiDissipation {
    pub fn new(mesh: &Mesh, data: &TransportData, scheme: &BScheme, f_inf: &[f64]) -> Result<Self, EntropyError> {
        check_len(mesh, f_inf)?;
        check_positive(f_inf)?;
        let c = EdgeCoefficients::compute(mesh, data, scheme);
        let fb = edge_steady_weights(mesh, data, &c, f_inf);
        let weight = fb.iter().zip(&c.weight).map(|(b, w)| b * w).collect();
        Ok(PhiDissipation { weight, f_inf: f_inf.to_vec() })
    }

    /// `Σ_σ τ_σ a_σ (D h)(D φ'(h)) f_{B,σ}^∞` with `h = f/f∞` and `h = 1` on
    /// Dirichlet edges.
    pub fn eval(&self, mesh: &Mesh, f: &[f64], phi: PhiFunction) -> f64 {
        let h = |k: usize| f[k] / self.f_inf[k];
        mesh.edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let k = edge.cells.0;
                let other = match (edge.tag, edge.cells.1) {
                    (EdgeTag::Interior, Some(l)) => h(l),
                    (EdgeTag::Dirichlet, _) => 1.0,
                    _ => return 0.0,
                };
                let hk = h(k);
                if other == hk {
                    return 0.0;
                }
                self.weight[e] * (other - hk) * (phi.derivative(other) - phi.derivative(hk))
            })
            .sum()
    }
}

pub fn phi_dissipation(
    mesh: &Mesh,
    data: &TransportData,
    scheme: &BScheme,
    f: &[f64],
    f_inf: &[f64],
    phi: PhiFunction,
) -> Result<f64, EntropyError> {
    check_len(mesh, f)?;
    Ok(PhiDissipation::new(mesh, data, scheme, f_inf)?.eval(mesh, f, phi))
}

/// Relative entrophy
/// `Σ_K m(K) [(f_K^{m+1} - f∞_K^{m+1})/(m+1) - f∞_K^m (f_K - f∞_K)]`.
pub fn entrophy(mesh: &Mesh, f: &[f64], f_inf: &[f64], m: f64) -> f64 {
    mesh.cells()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let (x, y) = (f[k], f_inf[k]);
            c.measure * ((signed_pow(x, m + 1.0) - signed_pow(y, m + 1.0)) / (m + 1.0) - signed_pow(y, m) * (x - y))
        })
        .sum()
}

/// `Σ_σ τ_σ (D_{K,σ}(f^m - f∞^m))²`; on Dirichlet edges both fields share
/// the boundary value, so the difference is `-(f_K^m - f∞_K^m)`.
pub fn entrophy_dissipation(mesh: &Mesh, f: &[f64], f_inf: &[f64], m: f64) -> f64 {
    let g = |k: usize| signed_pow(f[k], m) - signed_pow(f_inf[k], m);
    mesh.edges()
        .iter()
        .map(|edge| {
            let k = edge.cells.0;
            let d = match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(l)) => g(l) - g(k),
                (EdgeTag::Dirichlet, _) => -g(k),
                _ => 0.0,
            };
            edge.transmissibility * d * d
        })
        .sum()
}

/// `x log x - x + 1`
pub fn boltzmann_h(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x * x.ln() - x + 1.0
    }
}

/// Relative drift-diffusion entropy of `(n, p, v)` with respect to
/// `(n_ref, p_ref, v_ref)`. Both states are assumed to carry the same
/// boundary potential, so potential differences vanish on Dirichlet edges.
pub fn dd_entropy(
    mesh: &Mesh,
    state: (&[f64], &[f64], &[f64]),
    reference: (&[f64], &[f64], &[f64]),
    lambda: f64,
) -> Result<f64, EntropyError> {
    let (n, p, v) = state;
    let (nr, pr, vr) = reference;
    for x in [n, p, v, nr, pr, vr] {
        check_len(mesh, x)?;
    }
    for x in [n, p, nr, pr] {
        check_positive(x)?;
    }
    let rel = |x: f64, r: f64| boltzmann_h(x) - boltzmann_h(r) - r.ln() * (x - r);
    let bulk: f64 = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(k, c)| c.measure * (rel(n[k], nr[k]) + rel(p[k], pr[k])))
        .sum();
    let w = |k: usize| v[k] - vr[k];
    let field: f64 = mesh
        .edges()
        .iter()
        .map(|edge| {
            let k = edge.cells.0;
            let d = match (edge.tag, edge.cells.1) {
                (EdgeTag::Interior, Some(l)) => w(l) - w(k),
                (EdgeTag::Dirichlet, _) => -w(k),
                _ => 0.0,
            };
            edge.transmissibility * d * d
        })
        .sum();
    Ok(bulk + 0.5 * lambda * lambda * field)
}

/// `(Σ_K m(K) |f_K - g_K|^p)^{1/p}`
pub fn lp_distance(mesh: &Mesh, f: &[f64], g: &[f64], p: f64) -> f64 {
    let s: f64 = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(k, c)| c.measure * (f[k] - g[k]).abs().powf(p))
        .sum();
    s.powf(1.0 / p)
}
