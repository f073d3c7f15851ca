use std::collections::VecDeque;
use std::fmt;

use super::{EdgeTag, Mesh};

const ORTHOGONALITY_TOL: f64 = 1e-10;
const MEASURE_RTOL: f64 = 1e-12;

/// Which admissibility requirement a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    /// Interior edges have two cells, exterior edges one.
    Incidence,
    /// Some Dirichlet edge has positive measure.
    DirichletBoundary,
    /// Interior center-to-center segments are orthogonal to their edge.
    Orthogonality,
    /// d_{K,σ} ≥ ξ d_σ with ξ > 0.
    Regularity,
    Connectivity,
    /// τ_σ = m(σ)/d_σ with positive distances.
    Transmissibility,
    /// Cell measures add up to the domain measure.
    Measure,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Incidence { edge: usize, detail: String },
    NoDirichlet,
    Orthogonality { edge: usize, cosine: f64 },
    Regularity { edge: usize, cell: usize, ratio: f64 },
    Disconnected { cell: usize },
    Transmissibility { edge: usize },
    MeasureSum { sum: f64, domain: f64 },
}

impl Violation {
    pub fn hypothesis(&self) -> Hypothesis {
        match self {
            Violation::Incidence { .. } => Hypothesis::Incidence,
            Violation::NoDirichlet => Hypothesis::DirichletBoundary,
            Violation::Orthogonality { .. } => Hypothesis::Orthogonality,
            Violation::Regularity { .. } => Hypothesis::Regularity,
            Violation::Disconnected { .. } => Hypothesis::Connectivity,
            Violation::Transmissibility { .. } => Hypothesis::Transmissibility,
            Violation::MeasureSum { .. } => Hypothesis::Measure,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Incidence { edge, detail } => write!(f, "incidence: edge {edge}: {detail}"),
            Violation::NoDirichlet => write!(f, "dirichlet boundary: no Dirichlet edge of positive measure"),
            Violation::Orthogonality { edge, cosine } => {
                write!(f, "orthogonality: edge {edge} has cosine {cosine:.3e} with its center segment")
            }
            Violation::Regularity { edge, cell, ratio } => {
                write!(f, "regularity: cell {cell} on edge {edge} has d_K/d = {ratio:.3e} below xi")
            }
            Violation::Disconnected { cell } => write!(f, "connectivity: cell {cell} is unreachable from cell 0"),
            Violation::Transmissibility { edge } => {
                write!(f, "transmissibility: edge {edge} has inconsistent or non-positive tau/d")
            }
            Violation::MeasureSum { sum, domain } => {
                write!(f, "measure: cells sum to {sum} but the domain measures {domain}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn cites(&self, h: Hypothesis) -> bool {
        self.violations.iter().any(|v| v.hypothesis() == h)
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "admissible");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every admissibility requirement; violations are reported, not raised.
pub fn validate(mesh: &Mesh) -> AdmissibilityReport {
    let mut out = Vec::new();
    let n = mesh.n_cells();
    let xi = mesh.xi();

    for (id, e) in mesh.edges().iter().enumerate() {
        let cells_ok = e.cells.0 < n && e.cells.1.is_none_or(|l| l < n);
        if !cells_ok {
            out.push(Violation::Incidence { edge: id, detail: "references a missing cell".into() });
            continue;
        }
        let shape_ok = match e.tag {
            EdgeTag::Interior => e.cells.1.is_some() && e.cell_dist.1.is_some(),
            _ => e.cells.1.is_none() && e.cell_dist.1.is_none(),
        };
        if !shape_ok {
            out.push(Violation::Incidence { edge: id, detail: format!("{:?} edge with wrong cell count", e.tag) });
            continue;
        }
        let listed = mesh.cell(e.cells.0).edges.contains(&id) && e.cells.1.is_none_or(|l| mesh.cell(l).edges.contains(&id));
        if !listed {
            out.push(Violation::Incidence { edge: id, detail: "missing from an incident cell's edge list".into() });
        }

        let tau = e.measure / e.dist;
        if !(e.dist > 0.0 && e.transmissibility > 0.0 && (e.transmissibility - tau).abs() <= MEASURE_RTOL * tau) {
            out.push(Violation::Transmissibility { edge: id });
        }

        let incidences = [Some((e.cells.0, e.cell_dist.0)), e.cells.1.zip(e.cell_dist.1)];
        for (cell, d) in incidences.into_iter().flatten() {
            let ratio = d / e.dist;
            if !(xi > 0.0) || ratio < xi * (1.0 - MEASURE_RTOL) {
                out.push(Violation::Regularity { edge: id, cell, ratio });
            }
        }

        if let (Some(l), Some([p, q])) = (e.cells.1, mesh.edge_endpoints(id)) {
            let (xk, xl) = (mesh.cell(e.cells.0).center, mesh.cell(l).center);
            let s = [xl[0] - xk[0], xl[1] - xk[1]];
            let t = [q[0] - p[0], q[1] - p[1]];
            let norm = (s[0] * s[0] + s[1] * s[1]).sqrt() * (t[0] * t[0] + t[1] * t[1]).sqrt();
            let cosine = if norm > 0.0 { (s[0] * t[0] + s[1] * t[1]).abs() / norm } else { 0.0 };
            if cosine > ORTHOGONALITY_TOL {
                out.push(Violation::Orthogonality { edge: id, cosine });
            }
        }
    }

    for (k, c) in mesh.cells().iter().enumerate() {
        for &e in &c.edges {
            let ok = e < mesh.n_edges() && {
                let edge = mesh.edge(e);
                edge.cells.0 == k || edge.cells.1 == Some(k)
            };
            if !ok {
                out.push(Violation::Incidence { edge: e, detail: format!("listed by cell {k} but not incident to it") });
            }
        }
    }

    if !mesh.has_dirichlet() {
        out.push(Violation::NoDirichlet);
    }

    if n > 0 {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(k) = queue.pop_front() {
            for &e in &mesh.cell(k).edges {
                if let Some(l) = mesh.edges().get(e).and_then(|edge| edge.neighbor(k)) {
                    if l < n && !seen[l] {
                        seen[l] = true;
                        queue.push_back(l);
                    }
                }
            }
        }
        out.extend(seen.iter().enumerate().filter(|(_, s)| !**s).map(|(cell, _)| Violation::Disconnected { cell }));
    }

    let sum: f64 = mesh.cells().iter().map(|c| c.measure).sum();
    let domain = mesh.domain_measure();
    if (sum - domain).abs() > MEASURE_RTOL * domain.abs().max(f64::MIN_POSITIVE) {
        out.push(Violation::MeasureSum { sum, domain });
    }

    AdmissibilityReport { violations: out }
}
