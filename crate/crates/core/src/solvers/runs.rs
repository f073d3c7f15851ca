use crate::entropy::{dd_entropy, entrophy, entrophy_dissipation, lp_distance, relative_phi_entropy, EntropyTrace, PhiDissipation, PhiFunction};
use crate::mesh::Mesh;
use crate::schemes::{BScheme, DdData, PecletPolicy, TransportData};

use super::{
    run_transient, solve_dd_steady, solve_dd_thermal, solve_fp_steady, solve_pme_steady, DdState, DdStepper, FpStepper,
    PmeStepper, RunSummary, SolverError, StepperConfig,
};

pub const FP_COLUMNS: [&str; 5] = ["H_phi1", "H_phi2", "D_phi2", "L1", "L2"];
pub const PME_COLUMNS: [&str; 3] = ["N_m", "D_m", "Lmp1"];
pub const DD_COLUMNS: [&str; 2] = ["E_inf", "E_eq"];

/// A finished transient run: the diagnostics trace, the steady state every
/// entropy is measured against and the stepping summary. Drift-diffusion
/// runs also carry the thermal equilibrium when the boundary data admit one.
#[derive(Clone, Debug)]
pub struct ModelRun<S> {
    pub trace: EntropyTrace,
    pub steady: S,
    pub equilibrium: Option<S>,
    pub summary: RunSummary<S>,
}

/// Linear Fokker-Planck run from `f0`; the primary entropy is `H_phi2`.
/// `hook` sees every accepted state as `(t, dt, previous, new)`.
pub fn run_fp<H>(
    mesh: &Mesh,
    data: &TransportData,
    scheme: &BScheme,
    policy: PecletPolicy,
    f0: Vec<f64>,
    cfg: &StepperConfig,
    mut hook: H,
) -> Result<ModelRun<Vec<f64>>, SolverError>
where
    H: FnMut(f64, f64, Option<&Vec<f64>>, &Vec<f64>),
{
    let steady = solve_fp_steady(mesh, data, scheme, policy)?;
    let diss = PhiDissipation::new(mesh, data, scheme, &steady)?;
    let mut stepper = FpStepper::new(mesh, data, scheme, policy)?;
    let mut trace = EntropyTrace::new(&FP_COLUMNS);
    let summary = run_transient(&mut stepper, f0, cfg, |t, dt, prev, f| {
        hook(t, dt, prev, f);
        let h1 = relative_phi_entropy(mesh, f, &steady, PhiFunction::Boltzmann)?;
        let h2 = relative_phi_entropy(mesh, f, &steady, PhiFunction::Power(2.0))?;
        let d2 = diss.eval(mesh, f, PhiFunction::Power(2.0));
        let row = [h1, h2, d2, lp_distance(mesh, f, &steady, 1.0), lp_distance(mesh, f, &steady, 2.0)];
        trace.push(t, dt, &row);
        Ok(h2)
    })?;
    Ok(ModelRun { trace, steady, equilibrium: None, summary })
}

/// Porous medium run with exponent `m`; the primary entropy is `N_m`.
pub fn run_pme<H>(
    mesh: &Mesh,
    dirichlet: &[f64],
    m: f64,
    f0: Vec<f64>,
    cfg: &StepperConfig,
    mut hook: H,
) -> Result<ModelRun<Vec<f64>>, SolverError>
where
    H: FnMut(f64, f64, Option<&Vec<f64>>, &Vec<f64>),
{
    let steady = solve_pme_steady(mesh, dirichlet, m, Some(&f0))?;
    let mut stepper = PmeStepper { mesh, dirichlet, exponent: m, newton: cfg.newton };
    let mut trace = EntropyTrace::new(&PME_COLUMNS);
    let summary = run_transient(&mut stepper, f0, cfg, |t, dt, prev, f| {
        hook(t, dt, prev, f);
        let n = entrophy(mesh, f, &steady, m);
        let row = [n, entrophy_dissipation(mesh, f, &steady, m), lp_distance(mesh, f, &steady, m + 1.0)];
        trace.push(t, dt, &row);
        Ok(n)
    })?;
    Ok(ModelRun { trace, steady, equilibrium: None, summary })
}

/// Drift-diffusion run; `E_inf` is measured against the steady state of the
/// scheme and `E_eq` against the thermal equilibrium (NaN without one).
pub fn run_dd<H>(
    mesh: &Mesh,
    data: &DdData,
    scheme: &BScheme,
    initial: DdState,
    cfg: &StepperConfig,
    mut hook: H,
) -> Result<ModelRun<DdState>, SolverError>
where
    H: FnMut(f64, f64, Option<&DdState>, &DdState),
{
    let steady = solve_dd_steady(mesh, data, scheme, &cfg.newton)?;
    let equilibrium = match data.thermal_constants(mesh, 1e-12) {
        Some((an, ap)) => Some(solve_dd_thermal(mesh, data, an, ap, &cfg.newton)?),
        None => None,
    };
    let mut stepper = DdStepper { mesh, data, scheme, newton: cfg.newton };
    let mut trace = EntropyTrace::new(&DD_COLUMNS);
    let lam = data.lambda;
    let summary = run_transient(&mut stepper, initial, cfg, |t, dt, prev, s| {
        hook(t, dt, prev, s);
        let e_inf = dd_entropy(mesh, (&s.n, &s.p, &s.v), (&steady.n, &steady.p, &steady.v), lam)?;
        let e_eq = match &equilibrium {
            Some(q) => dd_entropy(mesh, (&s.n, &s.p, &s.v), (&q.n, &q.p, &q.v), lam)?,
            None => f64::NAN,
        };
        trace.push(t, dt, &[e_inf, e_eq]);
        Ok(e_inf)
    })?;
    Ok(ModelRun { trace, steady, equilibrium, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{reference_mesh, BoundarySpec};
    use crate::schemes::{advection_from_potential, cell_means, discretize_coefficients, sample_potential, Diffusion};

    #[test]
    fn fp_trace_steps_double_and_entropy_decays() {
        let mesh = reference_mesh(0, BoundarySpec::left_right_dirichlet()).unwrap();
        let (pc, pe) = sample_potential(&mesh, &|p| p[0]).unwrap();
        let adv = advection_from_potential(&mesh, &pc, &pe).unwrap();
        let data = discretize_coefficients(&mesh, &Diffusion::Constant(1.0), &|p| p[0].exp(), adv).unwrap();
        let f0 = cell_means(&mesh, &|p| p[0].exp() + (p[0] / 2.0).exp() * (std::f64::consts::PI * p[0]).sin());
        let cfg = StepperConfig { final_time: 0.1, entropy_floor: None, ..StepperConfig::default() };
        let run = run_fp(&mesh, &data, &BScheme::ScharfetterGummel, PecletPolicy::default(), f0, &cfg, |_, _, _, _| {}).unwrap();
        let dts = run.trace.column("dt").unwrap();
        for (n, dt) in dts.iter().skip(1).enumerate() {
            assert_eq!(*dt, (1e-3 * 2f64.powi(n as i32)).min(1e-2));
        }
        let h = run.trace.column("H_phi2").unwrap();
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(run.summary.rejections, 0);
    }
}
