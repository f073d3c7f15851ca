use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::entropy::{fit_decay_rate, lp_distance, theoretical_rate_pme, EntropyTrace, UNIT_SQUARE_POINCARE};
use crate::par::Execution;
use crate::solvers::{run_dd, run_fp, run_pme, DdState, ModelRun, StepperConfig};

use super::config::RunConfig;
use super::presets::{build_problem, Problem, SWEEP_BOUNDARY_VALUES, SWEEP_EXPONENTS};
use super::CliError;

/// Files written by a run and a short human-readable summary.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// One point of the porous medium sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub m: f64,
    pub m_d: f64,
    pub rate: f64,
    pub theoretical: f64,
}

/// Entropy levels, relative to the first sample, between which the tail of
/// a porous medium trace is fitted.
pub const SWEEP_FIT_LEVELS: (f64, f64) = (1e-3, 1e-11);

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn scalar_snapshot(f: &[f64]) -> String {
    let mut out = String::new();
    for (k, v) in f.iter().enumerate() {
        let _ = writeln!(out, "{k} {v:e}");
    }
    out
}

fn dd_snapshot(s: &DdState) -> String {
    let mut out = String::new();
    for k in 0..s.n_cells() {
        let _ = writeln!(out, "{k} {:e} {:e} {:e}", s.n[k], s.p[k], s.v[k]);
    }
    out
}

/// Write trace and steady snapshot under `stem`, then turn an aborted run
/// into an error once the partial trace is on disk.
fn finish<S>(run: &ModelRun<S>, out: &Path, stem: &str, snapshot: String, report: &mut RunReport) -> Result<(), CliError> {
    let trace_path = out.join(format!("{stem}_trace.csv"));
    write_file(&trace_path, &run.trace.to_csv())?;
    let steady_path = out.join(format!("{stem}_steady.txt"));
    write_file(&steady_path, &snapshot)?;
    report.files.push(trace_path.clone());
    report.files.push(steady_path);
    if let Some(reason) = &run.summary.aborted {
        return Err(CliError::Aborted { time: run.summary.time, reason: reason.clone(), trace: trace_path });
    }
    report.summary.push(format!(
        "{stem}: {} steps ({} rejected) to t = {}",
        run.summary.steps, run.summary.rejections, run.summary.time
    ));
    Ok(())
}

/// Decay rate of `N_m` fitted on the tail of a porous medium trace.
pub fn pme_tail_rate(trace: &EntropyTrace) -> Result<f64, CliError> {
    let t = trace.column("t").map_err(crate::solvers::SolverError::from)?;
    let n = trace.column("N_m").map_err(crate::solvers::SolverError::from)?;
    let n0 = n.first().copied().unwrap_or(0.0);
    let (hi, lo) = SWEEP_FIT_LEVELS;
    let start = n.iter().position(|v| *v <= hi * n0);
    let end = n.iter().rposition(|v| *v >= lo * n0);
    let window = match (start, end) {
        (Some(a), Some(b)) if b > a => (t[a], t[b]),
        _ => (t[t.len() / 2], t[t.len() - 1]),
    };
    Ok(fit_decay_rate(&t, &n, window).map_err(crate::solvers::SolverError::from)?.rate)
}

fn sweep_stem(m: f64, m_d: f64) -> String {
    format!("pme-sweep-m{m}-md{m_d}")
}

/// Run every `(m, m_D)` case of the sweep and fit the decay rates.
pub fn run_sweep(
    level: usize,
    cases: &[(f64, f64)],
    stepper: &StepperConfig,
    out: &Path,
    exec: Execution,
) -> Result<(Vec<SweepPoint>, RunReport), CliError> {
    let results = exec.map_slice(cases, |&(m, m_d)| -> Result<(SweepPoint, RunReport), CliError> {
        let Problem::Pme { mesh, dirichlet, m, initial } = super::presets::sweep_problem(level, m, m_d)? else {
            unreachable!("sweep problems are porous medium problems")
        };
        let run = run_pme(&mesh, &dirichlet, m, initial, stepper, |_, _, _, _| {})?;
        let mut report = RunReport::default();
        let stem = sweep_stem(m, m_d);
        finish(&run, out, &stem, scalar_snapshot(&run.steady), &mut report)?;
        let rate = pme_tail_rate(&run.trace)?;
        let theoretical = theoretical_rate_pme(m_d, m, mesh.xi(), UNIT_SQUARE_POINCARE, stepper.dt_max);
        Ok((SweepPoint { m, m_d, rate, theoretical }, report))
    });
    let mut points = Vec::new();
    let mut report = RunReport::default();
    for r in results {
        let (p, rep) = r?;
        points.push(p);
        report.files.extend(rep.files);
        report.summary.extend(rep.summary);
    }
    let mut csv = String::from("m,m_D,rate,theoretical_rate\n");
    for p in &points {
        let _ = writeln!(csv, "{:e},{:e},{:e},{:e}", p.m, p.m_d, p.rate, p.theoretical);
    }
    let path = out.join("pme-sweep_rates.csv");
    write_file(&path, &csv)?;
    report.files.push(path);
    Ok((points, report))
}

/// Execute a resolved configuration, writing `<stem>_trace.csv` and
/// `<stem>_steady.txt` into the output directory.
pub fn run(cfg: &RunConfig, exec: Execution) -> Result<RunReport, CliError> {
    let name = cfg.preset.name;
    if name == "pme-sweep" {
        let cases: Vec<(f64, f64)> = if cfg.sweep_pinned {
            vec![(cfg.params.m, cfg.params.m_d)]
        } else {
            SWEEP_EXPONENTS.iter().flat_map(|&m| SWEEP_BOUNDARY_VALUES.iter().map(move |&d| (m, d))).collect()
        };
        let (points, mut report) = run_sweep(cfg.level, &cases, &cfg.stepper, &cfg.out, exec)?;
        for p in points {
            report.summary.push(format!(
                "m = {}, m_D = {}: rate {:.4e} (guaranteed {:.4e})",
                p.m, p.m_d, p.rate, p.theoretical
            ));
        }
        return Ok(report);
    }

    let mut report = RunReport::default();
    let scheme = &cfg.scheme;
    match build_problem(&cfg.preset, cfg.level, &cfg.params)? {
        Problem::FokkerPlanck { mesh, data, initial, reference } => {
            let run = run_fp(&mesh, &data, scheme, cfg.policy, initial, &cfg.stepper, |_, _, _, _| {})?;
            let stem = format!("{name}-{}", scheme.name());
            finish(&run, &cfg.out, &stem, scalar_snapshot(&run.steady), &mut report)?;
            if let Some(r) = reference {
                let err = lp_distance(&mesh, &run.steady, &r, 1.0);
                report.summary.push(format!("steady L1 error against exp(x1): {err:.3e}"));
            }
        }
        Problem::Pme { mesh, dirichlet, m, initial } => {
            let run = run_pme(&mesh, &dirichlet, m, initial, &cfg.stepper, |_, _, _, _| {})?;
            finish(&run, &cfg.out, name, scalar_snapshot(&run.steady), &mut report)?;
            if let Some(n) = run.trace.last("N_m") {
                report.summary.push(format!("final N_m = {n:.4e}"));
            }
        }
        Problem::DriftDiffusion { mesh, data, initial } => {
            let run = run_dd(&mesh, &data, scheme, initial, &cfg.stepper, |_, _, _, _| {})?;
            let stem = format!("{name}-{}", scheme.name());
            finish(&run, &cfg.out, &stem, dd_snapshot(&run.steady), &mut report)?;
            if let (Some(a), Some(b)) = (run.trace.last("E_inf"), run.trace.last("E_eq")) {
                report.summary.push(format!("final E_inf = {a:.4e}, E_eq = {b:.4e}"));
            }
        }
    }
    Ok(report)
}
