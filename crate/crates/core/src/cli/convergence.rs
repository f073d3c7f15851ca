use std::fmt::Write;

use crate::entropy::lp_distance;
use crate::par::Execution;
use crate::schemes::{BScheme, PecletPolicy};
use crate::solvers::solve_fp_steady;

use super::presets::{build_problem, Preset, Problem};
use super::CliError;

/// Errors at or below this size are round-off; no order is computed from them.
pub const ORDER_FLOOR: f64 = 1e-12;

/// L¹ errors of the steady state against the preset's reference, one row per
/// level and one column per scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub preset: String,
    pub schemes: Vec<String>,
    pub levels: Vec<usize>,
    pub cells: Vec<usize>,
    /// `errors[row][scheme]`
    pub errors: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    /// Experimental order between row `row - 1` and `row`, per halving of Δx.
    pub fn order(&self, row: usize, scheme: usize) -> Option<f64> {
        if row == 0 || row >= self.levels.len() {
            return None;
        }
        let (coarse, fine) = (self.errors[row - 1][scheme], self.errors[row][scheme]);
        if !(coarse > ORDER_FLOOR && fine > ORDER_FLOOR) {
            return None;
        }
        let gap = (self.levels[row] - self.levels[row - 1]) as f64;
        Some((coarse / fine).log2() / gap)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>5} {:>7}", "level", "cells");
        for s in &self.schemes {
            let _ = write!(out, " {:>12} {:>6}", s, "order");
        }
        out.push('\n');
        for (row, level) in self.levels.iter().enumerate() {
            let _ = write!(out, "{:>5} {:>7}", level, self.cells[row]);
            for s in 0..self.schemes.len() {
                let order = self.order(row, s).map_or("-".to_string(), |o| format!("{o:.2}"));
                let _ = write!(out, " {:>12.3e} {:>6}", self.errors[row][s], order);
            }
            out.push('\n');
        }
        out
    }

    /// Columns `level,cells,<scheme>_L1,<scheme>_order,...`; missing orders are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,cells");
        for s in &self.schemes {
            let _ = write!(out, ",{s}_L1,{s}_order");
        }
        out.push('\n');
        for (row, level) in self.levels.iter().enumerate() {
            let _ = write!(out, "{level},{}", self.cells[row]);
            for s in 0..self.schemes.len() {
                let order = self.order(row, s).map_or(String::new(), |o| format!("{o:e}"));
                let _ = write!(out, ",{:e},{order}", self.errors[row][s]);
            }
            out.push('\n');
        }
        out
    }
}

/// Solve the steady problem of `preset` on every level with every scheme and
/// tabulate the L¹ distance to its reference. Levels must increase strictly.
pub fn convergence_study(
    preset: &Preset,
    levels: &[usize],
    schemes: &[BScheme],
    policy: PecletPolicy,
    exec: Execution,
) -> Result<ConvergenceTable, CliError> {
    if levels.is_empty() || schemes.is_empty() {
        return Err(CliError::Usage("convergence study needs at least one level and one scheme".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("levels must increase strictly".into()));
    }
    let problems: Vec<Problem> =
        exec.map_slice(levels, |l| build_problem(preset, *l, &preset.params)).into_iter().collect::<Result<_, _>>()?;
    if !problems.iter().all(|p| matches!(p, Problem::FokkerPlanck { reference: Some(_), .. })) {
        return Err(CliError::MissingReference(preset.name.to_string()));
    }
    let errors: Vec<f64> = exec
        .map_range(levels.len() * schemes.len(), |j| {
            let (row, s) = (j / schemes.len(), j % schemes.len());
            let Problem::FokkerPlanck { mesh, data, reference: Some(reference), .. } = &problems[row] else {
                unreachable!("checked above")
            };
            let f = solve_fp_steady(mesh, data, &schemes[s], policy)?;
            Ok(lp_distance(mesh, &f, reference, 1.0))
        })
        .into_iter()
        .collect::<Result<_, CliError>>()?;
    Ok(ConvergenceTable {
        preset: preset.name.to_string(),
        schemes: schemes.iter().map(|s| s.name().to_string()).collect(),
        levels: levels.to_vec(),
        cells: problems.iter().map(|p| p.mesh().n_cells()).collect(),
        errors: errors.chunks(schemes.len()).map(|c| c.to_vec()).collect(),
    })
}
