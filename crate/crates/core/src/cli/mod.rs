//! The `entrofv` command line: preset runs, convergence studies and mesh tools.
//!
//! Exit codes are 0 on success, 1 when a solver fails or a run aborts and 2
//! for usage errors (bad arguments, unknown presets, malformed config files).

pub mod config;
pub mod convergence;
pub mod presets;
pub mod run;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::mesh::io::{load_mesh, save_mesh};
use crate::mesh::{reference_mesh, refine, validate, BoundarySpec, MeshError};
use crate::par::{set_thread_count, Execution};
use crate::schemes::{BScheme, PecletPolicy, SchemeError};
use crate::solvers::SolverError;

pub use config::{Overrides, RunConfig};
pub use convergence::{convergence_study, ConvergenceTable, ORDER_FLOOR};
pub use presets::{build_problem, find_preset, presets, Model, Params, Preset, Problem};
pub use run::{pme_tail_rate, run, run_sweep, RunReport, SweepPoint, SWEEP_FIT_LEVELS};

/// Worker count for parallel sweeps and convergence studies.
pub const THREADS_ENV: &str = "ENTROFV_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown preset `{0}` (available: fp-toy, fp-hetero, pme-fill, pme-sweep, dd-pn, dd-bias)")]
    UnknownPreset(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("preset `{0}` has no exact reference to measure errors against")]
    MissingReference(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("run aborted at t = {time}: {reason} (partial trace in {})", trace.display())]
    Aborted { time: f64, reason: String, trace: PathBuf },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::UnknownPreset(_) | CliError::Config { .. } | CliError::MissingReference(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "entrofv", version, about = "Entropy-diminishing finite volume solver for convection-diffusion problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset or a config file; writes a trace CSV and a steady snapshot.
    Run(RunArgs),
    /// Steady L1 errors and orders over a range of levels.
    Convergence(ConvergenceArgs),
    /// Generate, check or refine meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Preset name or path to a config file.
    pub target: String,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub level: Option<usize>,
    /// Fixed time step.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reject data violating the Péclet condition for every scheme.
    #[arg(long)]
    pub force_peclet: bool,
    #[arg(long)]
    pub final_time: Option<f64>,
    /// Porous medium exponent.
    #[arg(long)]
    pub m: Option<f64>,
    /// Constant boundary value of the porous medium sweep.
    #[arg(long = "m-d")]
    pub m_d: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub bias: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    pub preset: String,
    /// Inclusive range such as `0..4`, or a single level.
    #[arg(long, default_value = "0..4")]
    pub levels: String,
    /// Comma-separated scheme names.
    #[arg(long, default_value = "upwind,centered,sg")]
    pub schemes: String,
    /// Directory for `<preset>_convergence.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force_peclet: bool,
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Write a member of the reference family.
    Gen {
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// all-dirichlet, all-neumann, left-right, top-bottom or junction.
        #[arg(long, default_value = "all-dirichlet")]
        boundary: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report admissibility violations; exits 1 if there are any.
    Check { file: PathBuf },
    /// Refine a saved mesh that carries its vertex block.
    Refine {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parse `a..b` (inclusive) or a single level.
pub fn parse_levels(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid level range `{s}`, expected e.g. 0..4"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let l = s.trim().parse().map_err(|_| bad())?;
            (l, l)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

pub fn parse_schemes(s: &str) -> Result<Vec<BScheme>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| BScheme::parse(t).ok_or_else(|| CliError::Usage(format!("unknown scheme `{}`", t.trim()))))
        .collect()
}

fn boundary_by_name(name: &str) -> Result<BoundarySpec, CliError> {
    Ok(match name {
        "all-dirichlet" => BoundarySpec::all_dirichlet(),
        "all-neumann" => BoundarySpec::all_neumann(),
        "left-right" => BoundarySpec::left_right_dirichlet(),
        "top-bottom" => BoundarySpec::top_bottom_dirichlet(),
        "junction" => presets::junction_boundary(),
        other => return Err(CliError::Usage(format!("unknown boundary layout `{other}`"))),
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => run::write_file(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn say(stdout: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(stdout, "{line}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

/// Resolve the `run` arguments: a readable file is a config, anything else
/// a preset name. Command-line flags win over the file.
pub fn resolve_run_args(args: &RunArgs) -> Result<RunConfig, CliError> {
    let path = Path::new(&args.target);
    let base = if path.is_file() {
        Overrides::parse(&read_file(path)?, None)?
    } else {
        Overrides { preset: Some(args.target.clone()), ..Default::default() }
    };
    let cli = Overrides {
        scheme: args.scheme.clone(),
        level: args.level,
        dt: args.dt,
        out: args.out.clone(),
        force_peclet: args.force_peclet.then_some(true),
        final_time: args.final_time,
        m: args.m,
        m_d: args.m_d,
        lambda: args.lambda,
        bias: args.bias,
        ..Default::default()
    };
    base.merge(cli).resolve()
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let cfg = resolve_run_args(args)?;
            let report = run::run(&cfg, Execution::default())?;
            for line in report.summary.iter().map(String::as_str).chain(report.files.iter().filter_map(|p| p.to_str())) {
                say(stdout, line)?;
            }
        }
        Command::Convergence(args) => {
            let preset = find_preset(&args.preset).ok_or_else(|| CliError::UnknownPreset(args.preset.clone()))?;
            let levels = parse_levels(&args.levels)?;
            if let Some(l) = levels.iter().find(|l| **l > 4) {
                return Err(CliError::Usage(format!("level {l} outside the supported range 0..=4")));
            }
            let schemes = parse_schemes(&args.schemes)?;
            let policy = PecletPolicy { force: args.force_peclet, ..PecletPolicy::default() };
            let table = convergence_study(&preset, &levels, &schemes, policy, Execution::default())?;
            say(stdout, table.to_text().trim_end())?;
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let path = out.join(format!("{}_convergence.csv", preset.name));
            run::write_file(&path, &table.to_csv())?;
            say(stdout, &path.display().to_string())?;
        }
        Command::Mesh(MeshCommand::Gen { level, boundary, output }) => {
            let mesh = reference_mesh(*level, boundary_by_name(boundary)?)?;
            emit(&save_mesh(&mesh), output.as_deref(), stdout)?;
        }
        Command::Mesh(MeshCommand::Check { file }) => {
            let mesh = load_mesh(&read_file(file)?)?;
            let report = validate(&mesh);
            say(stdout, &format!("{} cells, {} edges, xi = {:e}", mesh.n_cells(), mesh.n_edges(), mesh.xi()))?;
            say(stdout, report.to_string().trim_end())?;
            if !report.is_empty() {
                return Err(CliError::Mesh(MeshError::UnsupportedGeometry(format!(
                    "{} admissibility violations",
                    report.violations.len()
                ))));
            }
        }
        Command::Mesh(MeshCommand::Refine { file, times, output }) => {
            let mut mesh = load_mesh(&read_file(file)?)?;
            for _ in 0..*times {
                mesh = refine(&mesh)?;
            }
            emit(&save_mesh(&mesh), output.as_deref(), stdout)?;
        }
    }
    Ok(())
}

/// Entry point: parse `args`, run and return the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{}", e.render()) } else { write!(stdout, "{}", e.render()) };
            return code;
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) => {
                set_thread_count(n);
            }
            Err(_) => {
                let _ = writeln!(stderr, "error: {THREADS_ENV} must be a thread count, got `{v}`");
                return 2;
            }
        }
    }
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(std::iter::once("entrofv").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_levels("2").unwrap(), vec![2]);
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("a..b").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["run", "no-such-preset"]).0, 2);
        assert_eq!(call(&["run", "fp-toy", "--scheme", "weno"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["convergence", "pme-fill", "--levels", "0..0"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn mesh_gen_check_refine() {
        let dir = tempfile::tempdir().unwrap();
        let coarse = dir.path().join("l0.tpfa");
        let fine = dir.path().join("l1.tpfa");
        let c = coarse.to_str().unwrap();
        assert_eq!(call(&["mesh", "gen", "--boundary", "left-right", "-o", c]).0, 0);
        let (code, out, _) = call(&["mesh", "check", c]);
        assert_eq!(code, 0);
        assert!(out.contains("56 cells") && out.contains("admissible"));
        assert_eq!(call(&["mesh", "refine", c, "-o", fine.to_str().unwrap()]).0, 0);
        let refined = load_mesh(&std::fs::read_to_string(&fine).unwrap()).unwrap();
        let direct = reference_mesh(1, BoundarySpec::left_right_dirichlet()).unwrap();
        assert!(refined.same_graph(&direct, 1e-15));
    }
}
