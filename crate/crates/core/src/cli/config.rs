//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! preset = pme-fill
//! scheme = sg
//! level = 3
//! out = results
//!
//! [stepper]
//! final_time = 5
//! dt_max = 5e-3
//!
//! [data]
//! m = 3
//!
//! # applied only when the selected preset is dd-bias
//! [preset.dd-bias]
//! data.bias = 1.0
//! stepper.final_time = 2
//! ```
//!
//! Keys inside `[stepper]` and `[data]` are prefixed with the section name.
//! Inside `[preset.NAME]` keys are written in full (`data.m`,
//! `stepper.dt`, `level`) and win over the unscoped values.

use std::path::PathBuf;

use crate::schemes::{BScheme, PecletPolicy};
use crate::solvers::StepperConfig;

use super::presets::{find_preset, Params, Preset};
use super::CliError;

/// Overrides gathered from a config file and the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<String>,
    pub scheme: Option<String>,
    pub level: Option<usize>,
    pub out: Option<PathBuf>,
    pub force_peclet: Option<bool>,
    pub peclet_beta: Option<f64>,
    pub dt: Option<f64>,
    pub dt0: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    pub final_time: Option<f64>,
    /// `Some(None)` disables the entropy floor.
    pub entropy_floor: Option<Option<f64>>,
    pub newton_tolerance: Option<f64>,
    pub newton_iterations: Option<usize>,
    pub m: Option<f64>,
    pub m_d: Option<f64>,
    pub lambda: Option<f64>,
    pub bias: Option<f64>,
    pub a_drain: Option<f64>,
    pub a_barrier: Option<f64>,
}

/// Everything a run needs once overrides are resolved against a preset.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset: Preset,
    pub scheme: BScheme,
    pub level: usize,
    pub params: Params,
    pub stepper: StepperConfig,
    pub policy: PecletPolicy,
    pub out: PathBuf,
    /// True when the config pins `m` or `m_D`, so a sweep runs one case.
    pub sweep_pinned: bool,
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    scope: Option<String>,
    key: String,
    value: String,
}

fn parse_entries(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(inner) = s.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| CliError::Config { line, msg: format!("unterminated section header `{s}`") })?
                .trim();
            if !(name == "stepper" || name == "data" || name.starts_with("preset.")) {
                return Err(CliError::Config { line, msg: format!("unknown section `{name}`") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config { line, msg: format!("expected `key = value`, got `{s}`") })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Config { line, msg: "empty key or value".into() });
        }
        let (scope, key) = match section.as_deref() {
            None => (None, k.to_string()),
            Some(p) if p.starts_with("preset.") => (Some(p["preset.".len()..].to_string()), k.to_string()),
            Some(sec) => (None, format!("{sec}.{k}")),
        };
        out.push(Entry { line, scope, key, value: v.to_string() });
    }
    Ok(out)
}

fn num(e: &Entry) -> Result<f64, CliError> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Config { line: e.line, msg: format!("`{}` is not a number", e.value) })
}

fn count(e: &Entry) -> Result<usize, CliError> {
    e.value.parse::<usize>().map_err(|_| CliError::Config { line: e.line, msg: format!("`{}` is not a count", e.value) })
}

fn flag(e: &Entry) -> Result<bool, CliError> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(CliError::Config { line: e.line, msg: format!("`{v}` is not a boolean") }),
    }
}

impl Overrides {
    /// Parse a config file. Scoped sections apply only when the preset
    /// they name is the one selected (by the file or by `cli_preset`).
    pub fn parse(text: &str, cli_preset: Option<&str>) -> Result<Self, CliError> {
        let entries = parse_entries(text)?;
        let mut o = Overrides::default();
        for e in entries.iter().filter(|e| e.scope.is_none()) {
            o.apply(e)?;
        }
        let chosen = cli_preset.map(str::to_string).or_else(|| o.preset.clone());
        for e in entries.iter().filter(|e| e.scope.is_some()) {
            if e.key == "preset" {
                return Err(CliError::Config { line: e.line, msg: "`preset` cannot be set inside a preset section".into() });
            }
            if e.scope == chosen {
                o.apply(e)?;
            }
        }
        Ok(o)
    }

    fn apply(&mut self, e: &Entry) -> Result<(), CliError> {
        match e.key.as_str() {
            "preset" => self.preset = Some(e.value.clone()),
            "scheme" => self.scheme = Some(e.value.clone()),
            "level" => self.level = Some(count(e)?),
            "out" => self.out = Some(PathBuf::from(&e.value)),
            "force_peclet" => self.force_peclet = Some(flag(e)?),
            "peclet_beta" => self.peclet_beta = Some(num(e)?),
            "stepper.dt" => self.dt = Some(num(e)?),
            "stepper.dt0" => self.dt0 = Some(num(e)?),
            "stepper.dt_min" => self.dt_min = Some(num(e)?),
            "stepper.dt_max" => self.dt_max = Some(num(e)?),
            "stepper.final_time" => self.final_time = Some(num(e)?),
            "stepper.entropy_floor" => {
                self.entropy_floor = Some(if e.value == "none" { None } else { Some(num(e)?) });
            }
            "stepper.newton_tolerance" => self.newton_tolerance = Some(num(e)?),
            "stepper.newton_iterations" => self.newton_iterations = Some(count(e)?),
            "data.m" => self.m = Some(num(e)?),
            "data.m_d" => self.m_d = Some(num(e)?),
            "data.lambda" => self.lambda = Some(num(e)?),
            "data.bias" => self.bias = Some(num(e)?),
            "data.a_drain" => self.a_drain = Some(num(e)?),
            "data.a_barrier" => self.a_barrier = Some(num(e)?),
            other => return Err(CliError::Config { line: e.line, msg: format!("unknown key `{other}`") }),
        }
        Ok(())
    }

    /// Later values win: `self` is the base, `other` the override.
    pub fn merge(mut self, other: Overrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            preset, scheme, level, out, force_peclet, peclet_beta, dt, dt0, dt_min, dt_max, final_time, entropy_floor,
            newton_tolerance, newton_iterations, m, m_d, lambda, bias, a_drain, a_barrier
        );
        self
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let name = self.preset.as_deref().ok_or_else(|| CliError::Usage("no preset selected".into()))?;
        let preset = find_preset(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
        let scheme_name = self.scheme.as_deref().unwrap_or("sg");
        let scheme = BScheme::parse(scheme_name)
            .ok_or_else(|| CliError::Usage(format!("unknown scheme `{scheme_name}` (upwind, centered, sg)")))?;
        let level = self.level.unwrap_or(preset.level);
        if level > 4 {
            return Err(CliError::Usage(format!("level {level} outside the supported range 0..=4")));
        }
        let d = preset.params;
        let params = Params {
            m: self.m.unwrap_or(d.m),
            m_d: self.m_d.unwrap_or(d.m_d),
            lambda: self.lambda.unwrap_or(d.lambda),
            bias: self.bias.unwrap_or(d.bias),
            a_drain: self.a_drain.unwrap_or(d.a_drain),
            a_barrier: self.a_barrier.unwrap_or(d.a_barrier),
        };
        let final_time = self.final_time.unwrap_or(preset.final_time);
        let mut stepper = match self.dt.or(preset.dt) {
            Some(dt) => StepperConfig::fixed(dt, final_time),
            None => StepperConfig::default().with_final_time(final_time),
        };
        if let Some(v) = self.dt0 {
            stepper.dt0 = v;
        }
        if let Some(v) = self.dt_min {
            stepper.dt_min = v;
        }
        if let Some(v) = self.dt_max {
            stepper.dt_max = v;
        }
        if let Some(v) = self.entropy_floor {
            stepper.entropy_floor = v;
        }
        if let Some(v) = self.newton_tolerance {
            stepper.newton.tolerance = v;
        }
        if let Some(v) = self.newton_iterations {
            stepper.newton.max_iterations = v;
        }
        stepper.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let policy = PecletPolicy {
            beta: self.peclet_beta.unwrap_or(PecletPolicy::default().beta),
            force: self.force_peclet.unwrap_or(false),
        };
        Ok(RunConfig {
            preset,
            scheme,
            level,
            params,
            stepper,
            policy,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            sweep_pinned: self.m.is_some() || self.m_d.is_some(),
        })
    }
}
