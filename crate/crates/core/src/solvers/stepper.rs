use crate::linalg::NewtonConfig;

use super::SolverError;

/// Backward Euler time-step policy: start at `dt0`, double after every
/// accepted step up to `dt_max`, halve after every failed attempt and give
/// up below `dt_min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub grow: f64,
    pub shrink: f64,
    pub final_time: f64,
    pub newton: NewtonConfig,
    /// Stop once the primary entropy falls below this fraction of its
    /// initial value; `None` runs to `final_time`.
    pub entropy_floor: Option<f64>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt0: 1e-3,
            dt_min: 1e-8,
            dt_max: 1e-2,
            grow: 2.0,
            shrink: 2.0,
            final_time: 1.0,
            newton: NewtonConfig::default(),
            entropy_floor: Some(1e-14),
        }
    }
}

impl StepperConfig {
    /// Constant step `dt` (halving still applies on failure).
    pub fn fixed(dt: f64, final_time: f64) -> Self {
        StepperConfig { dt0: dt, dt_max: dt, dt_min: dt.min(1e-8), final_time, ..Self::default() }
    }

    pub fn with_final_time(mut self, t: f64) -> Self {
        self.final_time = t;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.dt_min > 0.0
            && self.dt_min <= self.dt0
            && self.dt0 <= self.dt_max
            && self.grow > 1.0
            && self.shrink > 1.0
            && self.final_time > 0.0
            && self.newton.is_valid();
        if ok {
            Ok(())
        } else {
            Err(SolverError::Config(format!("{self:?}")))
        }
    }
}

/// Result of one attempted time step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome<S> {
    Accepted(S),
    Rejected(String),
}

/// A time-dependent problem advanced by an implicit one-step method.
pub trait Evolution {
    type State: Clone;

    fn step(&mut self, state: &Self::State, dt: f64) -> Result<StepOutcome<Self::State>, SolverError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary<S> {
    pub state: S,
    pub time: f64,
    pub steps: usize,
    pub rejections: usize,
    /// Set when the step size fell below `dt_min`; the run stopped early
    /// with everything accepted so far recorded.
    pub aborted: Option<String>,
}

/// Drive `evo` from `initial` under `cfg`. The observer sees every accepted
/// state as `(t, dt, previous, new)` (with `previous = None` at `t = 0`) and
/// returns the primary entropy used by the stopping floor.
pub fn run_transient<E, O>(evo: &mut E, initial: E::State, cfg: &StepperConfig, mut observe: O) -> Result<RunSummary<E::State>, SolverError>
where
    E: Evolution,
    O: FnMut(f64, f64, Option<&E::State>, &E::State) -> Result<f64, SolverError>,
{
    cfg.validate()?;
    let h0 = observe(0.0, 0.0, None, &initial)?;
    let floor = cfg.entropy_floor.map(|r| r * h0);
    let mut state = initial;
    let (mut t, mut steps, mut rejections) = (0.0, 0usize, 0usize);
    let mut prev_dt: Option<f64> = None;
    let end = cfg.final_time * (1.0 - 1e-12);
    if floor.is_some_and(|f| h0 <= f) {
        return Ok(RunSummary { state, time: t, steps, rejections, aborted: None });
    }
    while t < end {
        let mut dt = match prev_dt {
            None => cfg.dt0,
            Some(p) => (p * cfg.grow).clamp(cfg.dt_min, cfg.dt_max),
        };
        let next = loop {
            match evo.step(&state, dt)? {
                StepOutcome::Accepted(s) => break Some(s),
                StepOutcome::Rejected(why) => {
                    rejections += 1;
                    dt /= cfg.shrink;
                    if dt < cfg.dt_min {
                        let msg = format!("step size below {:e} at t = {t:e}: {why}", cfg.dt_min);
                        return Ok(RunSummary { state, time: t, steps, rejections, aborted: Some(msg) });
                    }
                }
            }
        };
        let next = next.expect("loop breaks with a state");
        t += dt;
        steps += 1;
        prev_dt = Some(dt);
        let h = observe(t, dt, Some(&state), &next)?;
        state = next;
        if floor.is_some_and(|f| h < f) {
            break;
        }
    }
    Ok(RunSummary { state, time: t, steps, rejections, aborted: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y' = -y` by backward Euler, failing on the first `fail` attempts.
    struct Decay {
        fail: usize,
    }

    impl Evolution for Decay {
        type State = f64;
        fn step(&mut self, y: &f64, dt: f64) -> Result<StepOutcome<f64>, SolverError> {
            if self.fail > 0 {
                self.fail -= 1;
                return Ok(StepOutcome::Rejected("forced".into()));
            }
            Ok(StepOutcome::Accepted(y / (1.0 + dt)))
        }
    }

    fn dts(fail: usize, cfg: &StepperConfig) -> (Vec<f64>, RunSummary<f64>) {
        let mut seen = Vec::new();
        let s = run_transient(&mut Decay { fail }, 1.0, cfg, |_, dt, prev, y| {
            if prev.is_some() {
                seen.push(dt);
            }
            Ok(*y)
        })
        .unwrap();
        (seen, s)
    }

    #[test]
    fn growth_sequence() {
        let cfg = StepperConfig { final_time: 0.05, entropy_floor: None, ..StepperConfig::default() };
        let (seen, s) = dts(0, &cfg);
        let expect: Vec<f64> = (0..seen.len()).map(|n| (1e-3 * 2f64.powi(n as i32)).min(1e-2)).collect();
        assert_eq!(seen, expect);
        assert_eq!(s.rejections, 0);
        assert!(s.time >= 0.05 * (1.0 - 1e-12));
    }

    #[test]
    fn first_failure_halves_once() {
        let cfg = StepperConfig { final_time: 0.01, entropy_floor: None, ..StepperConfig::default() };
        let (seen, s) = dts(1, &cfg);
        assert_eq!(seen[0], 5e-4);
        assert_eq!(seen[1], 1e-3);
        assert_eq!(s.rejections, 1);
    }

    #[test]
    fn abort_below_minimum() {
        let cfg = StepperConfig { final_time: 1.0, ..StepperConfig::default() };
        let (seen, s) = dts(usize::MAX, &cfg);
        assert!(seen.is_empty());
        assert!(s.aborted.is_some());
        assert_eq!(s.steps, 0);
    }

    #[test]
    fn entropy_floor_stops_early() {
        let cfg = StepperConfig { final_time: 1e6, entropy_floor: Some(1e-3), ..StepperConfig::fixed(1.0, 1e6) };
        let (_, s) = dts(0, &cfg);
        assert!(s.state < 1e-3 && s.state * 2.0 >= 1e-3);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = StepperConfig { dt0: 1.0, dt_max: 0.1, ..StepperConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
