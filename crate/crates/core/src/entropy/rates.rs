use super::EntropyError;

const MIN_FIT_SAMPLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    /// Intercept of the log-linear fit, `log A`.
    pub log_amplitude: f64,
    /// Root mean square residual of the fit in log space.
    pub residual: f64,
    pub samples: usize,
}

/// Ordinary least squares of `log value` against `t` over `t ∈ [a, b]`;
/// the rate is the negated slope.
pub fn fit_decay_rate(t: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit, EntropyError> {
    let (a, b) = window;
    let mut pts = Vec::new();
    for (&ti, &vi) in t.iter().zip(values) {
        if ti < a || ti > b {
            continue;
        }
        if !(vi > 0.0) {
            return Err(EntropyError::NonPositiveSample { t: ti, value: vi });
        }
        pts.push((ti, vi.ln()));
    }
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(EntropyError::TooFewSamples { got: pts.len(), needed: MIN_FIT_SAMPLES });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit { rate: -slope, log_amplitude: intercept, residual: (ss / n).sqrt(), samples: pts.len() })
}

/// Guaranteed Fokker-Planck decay rate
/// `(1/k) log(1 + k ξ β α m∞ / (C_P M∞))` for time steps bounded by `k`.
pub fn theoretical_rate_fp(alpha: f64, m_inf: f64, big_m_inf: f64, beta: f64, xi: f64, c_p: f64, k: f64) -> f64 {
    (k * xi * beta * alpha * m_inf / (c_p * big_m_inf)).ln_1p() / k
}

/// Guaranteed porous medium decay rate `(1/k) log(1 + k ξ (m_D)^{m-1} / C_P)`.
pub fn theoretical_rate_pme(m_d: f64, m: f64, xi: f64, c_p: f64, k: f64) -> f64 {
    (k * xi * m_d.powf(m - 1.0) / c_p).ln_1p() / k
}

/// Poincaré constant of the unit square used when none is supplied.
pub const UNIT_SQUARE_POINCARE: f64 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
