/// Convex generator of a relative φ-entropy, normalised by
/// `φ(1) = φ'(1) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiFunction {
    /// `x ln x - (x - 1)`, extended by continuity to `φ(0) = 1`.
    Boltzmann,
    /// `(x^p - p x)/(p - 1) + 1` for `p ∈ (1, 2]`.
    Power(f64),
}

impl PhiFunction {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            PhiFunction::Boltzmann => {
                if x == 0.0 {
                    1.0
                } else {
                    x * x.ln() - (x - 1.0)
                }
            }
            PhiFunction::Power(p) => (x.powf(p) - p * x) / (p - 1.0) + 1.0,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            PhiFunction::Boltzmann => x.ln(),
            PhiFunction::Power(p) => p * (x.powf(p - 1.0) - 1.0) / (p - 1.0),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            PhiFunction::Boltzmann => 1.0 / x,
            PhiFunction::Power(p) => p * x.powf(p - 2.0),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            PhiFunction::Boltzmann => "phi1".into(),
            PhiFunction::Power(p) => format!("phi{p}"),
        }
    }

    /// `sφ'(s) - φ(s)`
    fn conjugate(&self, s: f64) -> f64 {
        s * self.derivative(s) - self.value(s)
    }
}

/// `(ϕ(s) - ϕ(t)) / (φ'(s) - φ'(t))` with `ϕ(s) = sφ'(s) - φ(s)`; equals `s`
/// on the diagonal.
pub fn phi_mean(phi: PhiFunction, s: f64, t: f64) -> f64 {
    let den = phi.derivative(s) - phi.derivative(t);
    if s == t || den == 0.0 {
        return s;
    }
    (phi.conjugate(s) - phi.conjugate(t)) / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation() {
        for phi in [PhiFunction::Boltzmann, PhiFunction::Power(2.0), PhiFunction::Power(1.5)] {
            assert!(phi.value(1.0).abs() < 1e-15);
            assert!(phi.derivative(1.0).abs() < 1e-15);
            for x in [0.1, 0.5, 2.0, 7.0] {
                assert!(phi.second_derivative(x) > 0.0);
            }
        }
        assert_eq!(PhiFunction::Boltzmann.value(0.0), 1.0);
        assert_eq!(PhiFunction::Power(2.0).value(2.0), 1.0);
        assert_eq!(PhiFunction::Power(2.0).value(0.0), 1.0);
    }

    #[test]
    fn power_two_mean_is_arithmetic() {
        // ϕ(s) = s², φ'(s) = 2(s - 1)
        assert!((phi_mean(PhiFunction::Power(2.0), 1.0, 3.0) - 2.0).abs() < 1e-15);
        // Boltzmann: (s - t)/(ln s - ln t), the logarithmic mean
        let lm = (3.0 - 1.0) / 3f64.ln();
        assert!((phi_mean(PhiFunction::Boltzmann, 1.0, 3.0) - lm).abs() < 1e-15);
        assert_eq!(phi_mean(PhiFunction::Boltzmann, 2.5, 2.5), 2.5);
    }
}
