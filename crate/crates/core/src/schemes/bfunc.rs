use std::fmt;
use std::sync::Arc;

use super::SchemeError;

/// Below this |x| the Scharfetter-Gummel function uses its Taylor series.
const SG_SERIES_CUTOFF: f64 = 1e-5;
const SG_DERIVATIVE_SERIES_CUTOFF: f64 = 1e-3;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied B-function together with its derivative.
#[derive(Clone)]
pub struct CustomB {
    name: String,
    value: ScalarFn,
    derivative: ScalarFn,
}

impl CustomB {
    /// Accept `b` only if it passes the sampled identities `B(0) = 1` and
    /// `B(-x) - B(x) = x` on [-50, 50], and `db` agrees with a central
    /// difference of `b`.
    pub fn new<F, G>(name: &str, b: F, db: G) -> Result<Self, SchemeError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let bad = |msg: String| Err(SchemeError::InvalidB(format!("{name}: {msg}")));
        if (b(0.0) - 1.0).abs() > 1e-12 {
            return bad(format!("B(0) = {}", b(0.0)));
        }
        for i in 0..=1000 {
            let x = -50.0 + 0.1 * i as f64;
            let (bx, bmx) = (b(x), b(-x));
            if !bx.is_finite() || !bmx.is_finite() {
                return bad(format!("non-finite value at x = {x}"));
            }
            if ((bmx - bx) - x).abs() > 1e-12 * (1.0 + x.abs()) {
                return bad(format!("B(-x) - B(x) = {} at x = {x}", bmx - bx));
            }
            let h = 1e-6;
            let fd = (b(x + h) - b(x - h)) / (2.0 * h);
            if (fd - db(x)).abs() > 1e-4 * (1.0 + fd.abs()) {
                return bad(format!("derivative mismatch at x = {x}"));
            }
        }
        Ok(CustomB { name: name.to_string(), value: Arc::new(b), derivative: Arc::new(db) })
    }
}

impl fmt::Debug for CustomB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomB({})", self.name)
    }
}

/// The B-function of a two-point flux
/// `F = τ a (B(-x) f_K - B(x) f_L)` with `x = U d / a`.
#[derive(Clone, Debug)]
pub enum BScheme {
    Upwind,
    Centered,
    ScharfetterGummel,
    Custom(CustomB),
}

impl BScheme {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BScheme::Upwind => 1.0 + (-x).max(0.0),
            BScheme::Centered => 1.0 - x / 2.0,
            BScheme::ScharfetterGummel => bernoulli(x),
            BScheme::Custom(c) => (c.value)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            BScheme::Upwind => {
                if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            BScheme::Centered => -0.5,
            BScheme::ScharfetterGummel => bernoulli_derivative(x),
            BScheme::Custom(c) => (c.derivative)(x),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            BScheme::Upwind => "upwind",
            BScheme::Centered => "centered",
            BScheme::ScharfetterGummel => "sg",
            BScheme::Custom(c) => &c.name,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upwind" => Some(BScheme::Upwind),
            "centered" | "centred" => Some(BScheme::Centered),
            "sg" | "scharfetter-gummel" | "scharfetter_gummel" => Some(BScheme::ScharfetterGummel),
            _ => None,
        }
    }

    pub fn builtin() -> [BScheme; 3] {
        [BScheme::Upwind, BScheme::Centered, BScheme::ScharfetterGummel]
    }
}

impl PartialEq for BScheme {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

/// `x / (e^x - 1)`
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < SG_SERIES_CUTOFF {
        1.0 - x / 2.0 + x * x / 12.0
    } else {
        x / x.exp_m1()
    }
}

pub fn bernoulli_derivative(x: f64) -> f64 {
    if x.abs() < SG_DERIVATIVE_SERIES_CUTOFF {
        let x2 = x * x;
        -0.5 + x / 6.0 - x * x2 / 180.0 + x * x2 * x2 / 5040.0
    } else {
        bernoulli(x) * (1.0 / x + 1.0 / (-x).exp_m1())
    }
}
