//! Per-router load-to-cost functions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Cost charged to each packet crossing a router, as a function of the
/// router's windowed load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadToCost {
    /// `a + b * x`
    Affine { a: f64, b: f64 },
    /// `a + b * ln(1 + x)`
    AffineLog { a: f64, b: f64 },
    /// `b * x^p`
    Power { b: f64, p: f64 },
    /// Dummy routers: always 0.
    Zero,
}

impl LoadToCost {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        check_coeffs(a, b)?;
        Ok(LoadToCost::Affine { a, b })
    }

    pub fn affine_log(a: f64, b: f64) -> Result<Self> {
        check_coeffs(a, b)?;
        Ok(LoadToCost::AffineLog { a, b })
    }

    pub fn power(b: f64, p: f64) -> Result<Self> {
        check_coeffs(0.0, b)?;
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidCost(format!("exponent {p} must be >= 1")));
        }
        Ok(LoadToCost::Power { b, p })
    }

    pub fn eval(&self, load: f64) -> Result<f64> {
        if load < 0.0 || load.is_nan() {
            return Err(Error::NegativeLoad(load));
        }
        Ok(self.eval_unchecked(load))
    }

    /// Evaluates without the domain check. Callers guarantee `load >= 0`.
    #[inline]
    pub fn eval_unchecked(&self, load: f64) -> f64 {
        match *self {
            LoadToCost::Affine { a, b } => a + b * load,
            LoadToCost::AffineLog { a, b } => a + b * load.ln_1p(),
            LoadToCost::Power { b, p } => {
                if p == 2.0 {
                    b * load * load
                } else if p == 1.0 {
                    b * load
                } else {
                    b * load.powf(p)
                }
            }
            LoadToCost::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LoadToCost::Zero)
    }

    /// Multiplies every output by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            LoadToCost::Affine { a, b } => LoadToCost::Affine {
                a: a * factor,
                b: b * factor,
            },
            LoadToCost::AffineLog { a, b } => LoadToCost::AffineLog {
                a: a * factor,
                b: b * factor,
            },
            LoadToCost::Power { b, p } => LoadToCost::Power { b: b * factor, p },
            LoadToCost::Zero => LoadToCost::Zero,
        }
    }
}

fn check_coeffs(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidCost(format!(
            "coefficients must be finite and nonnegative (a={a}, b={b})"
        )));
    }
    Ok(())
}

/// Free-function form of [`LoadToCost::eval`].
pub fn eval_cost(spec: &LoadToCost, load: f64) -> Result<f64> {
    spec.eval(load)
}

impl fmt::Display for LoadToCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadToCost::Affine { a, b } => write!(f, "affine {a} {b}"),
            LoadToCost::AffineLog { a, b } => write!(f, "affine-log {a} {b}"),
            LoadToCost::Power { b, p } => write!(f, "power {b} {p}"),
            LoadToCost::Zero => write!(f, "zero"),
        }
    }
}

impl LoadToCost {
    /// Parses `form coeff...` tokens, e.g. `["affine", "50", "1"]`.
    pub fn from_tokens(tokens: &[&str]) -> Result<Self> {
        let (form, rest) = tokens
            .split_first()
            .ok_or_else(|| Error::InvalidCost("empty cost spec".into()))?;
        let nums = rest
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::InvalidCost(format!("bad coefficient `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let want = |n: usize| -> Result<()> {
            if nums.len() != n {
                return Err(Error::InvalidCost(format!(
                    "`{form}` takes {n} coefficients, got {}",
                    nums.len()
                )));
            }
            Ok(())
        };
        match *form {
            "affine" => {
                want(2)?;
                LoadToCost::affine(nums[0], nums[1])
            }
            "affine-log" => {
                want(2)?;
                LoadToCost::affine_log(nums[0], nums[1])
            }
            "power" => {
                want(2)?;
                LoadToCost::power(nums[0], nums[1])
            }
            "zero" => {
                want(0)?;
                Ok(LoadToCost::Zero)
            }
            other => Err(Error::InvalidCost(format!("unknown form `{other}`"))),
        }
    }
}

impl FromStr for LoadToCost {
    type Err = Error;

    /// Accepts `affine:50,1`, `power:1,2`, `zero` as well as whitespace
    /// separated `affine 50 1`.
    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.replace([':', ','], " ");
        let tokens: Vec<&str> = normalized.split_whitespace().collect();
        LoadToCost::from_tokens(&tokens)
    }
}
