//! Test functions with known Lipschitz constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval of regressor values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputRange {
    pub lo: f64,
    pub hi: f64,
}

impl InputRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "input range [{lo}, {hi}] must be a nondegenerate finite interval"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    /// `amplitude * sin(frequency * phi)`, frequency in radians per unit.
    Sine { amplitude: f64, frequency: f64 },
    /// `atan(scale * phi)`.
    Atan { scale: f64 },
    /// Linear interpolation through `(phi, f)` knots, constant beyond the ends.
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
}

impl FunctionKind {
    pub fn eval(&self, phi: f64) -> f64 {
        match self {
            Self::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * phi).sin(),
            Self::Atan { scale } => (scale * phi).atan(),
            Self::PiecewiseLinear { breakpoints } => {
                let (first, last) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
                if phi <= first.0 {
                    return first.1;
                }
                if phi >= last.0 {
                    return last.1;
                }
                let seg = breakpoints.partition_point(|&(p, _)| p <= phi);
                let (x0, y0) = breakpoints[seg - 1];
                let (x1, y1) = breakpoints[seg];
                y0 + (y1 - y0) * (phi - x0) / (x1 - x0)
            }
        }
    }

    /// Smallest valid Lipschitz constant on the real line.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Sine {
                amplitude,
                frequency,
            } => (amplitude * frequency).abs(),
            Self::Atan { scale } => scale.abs(),
            Self::PiecewiseLinear { breakpoints } => breakpoints
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{what} must be finite")))
            }
        };
        match self {
            Self::Sine {
                amplitude,
                frequency,
            } => {
                finite(*amplitude, "amplitude")?;
                finite(*frequency, "frequency")
            }
            Self::Atan { scale } => finite(*scale, "scale"),
            Self::PiecewiseLinear { breakpoints } => {
                if breakpoints.len() < 2 {
                    return Err(Error::InvalidConfig(
                        "piecewise linear function needs at least two breakpoints".into(),
                    ));
                }
                for &(p, v) in breakpoints {
                    finite(p, "breakpoint")?;
                    finite(v, "breakpoint value")?;
                }
                if breakpoints.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidConfig(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// A test function paired with a Lipschitz constant certified on an input range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSpec {
    kind: FunctionKind,
    l1: f64,
}

const SCAN_POINTS: usize = 100_000;
const SCAN_SLACK: f64 = 1e-9;

impl FunctionSpec {
    /// Uses the analytic Lipschitz constant of `kind`.
    pub fn new(kind: FunctionKind, range: InputRange) -> Result<Self> {
        kind.validate()?;
        let l1 = kind.lipschitz();
        Self::with_lipschitz(kind, l1, range)
    }

    /// Uses a caller-supplied constant, rejected if a dense difference-quotient
    /// scan over `range` exceeds it.
    pub fn with_lipschitz(kind: FunctionKind, l1: f64, range: InputRange) -> Result<Self> {
        kind.validate()?;
        if !(l1.is_finite() && l1 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Lipschitz constant must be positive and finite, got {l1} (constant functions are not supported)"
            )));
        }
        let steepest = max_difference_quotient(&kind, range);
        if steepest > l1 + SCAN_SLACK {
            return Err(Error::InvalidConfig(format!(
                "Lipschitz constant {l1} is violated on [{}, {}]: slope {steepest} observed",
                range.lo, range.hi
            )));
        }
        Ok(Self { kind, l1 })
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.kind.eval(phi)
    }
}

/// `max |f(p_{i+1}) - f(p_i)| / h` over an evenly spaced scan.
pub fn max_difference_quotient(kind: &FunctionKind, range: InputRange) -> f64 {
    let h = range.width() / SCAN_POINTS as f64;
    let mut prev = kind.eval(range.lo);
    let mut steepest = 0.0f64;
    for i in 1..=SCAN_POINTS {
        let p = if i == SCAN_POINTS {
            range.hi
        } else {
            range.lo + i as f64 * h
        };
        let v = kind.eval(p);
        steepest = steepest.max((v - prev).abs() / h);
        prev = v;
    }
    steepest
}
