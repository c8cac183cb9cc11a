//! Concave non-decreasing gauges `ω: [0, ∞) → [0, ∞)` with `ω(0) = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConcaveGauge {
    /// `coeff · t^exponent`, `0 < exponent ≤ 1`.
    Power { coeff: f64, exponent: f64 },
    /// `min{t, lambda}`.
    Truncation { lambda: f64 },
    /// `scale · (1 − e^(−t/lambda))`.
    Saturating { scale: f64, lambda: f64 },
    /// `min{first(t), offset + second(t)}`, `offset ≥ 0`.
    Capped {
        first: Box<ConcaveGauge>,
        offset: f64,
        second: Box<ConcaveGauge>,
    },
    /// `min{first(t), second(t)}`.
    Min {
        first: Box<ConcaveGauge>,
        second: Box<ConcaveGauge>,
    },
    /// Piecewise-linear interpolant through `(t, ω(t))` breakpoints starting
    /// at `(0, 0)`, extended past the last breakpoint with the last slope.
    Piecewise { breakpoints: Vec<(f64, f64)> },
}

impl fmt::Display for ConcaveGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcaveGauge::Power { coeff, exponent } => write!(f, "{coeff}*t^{exponent}"),
            ConcaveGauge::Truncation { lambda } => write!(f, "min(t,{lambda})"),
            ConcaveGauge::Saturating { scale, lambda } => {
                write!(f, "{scale}*(1-exp(-t/{lambda}))")
            }
            ConcaveGauge::Capped {
                first,
                offset,
                second,
            } => write!(f, "min({first},{offset}+{second})"),
            ConcaveGauge::Min { first, second } => write!(f, "min({first},{second})"),
            ConcaveGauge::Piecewise { breakpoints } => {
                write!(f, "pwl[{} breakpoints]", breakpoints.len())
            }
        }
    }
}

impl ConcaveGauge {
    pub fn identity() -> Self {
        ConcaveGauge::Power {
            coeff: 1.0,
            exponent: 1.0,
        }
    }

    pub fn power(exponent: f64) -> Self {
        ConcaveGauge::Power {
            coeff: 1.0,
            exponent,
        }
    }

    pub fn linear(slope: f64) -> Self {
        ConcaveGauge::Power {
            coeff: slope,
            exponent: 1.0,
        }
    }

    pub fn truncation(lambda: f64) -> Self {
        ConcaveGauge::Truncation { lambda }
    }

    pub fn capped(first: ConcaveGauge, offset: f64, second: ConcaveGauge) -> Self {
        ConcaveGauge::Capped {
            first: Box::new(first),
            offset,
            second: Box::new(second),
        }
    }

    pub fn min(first: ConcaveGauge, second: ConcaveGauge) -> Self {
        ConcaveGauge::Min {
            first: Box::new(first),
            second: Box::new(second),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ConcaveGauge::Power { coeff, exponent } => {
                if *exponent == 1.0 {
                    coeff * t
                } else {
                    coeff * t.powf(*exponent)
                }
            }
            ConcaveGauge::Truncation { lambda } => t.min(*lambda),
            ConcaveGauge::Saturating { scale, lambda } => scale * -(-t / lambda).exp_m1(),
            ConcaveGauge::Capped {
                first,
                offset,
                second,
            } => first.eval(t).min(offset + second.eval(t)),
            ConcaveGauge::Min { first, second } => first.eval(t).min(second.eval(t)),
            ConcaveGauge::Piecewise { breakpoints } => eval_piecewise(breakpoints, t),
        }
    }

    /// Checks `ω(0) = 0`, positivity, monotonicity and concavity. Closed forms
    /// are checked on their parameters; piecewise gauges on their breakpoints.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(format!("gauge {self}: {msg}")));
        match self {
            ConcaveGauge::Power { coeff, exponent } => {
                if !(*coeff > 0.0 && coeff.is_finite()) {
                    return bad(format!("coefficient {coeff} must be positive (positivity)"));
                }
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return bad(format!("exponent {exponent} outside (0,1] (concavity)"));
                }
            }
            ConcaveGauge::Truncation { lambda } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return bad(format!("lambda {lambda} must be positive (positivity)"));
                }
            }
            ConcaveGauge::Saturating { scale, lambda } => {
                if !(*scale > 0.0 && *lambda > 0.0 && scale.is_finite() && lambda.is_finite()) {
                    return bad("scale and lambda must be positive (positivity)".into());
                }
            }
            ConcaveGauge::Capped {
                first,
                offset,
                second,
            } => {
                first.validate()?;
                second.validate()?;
                if !(*offset >= 0.0 && offset.is_finite()) {
                    return bad(format!("offset {offset} must be nonnegative (vanishing at 0)"));
                }
            }
            ConcaveGauge::Min { first, second } => {
                first.validate()?;
                second.validate()?;
            }
            ConcaveGauge::Piecewise { breakpoints } => validate_piecewise(breakpoints)
                .or_else(|msg| bad(msg))?,
        }
        Ok(())
    }
}

fn eval_piecewise(bp: &[(f64, f64)], t: f64) -> f64 {
    match bp.iter().position(|&(x, _)| x >= t) {
        Some(0) => bp[0].1,
        Some(k) => {
            let (x0, y0) = bp[k - 1];
            let (x1, y1) = bp[k];
            y0 + (y1 - y0) * (t - x0) / (x1 - x0)
        }
        None => {
            let (x1, y1) = bp[bp.len() - 1];
            let (x0, y0) = bp[bp.len() - 2];
            y1 + (y1 - y0) / (x1 - x0) * (t - x1)
        }
    }
}

fn validate_piecewise(bp: &[(f64, f64)]) -> Result<(), String> {
    if bp.len() < 2 {
        return Err("need at least two breakpoints".into());
    }
    if bp[0] != (0.0, 0.0) {
        return Err("first breakpoint must be (0,0) (vanishing at 0)".into());
    }
    if bp.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err("breakpoints must be finite".into());
    }
    let mut last_slope = f64::INFINITY;
    for w in bp.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x1 <= x0 {
            return Err(format!("abscissae not increasing at {x1}"));
        }
        if y1 <= 0.0 {
            return Err(format!("value {y1} at t={x1} not positive (positivity)"));
        }
        let slope = (y1 - y0) / (x1 - x0);
        if slope < 0.0 {
            return Err(format!("decreasing on [{x0},{x1}] (monotonicity)"));
        }
        if slope > last_slope + 1e-12 {
            return Err(format!("slope increases at t={x0} (concavity)"));
        }
        last_slope = slope;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(ConcaveGauge::power(0.5).eval(4.0), 2.0);
        assert_eq!(ConcaveGauge::truncation(2.0).eval(3.0), 2.0);
        assert_eq!(ConcaveGauge::identity().eval(3.25), 3.25);
        let sat = ConcaveGauge::Saturating {
            scale: 2.0,
            lambda: 1.0,
        };
        assert!((sat.eval(1.0) - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let capped = ConcaveGauge::capped(ConcaveGauge::power(0.5), 1.0, ConcaveGauge::linear(0.1));
        assert_eq!(capped.eval(100.0), 10.0f64.min(11.0));
        assert_eq!(capped.eval(0.0), 0.0);
    }

    #[test]
    fn piecewise_eval_and_extension() {
        let g = ConcaveGauge::Piecewise {
            breakpoints: vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)],
        };
        g.validate().unwrap();
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(2.0), 2.5);
        assert_eq!(g.eval(5.0), 4.0);
    }

    #[test]
    fn invalid_gauges_name_property() {
        let convex = ConcaveGauge::Piecewise {
            breakpoints: vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)],
        };
        let err = convex.validate().unwrap_err().to_string();
        assert!(err.contains("concavity"), "{err}");
        let decreasing = ConcaveGauge::Piecewise {
            breakpoints: vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)],
        };
        assert!(decreasing.validate().unwrap_err().to_string().contains("monotonicity"));
        let not_zero = ConcaveGauge::Piecewise {
            breakpoints: vec![(0.0, 1.0), (1.0, 2.0)],
        };
        assert!(not_zero.validate().unwrap_err().to_string().contains("vanishing"));
        assert!(ConcaveGauge::power(1.5).validate().is_err());
        assert!(ConcaveGauge::truncation(0.0).validate().is_err());
    }
}
