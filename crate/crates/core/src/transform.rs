//! Pointwise metric transforms and the chain metrization of a
//! quasi-metric.

use serde::{Deserialize, Serialize};

use crate::apsp::floyd_warshall;
use crate::error::{Error, Result};
use crate::gauge::ConcaveGauge;
use crate::metric::{pairs, FiniteMetricSpace, SemiMetric, METRIC_TOL};

/// `min{d(x, y), lambda}`.
pub fn truncate(space: &FiniteMetricSpace, lambda: f64) -> Result<FiniteMetricSpace> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("truncation level {lambda} must be positive")));
    }
    let dist = space.flat().iter().map(|&v| v.min(lambda)).collect();
    Ok(FiniteMetricSpace::from_trusted(
        space.labels().to_vec(),
        space.len(),
        dist,
    ))
}

/// `ω(d(x, y))` for a concave gauge `ω`. Concave non-decreasing functions
/// vanishing at zero are subadditive, so the result is again a metric.
pub fn apply_concave(space: &FiniteMetricSpace, gauge: &ConcaveGauge) -> Result<FiniteMetricSpace> {
    gauge.validate()?;
    let dist = space.flat().iter().map(|&v| gauge.eval(v)).collect();
    // piecewise gauges are only checked on their breakpoints
    FiniteMetricSpace::from_flat(space.labels().to_vec(), space.len(), dist)
}

/// The `alpha`-snowflake `d^alpha`.
pub fn snowflake(space: &FiniteMetricSpace, alpha: f64) -> Result<FiniteMetricSpace> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("snowflake exponent {alpha} outside (0,1]")));
    }
    apply_concave(space, &ConcaveGauge::power(alpha))
}

/// Pointwise minimum `h = min{d0, d1}` of two metrics on the same labels.
pub fn min_of_metrics(d0: &FiniteMetricSpace, d1: &FiniteMetricSpace) -> Result<SemiMetric> {
    if d0.labels() != d1.labels() {
        return Err(Error::Structural("metrics are defined on different labels".into()));
    }
    let dist = d0
        .flat()
        .iter()
        .zip(d1.flat())
        .map(|(a, b)| a.min(*b))
        .collect();
    SemiMetric::from_flat(d0.labels().to_vec(), d0.len(), dist)
}

/// Smallest `K` with `h(x,y) ≤ K (h(x,z) + h(z,y))` on all triples.
///
/// Spaces with fewer than three points return `1/2`.
pub fn quasi_triangle_constant(h: &SemiMetric) -> f64 {
    h.quasi_triangle_constant()
}

pub(crate) fn quasi_constant_flat(n: usize, d: &[f64]) -> f64 {
    let mut k = 0.5f64;
    for (x, y) in pairs(n) {
        let hxy = d[x * n + y];
        for z in 0..n {
            if z == x || z == y {
                continue;
            }
            let ratio = hxy / (d[x * n + z] + d[z * n + y]);
            if ratio > k {
                k = ratio;
            }
        }
    }
    k
}

/// Exponent `β` with `2^(1/β) = 2K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KprExponent {
    pub beta: f64,
    /// `K < 1` would force `β > 1`; `β` was clamped to 1.
    pub clamped: bool,
}

pub fn kpr_exponent(k: f64) -> KprExponent {
    if k <= 1.0 {
        KprExponent {
            beta: 1.0,
            clamped: k < 1.0,
        }
    } else {
        KprExponent {
            beta: 1.0 / (2.0 * k).log2(),
            clamped: false,
        }
    }
}

/// Chain metric `γ(x,y) = min over chains of Σ h(z_i, z_{i+1})^β`.
pub fn kpr_chain_metric(h: &SemiMetric, beta: f64) -> Result<FiniteMetricSpace> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("chain exponent {beta} outside (0,1]")));
    }
    let n = h.len();
    let mut w: Vec<f64> = h.flat().iter().map(|v| v.powf(beta)).collect();
    floyd_warshall(n, &mut w);
    Ok(FiniteMetricSpace::from_trusted(h.labels().to_vec(), n, w))
}

/// Result of metrizing a quasi-metric by powers and chains.
#[derive(Clone, Debug)]
pub struct KprMetrization {
    pub quasi_constant: f64,
    pub exponent: KprExponent,
    pub gamma: FiniteMetricSpace,
    /// Pairs where `γ < h^β / 4`. Expected empty; kept for inspection.
    pub lower_violations: Vec<(usize, usize)>,
    /// Pairs where `γ > h^β`.
    pub upper_violations: Vec<(usize, usize)>,
    /// `min γ / h^β` over distinct pairs.
    pub worst_lower_ratio: f64,
}

impl KprMetrization {
    pub fn bounds_hold(&self) -> bool {
        self.lower_violations.is_empty() && self.upper_violations.is_empty()
    }
}

/// Picks `β` from the instance's quasi-triangle constant, builds the chain
/// metric and checks `h^β / 4 ≤ γ ≤ h^β` pair by pair.
pub fn kpr_metrize(h: &SemiMetric) -> Result<KprMetrization> {
    let quasi_constant = h.quasi_triangle_constant();
    let exponent = kpr_exponent(quasi_constant);
    let gamma = kpr_chain_metric(h, exponent.beta)?;
    let mut lower_violations = Vec::new();
    let mut upper_violations = Vec::new();
    let mut worst_lower_ratio = f64::INFINITY;
    for (i, j) in pairs(h.len()) {
        let hb = h.d(i, j).powf(exponent.beta);
        let g = gamma.d(i, j);
        worst_lower_ratio = worst_lower_ratio.min(g / hb);
        if g < 0.25 * hb - METRIC_TOL {
            lower_violations.push((i, j));
        }
        if g > hb + METRIC_TOL {
            upper_violations.push((i, j));
        }
    }
    Ok(KprMetrization {
        quasi_constant,
        exponent,
        gamma,
        lower_violations,
        upper_violations,
        worst_lower_ratio,
    })
}
