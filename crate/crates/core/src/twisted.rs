//! Twisted unions `M × {0, 1}` of two metrics on the same finite set.
//!
//! The union carries the shortest-path metric of the complete weighted
//! graph whose edges inside layer `a` have weight `d_a(x, y)` and whose
//! rungs `(x, 0)-(x, 1)` have weight `r(x)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::apsp::floyd_warshall;
use crate::error::{Error, Result};
use crate::gauge::ConcaveGauge;
use crate::metric::{pairs, FiniteMetricSpace, MetricJson, METRIC_TOL};
use crate::transform::min_of_metrics;

/// Weight of the rung joining `(x, 0)` and `(x, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Joiner {
    Constant(f64),
    Values(Vec<f64>),
}

impl Joiner {
    pub fn is_constant(&self) -> bool {
        matches!(self, Joiner::Constant(_))
    }
}

/// Which copy of `M` a point of the union lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    Zero,
    One,
}

impl Layer {
    pub fn index(self) -> usize {
        match self {
            Layer::Zero => 0,
            Layer::One => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct TwistedUnionSpec {
    d0: FiniteMetricSpace,
    d1: FiniteMetricSpace,
    joiner: Joiner,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SpecJson {
    labels: Vec<String>,
    d0: Vec<Vec<f64>>,
    d1: Vec<Vec<f64>>,
    joiner: Joiner,
}

impl TryFrom<SpecJson> for TwistedUnionSpec {
    type Error = Error;

    fn try_from(v: SpecJson) -> Result<Self> {
        let d0 = FiniteMetricSpace::new(v.labels.clone(), v.d0)?;
        let d1 = FiniteMetricSpace::new(v.labels, v.d1)?;
        TwistedUnionSpec::new(d0, d1, v.joiner)
    }
}

impl From<TwistedUnionSpec> for SpecJson {
    fn from(s: TwistedUnionSpec) -> Self {
        SpecJson {
            labels: s.d0.labels().to_vec(),
            d0: s.d0.rows(),
            d1: s.d1.rows(),
            joiner: s.joiner,
        }
    }
}

impl TwistedUnionSpec {
    /// Checks labels and joiner positivity; the compatibility conditions
    /// are checked separately by [`check_compatibility`].
    pub fn new(d0: FiniteMetricSpace, d1: FiniteMetricSpace, joiner: Joiner) -> Result<Self> {
        if d0.labels() != d1.labels() {
            return Err(Error::Structural("d0 and d1 have different labels".into()));
        }
        match &joiner {
            Joiner::Constant(r) => {
                if !(*r > 0.0 && r.is_finite()) {
                    return Err(Error::Parameter(format!("joining parameter {r} must be positive")));
                }
            }
            Joiner::Values(v) => {
                if v.len() != d0.len() {
                    return Err(Error::Structural(format!(
                        "{} joiner values for {} points",
                        v.len(),
                        d0.len()
                    )));
                }
                if let Some(i) = v.iter().position(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::Parameter(format!(
                        "joiner value r({i}) = {} must be positive",
                        v[i]
                    )));
                }
            }
        }
        Ok(TwistedUnionSpec { d0, d1, joiner })
    }

    pub fn len(&self) -> usize {
        self.d0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        self.d0.labels()
    }

    pub fn d0(&self) -> &FiniteMetricSpace {
        &self.d0
    }

    pub fn d1(&self) -> &FiniteMetricSpace {
        &self.d1
    }

    pub fn joiner(&self) -> &Joiner {
        &self.joiner
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        match &self.joiner {
            Joiner::Constant(r) => *r,
            Joiner::Values(v) => v[i],
        }
    }

    /// `h(x, y) = min{d0(x, y), d1(x, y)}`.
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.d0.d(i, j).min(self.d1.d(i, j))
    }

    /// Restriction to the points at `indices` of `M`.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let joiner = match &self.joiner {
            Joiner::Constant(r) => Joiner::Constant(*r),
            Joiner::Values(v) => Joiner::Values(indices.iter().map(|&i| v[i]).collect()),
        };
        TwistedUnionSpec {
            d0: self.d0.subspace(indices),
            d1: self.d1.subspace(indices),
            joiner,
        }
    }

    /// Every length scaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let joiner = match &self.joiner {
            Joiner::Constant(r) => Joiner::Constant(r * c),
            Joiner::Values(v) => Joiner::Values(v.iter().map(|r| r * c).collect()),
        };
        TwistedUnionSpec::new(self.d0.scaled(c)?, self.d1.scaled(c)?, joiner)
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).unwrap_or_default();
        hex(&Sha256::digest(&json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `|d0 − d1| ≤ 2r`, constant joiner.
    ConstantGap,
    /// `|d0(x,y) − d1(x,y)| ≤ r(x) + r(y)`.
    JoinerGap,
    /// `|r(x) − r(y)| ≤ d0(x,y) + d1(x,y)`.
    JoinerVariation,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::ConstantGap => "|d0-d1| <= 2r",
            Condition::JoinerGap => "|d0-d1| <= r(x)+r(y)",
            Condition::JoinerVariation => "|r(x)-r(y)| <= d0+d1",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub satisfied: bool,
    /// Minimum of `rhs − lhs` over distinct pairs (`+∞` with fewer than two points).
    pub slack: f64,
    pub worst_pair: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub checks: Vec<ConditionCheck>,
}

impl CompatibilityReport {
    pub fn is_compatible(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

impl fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.checks.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(
                f,
                "{}: {} (slack {:.3e}",
                c.condition,
                if c.satisfied { "ok" } else { "FAIL" },
                c.slack
            )?;
            if let Some((i, j)) = c.worst_pair {
                write!(f, " at ({i},{j})")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn scan_condition(
    spec: &TwistedUnionSpec,
    condition: Condition,
    slack_at: impl Fn(usize, usize) -> f64,
) -> ConditionCheck {
    let mut slack = f64::INFINITY;
    let mut worst_pair = None;
    for (i, j) in pairs(spec.len()) {
        let s = slack_at(i, j);
        if s < slack {
            slack = s;
            worst_pair = Some((i, j));
        }
    }
    ConditionCheck {
        condition,
        satisfied: slack >= -METRIC_TOL,
        slack,
        worst_pair,
    }
}

/// Evaluates the conditions under which every edge of the union graph is a
/// geodesic, reporting the tightest pair of each.
pub fn check_compatibility(spec: &TwistedUnionSpec) -> CompatibilityReport {
    let gap = |i: usize, j: usize| (spec.d0.d(i, j) - spec.d1.d(i, j)).abs();
    let checks = match spec.joiner {
        Joiner::Constant(r) => vec![scan_condition(spec, Condition::ConstantGap, |i, j| {
            2.0 * r - gap(i, j)
        })],
        Joiner::Values(_) => vec![
            scan_condition(spec, Condition::JoinerGap, |i, j| {
                spec.r(i) + spec.r(j) - gap(i, j)
            }),
            scan_condition(spec, Condition::JoinerVariation, |i, j| {
                spec.d0.d(i, j) + spec.d1.d(i, j) - (spec.r(i) - spec.r(j)).abs()
            }),
        ],
    };
    CompatibilityReport { checks }
}

/// Smallest `L` with `|r(x) − r(y)| ≤ L · min{d0, d1}`; zero for a constant joiner.
pub fn lipschitz_constant_r(spec: &TwistedUnionSpec) -> f64 {
    if spec.joiner.is_constant() {
        return 0.0;
    }
    pairs(spec.len())
        .map(|(i, j)| (spec.r(i) - spec.r(j)).abs() / spec.h(i, j))
        .fold(0.0, f64::max)
}

/// Smallest `C` with `d1 ≤ C · d0`; zero when `M` has a single point.
pub fn domination_constant(spec: &TwistedUnionSpec) -> f64 {
    pairs(spec.len())
        .map(|(i, j)| spec.d1.d(i, j) / spec.d0.d(i, j))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Lipschitz constant of the joiner with respect to `min{d0, d1}`.
    pub lipschitz_l: f64,
    /// Minimal `C` with `d1 ≤ C d0`.
    pub domination_c: f64,
    /// Whether `min{d0, d1}` is itself a metric.
    pub metric_min: bool,
    /// Quasi-triangle constant of `min{d0, d1}`.
    pub min_quasi_constant: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedUnionSpace {
    spec: TwistedUnionSpec,
    metric: FiniteMetricSpace,
    constants: DerivedConstants,
}

impl TwistedUnionSpace {
    pub fn spec(&self) -> &TwistedUnionSpec {
        &self.spec
    }

    pub fn metric(&self) -> &FiniteMetricSpace {
        &self.metric
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    /// Size of `M`; the union has twice as many points.
    pub fn base_len(&self) -> usize {
        self.spec.len()
    }

    /// Index of `(x, layer)` in [`Self::metric`].
    #[inline]
    pub fn point(&self, x: usize, layer: Layer) -> usize {
        layer.index() * self.spec.len() + x
    }

    pub fn d(&self, x: usize, a: Layer, y: usize, b: Layer) -> f64 {
        self.metric.d(self.point(x, a), self.point(y, b))
    }

    /// `d((x,0),(y,1))`.
    pub fn cross(&self, x: usize, y: usize) -> f64 {
        self.d(x, Layer::Zero, y, Layer::One)
    }

    /// Metric JSON plus a provenance block.
    pub fn export(&self) -> SpaceExport {
        SpaceExport {
            metric: self.metric.clone().into(),
            provenance: Provenance {
                spec_hash: self.spec.content_hash(),
                derived_constants: self.constants.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    pub derived_constants: DerivedConstants,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceExport {
    #[serde(flatten)]
    pub metric: MetricJson,
    pub provenance: Provenance,
}

/// Materializes the complete weighted graph on `M × {0,1}` and closes it
/// under shortest paths. Refuses incompatible specs.
pub fn build_twisted_union(spec: &TwistedUnionSpec) -> Result<TwistedUnionSpace> {
    let report = check_compatibility(spec);
    if !report.is_compatible() {
        return Err(Error::Incompatible(Box::new(report)));
    }
    let n = spec.len();
    let size = 2 * n;
    let mut w = vec![f64::INFINITY; size * size];
    for x in 0..n {
        for y in 0..n {
            w[x * size + y] = spec.d0.d(x, y);
            w[(n + x) * size + n + y] = spec.d1.d(x, y);
        }
        w[x * size + n + x] = spec.r(x);
        w[(n + x) * size + x] = spec.r(x);
    }
    floyd_warshall(size, &mut w);
    let labels = spec
        .labels()
        .iter()
        .map(|l| format!("{l}/0"))
        .chain(spec.labels().iter().map(|l| format!("{l}/1")))
        .collect();
    let metric = FiniteMetricSpace::from_flat(labels, size, w)?;
    let h = min_of_metrics(&spec.d0, &spec.d1)?;
    let constants = DerivedConstants {
        lipschitz_l: lipschitz_constant_r(spec),
        domination_c: domination_constant(spec),
        metric_min: h.is_metric(),
        min_quasi_constant: h.quasi_triangle_constant(),
    };
    Ok(TwistedUnionSpace {
        spec: spec.clone(),
        metric,
        constants,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossDistance {
    pub value: f64,
    /// Crossing point `z`; ties go to the lowest index.
    pub witness: usize,
}

/// `min over z of d0(x,z) + d1(z,y) + r(z)`: paths from layer 0 to layer 1
/// cross exactly once on compatible specs.
pub fn cross_distance_oracle(spec: &TwistedUnionSpec, x: usize, y: usize) -> CrossDistance {
    let mut best = CrossDistance {
        value: f64::INFINITY,
        witness: 0,
    };
    for z in 0..spec.len() {
        let v = spec.d0.d(x, z) + spec.d1.d(z, y) + spec.r(z);
        if v < best.value {
            best = CrossDistance { value: v, witness: z };
        }
    }
    best
}

/// `‖x − y‖₁` for points of the Hamming cube encoded as bit masks.
#[inline]
pub fn hamming(x: u64, y: u64) -> u32 {
    (x ^ y).count_ones()
}

fn check_nr_params(alpha: f64, r: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} outside (1/2, 1]")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("joining parameter {r} must be positive")));
    }
    Ok(())
}

/// Closed-form distance in the twisted Hamming cube with layer-0 weights
/// `‖x−y‖^(1/2α)`, layer-1 weights `‖x−y‖ / r^(2α−1)` and rungs `r`.
pub fn closed_form_nr(x: u64, a: Layer, y: u64, b: Layer, alpha: f64, r: f64) -> Result<f64> {
    check_nr_params(alpha, r)?;
    let t = f64::from(hamming(x, y));
    let snow = t.powf(1.0 / (2.0 * alpha));
    let flat = t / r.powf(2.0 * alpha - 1.0);
    Ok(match (a, b) {
        (Layer::Zero, Layer::Zero) => snow,
        (Layer::One, Layer::One) => flat.min(2.0 * r + snow),
        _ if x == y => r,
        _ => r + flat.min(snow),
    })
}

/// Closed-form distance for layer weights `ω0(‖x−y‖)`, `ω1(‖x−y‖)` and
/// rungs `r`, given the base distance `t = ‖x − y‖`.
pub fn closed_form_concave(
    t: f64,
    a: Layer,
    b: Layer,
    omega0: &ConcaveGauge,
    omega1: &ConcaveGauge,
    r: f64,
) -> Result<f64> {
    omega0.validate()?;
    omega1.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("joining parameter {r} must be positive")));
    }
    let w0 = omega0.eval(t);
    let w1 = omega1.eval(t);
    Ok(match (a, b) {
        (Layer::Zero, Layer::Zero) => w0.min(2.0 * r + w1),
        (Layer::One, Layer::One) => w1.min(2.0 * r + w0),
        _ => r + w0.min(w1),
    })
}

/// Two-sided cross-distance bounds `(lower, upper)` with
/// `upper = h(x,y) + max{r(x), r(y)}` and `lower = upper / max{2L+1, 3}`.
pub fn lemma34_bounds(space: &TwistedUnionSpace, x: usize, y: usize) -> (f64, f64) {
    let spec = &space.spec;
    let upper = spec.h(x, y) + spec.r(x).max(spec.r(y));
    let a = (2.0 * space.constants.lipschitz_l + 1.0).max(3.0);
    (upper / a, upper)
}

/// `r + h(x, y)` when the joiner is constant and `min{d0, d1}` is a metric;
/// the cross distance then equals this value exactly.
pub fn lemma34_exact(space: &TwistedUnionSpace, x: usize, y: usize) -> Option<f64> {
    match space.spec.joiner {
        Joiner::Constant(r) if space.constants.metric_min => Some(r + space.spec.h(x, y)),
        _ => None,
    }
}

/// Two-sided cross-distance bounds `(lower, upper)` with
/// `upper = d1(x,y) + r(x)`, divided by `2C+1` (or `C+1` for a constant
/// joiner) for the lower bound.
pub fn lemma35_bounds(space: &TwistedUnionSpace, x: usize, y: usize) -> (f64, f64) {
    let spec = &space.spec;
    let upper = spec.d1.d(x, y) + spec.r(x);
    let c = space.constants.domination_c;
    let divisor = if spec.joiner.is_constant() {
        c + 1.0
    } else {
        2.0 * c + 1.0
    };
    (upper / divisor, upper)
}

/// Violations of the cross-distance bounds over every cross pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossBoundsReport {
    pub pairs_checked: usize,
    pub lemma34_violations: Vec<(usize, usize)>,
    pub lemma35_violations: Vec<(usize, usize)>,
    pub exact_violations: Vec<(usize, usize)>,
    /// Largest `|oracle − shortest path|` over cross pairs.
    pub max_oracle_gap: f64,
}

impl CrossBoundsReport {
    pub fn all_hold(&self) -> bool {
        self.lemma34_violations.is_empty()
            && self.lemma35_violations.is_empty()
            && self.exact_violations.is_empty()
    }
}

pub fn check_cross_bounds(space: &TwistedUnionSpace) -> CrossBoundsReport {
    let mut report = CrossBoundsReport::default();
    let n = space.base_len();
    let tol = |v: f64| METRIC_TOL * v.max(1.0);
    for x in 0..n {
        for y in 0..n {
            let d = space.cross(x, y);
            report.pairs_checked += 1;
            let (lo, hi) = lemma34_bounds(space, x, y);
            if d < lo - tol(lo) || d > hi + tol(hi) {
                report.lemma34_violations.push((x, y));
            }
            let (lo, hi) = lemma35_bounds(space, x, y);
            if d < lo - tol(lo) || d > hi + tol(hi) {
                report.lemma35_violations.push((x, y));
            }
            if let Some(exact) = lemma34_exact(space, x, y) {
                if (d - exact).abs() > tol(exact) {
                    report.exact_violations.push((x, y));
                }
            }
            let oracle = cross_distance_oracle(&space.spec, x, y).value;
            report.max_oracle_gap = report.max_oracle_gap.max((oracle - d).abs());
        }
    }
    report
}
