//! Finite metric spaces and their validation.
//!
//! Distances are stored as a dense row-major `n × n` matrix. Every
//! [`FiniteMetricSpace`] handed out by this crate has passed
//! [`validate_metric`] at the absolute tolerance [`METRIC_TOL`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed in every metric-axiom and inequality check.
pub const METRIC_TOL: f64 = 1e-9;

/// At most this many violations are stored in a [`ValidationReport`]; the
/// total count is always exact.
const MAX_RECORDED: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, gap: f64 },
    NotSeparated { i: usize, j: usize, value: f64 },
    /// `d(i, k) > d(i, via) + d(via, k)`.
    Triangle { i: usize, k: usize, via: usize, excess: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonzeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value}"),
            Violation::Asymmetric { i, j, gap } => write!(f, "d({i},{j}) - d({j},{i}) = {gap}"),
            Violation::NotSeparated { i, j, value } => write!(f, "d({i},{j}) = {value} <= 0"),
            Violation::Triangle { i, k, via, excess } => {
                write!(f, "d({i},{k}) exceeds d({i},{via}) + d({via},{k}) by {excess}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: Violation) {
        if self.violations.len() < MAX_RECORDED {
            self.violations.push(v);
        }
        self.total += 1;
    }

    /// First recorded triangle violation, if any.
    pub fn triangle_witness(&self) -> Option<(usize, usize, usize)> {
        self.violations.iter().find_map(|v| match *v {
            Violation::Triangle { i, k, via, .. } => Some((i, k, via)),
            _ => None,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid metric");
        }
        write!(f, "{} violation(s)", self.total)?;
        if let Some(first) = self.violations.first() {
            write!(f, ", first: {first}")?;
        }
        Ok(())
    }
}

/// Checks shape and finiteness of a square matrix given as rows.
pub(crate) fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Structural(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structural(format!("entry ({i},{j}) is not finite")));
        }
    }
    Ok(n)
}

/// Lists every violated metric axiom of a square matrix, with witnesses.
pub fn validate_metric(rows: &[Vec<f64>]) -> Result<ValidationReport> {
    let n = check_square(rows)?;
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(validate_flat(n, &flat))
}

pub(crate) fn validate_flat(n: usize, d: &[f64]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let at = |i: usize, j: usize| d[i * n + j];
    for i in 0..n {
        if at(i, i).abs() > METRIC_TOL {
            report.push(Violation::NonzeroDiagonal { i, value: at(i, i) });
        }
        for j in (i + 1)..n {
            let gap = at(i, j) - at(j, i);
            if gap.abs() > METRIC_TOL {
                report.push(Violation::Asymmetric { i, j, gap });
            }
            if at(i, j) <= 0.0 {
                report.push(Violation::NotSeparated { i, j, value: at(i, j) });
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            for via in 0..n {
                if via == i || via == k {
                    continue;
                }
                let excess = at(i, k) - (at(i, via) + at(via, k));
                if excess > METRIC_TOL {
                    report.push(Violation::Triangle { i, k, via, excess });
                }
            }
        }
    }
    report
}

/// A finite metric space with labeled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricJson", into = "MetricJson")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    n: usize,
    dist: Vec<f64>,
}

/// Wire form: `{"labels": [...], "dist": [[...], ...]}`, full matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricJson {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

impl TryFrom<MetricJson> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(value: MetricJson) -> Result<Self> {
        FiniteMetricSpace::new(value.labels, value.dist)
    }
}

impl From<FiniteMetricSpace> for MetricJson {
    fn from(value: FiniteMetricSpace) -> Self {
        MetricJson {
            dist: value.rows(),
            labels: value.labels,
        }
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl FiniteMetricSpace {
    /// Validates `rows` and wraps it. Fails with [`Error::NotMetric`] when any
    /// axiom is violated beyond [`METRIC_TOL`].
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&rows)?;
        if labels.len() != n {
            return Err(Error::Structural(format!(
                "{} labels for a {n}-point matrix",
                labels.len()
            )));
        }
        let dist: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(labels, n, dist)
    }

    pub fn from_flat(labels: Vec<String>, n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n || labels.len() != n {
            return Err(Error::Structural(format!(
                "expected {n} labels and {} entries",
                n * n
            )));
        }
        if let Some(p) = dist.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structural(format!(
                "entry ({},{}) is not finite",
                p / n.max(1),
                p % n.max(1)
            )));
        }
        let report = validate_flat(n, &dist);
        if !report.is_valid() {
            return Err(Error::NotMetric(report));
        }
        Ok(FiniteMetricSpace { labels, n, dist })
    }

    /// Builds the space from a symmetric distance function on indices.
    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let dist = symmetric_from_fn(n, f);
        Self::from_flat(labels, n, dist)
    }

    pub fn with_default_labels(rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = default_labels(rows.len());
        Self::new(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Unordered pairs `(i, j)` with `i < j`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.n)
    }

    /// Restriction to the points at `indices`, in that order.
    pub fn subspace(&self, indices: &[usize]) -> Self {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let m = indices.len();
        let mut dist = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * m + b] = self.d(i, j);
            }
        }
        FiniteMetricSpace { labels, n: m, dist }
    }

    /// Multiplies every distance by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("scale factor {c} must be positive")));
        }
        Ok(FiniteMetricSpace {
            labels: self.labels.clone(),
            n: self.n,
            dist: self.dist.iter().map(|v| v * c).collect(),
        })
    }

    /// Wraps a matrix already known to be a metric (produced by a shortest
    /// path closure or a transform with a proven guarantee).
    pub(crate) fn from_trusted(labels: Vec<String>, n: usize, dist: Vec<f64>) -> Self {
        debug_assert!(validate_flat(n, &dist).is_valid());
        FiniteMetricSpace { labels, n, dist }
    }
}

pub(crate) fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

pub(crate) fn symmetric_from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut dist = vec![0.0; n * n];
    for (i, j) in pairs(n) {
        let v = f(i, j);
        dist[i * n + j] = v;
        dist[j * n + i] = v;
    }
    dist
}

/// Symmetric, separating, zero-diagonal distance function which need not
/// satisfy the triangle inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiMetric {
    labels: Vec<String>,
    n: usize,
    dist: Vec<f64>,
    quasi_triangle_constant: f64,
}

impl SemiMetric {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&rows)?;
        if labels.len() != n {
            return Err(Error::Structural(format!(
                "{} labels for a {n}-point matrix",
                labels.len()
            )));
        }
        let dist: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(labels, n, dist)
    }

    pub fn from_flat(labels: Vec<String>, n: usize, dist: Vec<f64>) -> Result<Self> {
        let report = validate_flat(n, &dist);
        if let Some(v) = report
            .violations
            .iter()
            .find(|v| !matches!(v, Violation::Triangle { .. }))
        {
            return Err(Error::Structural(format!("not a semimetric: {v}")));
        }
        let quasi_triangle_constant = crate::transform::quasi_constant_flat(n, &dist);
        Ok(SemiMetric {
            labels,
            n,
            dist,
            quasi_triangle_constant,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn quasi_triangle_constant(&self) -> f64 {
        self.quasi_triangle_constant
    }

    pub fn is_metric(&self) -> bool {
        validate_flat(self.n, &self.dist).is_valid()
    }

    /// Returns the metric view when the triangle inequality holds.
    pub fn to_metric(&self) -> Result<FiniteMetricSpace> {
        FiniteMetricSpace::from_flat(self.labels.clone(), self.n, self.dist.clone())
    }
}

impl From<FiniteMetricSpace> for SemiMetric {
    fn from(m: FiniteMetricSpace) -> Self {
        let quasi_triangle_constant = crate::transform::quasi_constant_flat(m.n, &m.dist);
        SemiMetric {
            labels: m.labels,
            n: m.n,
            dist: m.dist,
            quasi_triangle_constant,
        }
    }
}
