//! Finite ℓ₁ embeddings and distortion measurement.

use serde::{Deserialize, Serialize};

use crate::cutcone::CutMeasure;
use crate::error::{Error, Result};
use crate::metric::{pairs, FiniteMetricSpace};

/// Points mapped to equal-length real vectors; distance is the ℓ₁ norm of
/// the coordinate difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmbeddingJson", into = "EmbeddingJson")]
pub struct L1Embedding {
    labels: Vec<String>,
    dim: usize,
    coords: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EmbeddingJson {
    labels: Vec<String>,
    dim: usize,
    coords: Vec<Vec<f64>>,
}

impl TryFrom<EmbeddingJson> for L1Embedding {
    type Error = Error;

    fn try_from(v: EmbeddingJson) -> Result<Self> {
        let e = L1Embedding::new(v.labels, v.coords)?;
        if e.dim != v.dim && !e.coords.is_empty() {
            return Err(Error::Structural(format!(
                "declared dim {} but coordinates have length {}",
                v.dim, e.dim
            )));
        }
        Ok(e)
    }
}

impl From<L1Embedding> for EmbeddingJson {
    fn from(e: L1Embedding) -> Self {
        EmbeddingJson {
            labels: e.labels,
            dim: e.dim,
            coords: e.coords,
        }
    }
}

impl L1Embedding {
    pub fn new(labels: Vec<String>, coords: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != coords.len() {
            return Err(Error::Structural(format!(
                "{} labels for {} coordinate vectors",
                labels.len(),
                coords.len()
            )));
        }
        let dim = coords.first().map_or(0, Vec::len);
        if let Some(i) = coords.iter().position(|c| c.len() != dim) {
            return Err(Error::Structural(format!(
                "point {i} has {} coordinates, expected {dim}",
                coords[i].len()
            )));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Structural("non-finite coordinate".into()));
        }
        Ok(L1Embedding { labels, dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.coords[i]
            .iter()
            .zip(&self.coords[j])
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// All coordinates multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        L1Embedding {
            labels: self.labels.clone(),
            dim: self.dim,
            coords: self
                .coords
                .iter()
                .map(|v| v.iter().map(|x| x * c).collect())
                .collect(),
        }
    }

    /// Relabels and reorders points: output point `k` is input point `order[k]`.
    pub fn select(&self, order: &[usize]) -> Self {
        L1Embedding {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            dim: self.dim,
            coords: order.iter().map(|&i| self.coords[i].clone()).collect(),
        }
    }
}

/// Concatenates coordinates of embeddings of the same labels, optionally
/// appending one scalar channel; distances add.
pub fn direct_sum(parts: &[&L1Embedding], scalars: Option<&[f64]>) -> Result<L1Embedding> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Structural("direct sum of no parts".into()))?;
    if let Some(p) = parts.iter().find(|p| p.labels != first.labels) {
        return Err(Error::Structural(format!(
            "label mismatch in direct sum: {:?} vs {:?}",
            p.labels, first.labels
        )));
    }
    if let Some(s) = scalars {
        if s.len() != first.len() {
            return Err(Error::Structural(format!(
                "{} scalar values for {} points",
                s.len(),
                first.len()
            )));
        }
    }
    let coords = (0..first.len())
        .map(|i| {
            let mut v: Vec<f64> = parts.iter().flat_map(|p| p.coords[i].iter().copied()).collect();
            if let Some(s) = scalars {
                v.push(s[i]);
            }
            v
        })
        .collect();
    L1Embedding::new(first.labels.clone(), coords)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateKind {
    /// Optimal over all cuts.
    Exact,
    /// Distortion of a given embedding.
    Measured,
    /// Optimal over a sampled cut family only; an upper bound on `c₁`.
    UpperBoundOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionCertificate {
    pub kind: CertificateKind,
    /// Distortion, `+∞` when a distinct pair collapses.
    pub value: f64,
    /// Smallest ratio of embedded to original distance.
    pub lower_scale: f64,
    /// Largest ratio of embedded to original distance.
    pub upper_scale: f64,
    pub lower_witness: Option<(usize, usize)>,
    pub upper_witness: Option<(usize, usize)>,
    pub collapsed: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<CutMeasure>,
}

impl DistortionCertificate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Ratio scan of embedded distances `e(i,j)` against `d(i,j)` over
/// distinct pairs.
pub(crate) fn ratio_scan(
    n: usize,
    d: impl Fn(usize, usize) -> f64,
    e: impl Fn(usize, usize) -> f64,
) -> DistortionCertificate {
    let mut cert = DistortionCertificate {
        kind: CertificateKind::Measured,
        value: 1.0,
        lower_scale: f64::INFINITY,
        upper_scale: 0.0,
        lower_witness: None,
        upper_witness: None,
        collapsed: None,
        measure: None,
    };
    for (i, j) in pairs(n) {
        let ratio = e(i, j) / d(i, j);
        if ratio < cert.lower_scale {
            cert.lower_scale = ratio;
            cert.lower_witness = Some((i, j));
        }
        if ratio > cert.upper_scale {
            cert.upper_scale = ratio;
            cert.upper_witness = Some((i, j));
        }
    }
    if n < 2 {
        cert.lower_scale = 1.0;
        cert.upper_scale = 1.0;
        return cert;
    }
    if cert.lower_scale <= 0.0 {
        cert.value = f64::INFINITY;
        cert.collapsed = cert.lower_witness;
    } else {
        cert.value = cert.upper_scale / cert.lower_scale;
    }
    cert
}

/// Distortion `max ratio / min ratio` of `embedding` against `space`.
pub fn measure_distortion(
    embedding: &L1Embedding,
    space: &FiniteMetricSpace,
) -> Result<DistortionCertificate> {
    if embedding.len() != space.len() {
        return Err(Error::Structural(format!(
            "embedding has {} points, space has {}",
            embedding.len(),
            space.len()
        )));
    }
    Ok(ratio_scan(space.len(), |i, j| space.d(i, j), |i, j| {
        embedding.distance(i, j)
    }))
}
