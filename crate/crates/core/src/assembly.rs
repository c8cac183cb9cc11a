//! Explicit ℓ₁ embeddings of twisted unions assembled from component
//! embeddings of `M`, with distortion bounds derived from the component
//! factors and checked against the measured distortion.
//!
//! Each component `φ` targets a symmetric function `τ` on `M` and carries
//! two-sided factors `ℓ·τ ≤ ‖φ(x) − φ(y)‖ ≤ u·τ`. Every pair of the union
//! falls in one of three classes (both in layer 0, both in layer 1, one in
//! each). For each class the block structure of the assembled map gives a
//! two-sided estimate `lower·d ≤ ‖G(p) − G(q)‖ ≤ upper·d`, and the derived
//! bound is `max upper / min lower`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cutcone::{cut_measure_to_embedding, exact_c1_semimetric};
use crate::embedding::{measure_distortion, ratio_scan, DistortionCertificate, L1Embedding};
use crate::error::{Error, Result};
use crate::metric::{pairs, SemiMetric, METRIC_TOL};
use crate::twisted::{build_twisted_union, hex, Joiner, Layer, TwistedUnionSpace, TwistedUnionSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The absolute constant asserted for twisted unions of concave images of
/// subsets of `L₁`.
pub const CONCAVE_UNION_BOUND: f64 = 26.6;

/// Component rescaling used in the estimate behind [`CONCAVE_UNION_BOUND`].
pub const CONCAVE_UNION_RESCALE: f64 = 0.694;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Constant joiner; components on `min{d_i, 2r}` and `min{d0, d1}`.
    #[serde(rename = "41")]
    Thm41,
    /// Lipschitz joiner; components on `min{d_i, r(x)+r(y)}` and `min{d0, d1}`.
    #[serde(rename = "51")]
    Thm51,
    /// Domination `d1 ≤ C d0`; components on `d1` and `min{f, r(x)+r(y)}`.
    #[serde(rename = "52")]
    Thm52,
}

/// Declared two-sided factors `lower·τ ≤ ‖φ(x) − φ(y)‖ ≤ upper·τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factors {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Basepoint `m0`. Theorem 4.1 defaults to index 0; the other theorems
    /// require an argmin of `r` and default to the lowest such index.
    pub basepoint: Option<usize>,
    /// Multiplies the `φ0`, `φ1` components before assembly.
    pub component_rescale: Option<f64>,
    /// Factors the components are required to satisfy. Measured factors
    /// are used when absent.
    pub declared_phi0: Option<Factors>,
    pub declared_phi1: Option<Factors>,
    pub declared_psi: Option<Factors>,
}

/// Measured factors of one component against its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub name: String,
    /// Description of the target function on `M`.
    pub target: String,
    pub lower: f64,
    pub upper: f64,
    /// `upper / lower`.
    pub distortion: f64,
    pub lower_witness: Option<(usize, usize)>,
    pub upper_witness: Option<(usize, usize)>,
}

/// Two-sided estimate for one class of pairs of the union.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainBound {
    pub pairs: String,
    pub lower: f64,
    pub upper: f64,
    /// Measured ratio range `‖G(p) − G(q)‖ / d(p, q)` on this class.
    pub measured_lower: f64,
    pub measured_upper: f64,
}

impl ChainBound {
    pub fn holds(&self) -> bool {
        self.measured_lower >= self.lower * (1.0 - 1e-9)
            && self.measured_upper <= self.upper * (1.0 + 1e-9)
    }
}

/// Named constants entering the derived bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(rename = "D0", skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[serde(rename = "D1", skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "C0", skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(rename = "C1", skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(rename = "C2", skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(rename = "C3", skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    #[serde(rename = "C4", skip_serializing_if = "Option::is_none")]
    pub c4: Option<f64>,
    /// Lipschitz constant of the joiner.
    #[serde(rename = "L")]
    pub l: f64,
    /// Domination constant `C` of `d1 ≤ C d0`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Cross-pair constant from the lower cross-distance estimate.
    pub cross_divisor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub schema_version: u32,
    pub theorem: Theorem,
    pub inputs_hash: String,
    pub spec_hash: String,
    pub basepoint: usize,
    pub component_rescale: Option<f64>,
    pub components: Vec<ComponentReport>,
    pub constants: ConstantsReport,
    pub chains: Vec<ChainBound>,
    pub derived_bound: f64,
    pub measured: DistortionCertificate,
    /// `measured ≤ derived_bound` (relative slack `1e-9`).
    pub within_derived: bool,
    /// `measured ≤ 26.6`, reported for Theorem 4.1 assemblies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_26_6: Option<bool>,
    pub notes: Vec<String>,
}

impl AssemblyReport {
    /// Whether every asserted inequality holds.
    pub fn passed(&self) -> bool {
        self.within_derived
            && self.measured.is_finite()
            && self.chains.iter().all(ChainBound::holds)
            && self.within_26_6 != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assembly {
    pub embedding: L1Embedding,
    pub report: AssemblyReport,
}

/// A component embedding with the target it is measured against.
struct Component<'a> {
    name: &'static str,
    target_name: &'static str,
    embedding: &'a L1Embedding,
    target: Vec<f64>,
    declared: Option<Factors>,
}

impl Component<'_> {
    /// Measures factors and checks declared ones pairwise.
    fn measure(&self, n: usize) -> Result<ComponentReport> {
        if self.embedding.len() != n {
            return Err(Error::Structural(format!(
                "{} has {} points, M has {n}",
                self.name,
                self.embedding.len()
            )));
        }
        let cert = ratio_scan(n, |i, j| self.target[i * n + j], |i, j| {
            self.embedding.distance(i, j)
        });
        if let Some(w) = cert.collapsed {
            return Err(Error::Precondition {
                condition: format!("{} is injective", self.name),
                witness: w,
                detail: format!("{} collapses a pair at positive {}", self.name, self.target_name),
            });
        }
        let (lower, upper) = match self.declared {
            Some(f) => {
                if cert.lower_scale < f.lower * (1.0 - 1e-9) {
                    return Err(factor_violation(self.name, "lower", f.lower, cert.lower_scale, cert.lower_witness));
                }
                if cert.upper_scale > f.upper * (1.0 + 1e-9) {
                    return Err(factor_violation(self.name, "upper", f.upper, cert.upper_scale, cert.upper_witness));
                }
                (f.lower, f.upper)
            }
            None => (cert.lower_scale, cert.upper_scale),
        };
        Ok(ComponentReport {
            name: self.name.into(),
            target: self.target_name.into(),
            lower,
            upper,
            distortion: upper / lower,
            lower_witness: cert.lower_witness,
            upper_witness: cert.upper_witness,
        })
    }
}

fn factor_violation(
    name: &str,
    side: &str,
    declared: f64,
    measured: f64,
    witness: Option<(usize, usize)>,
) -> Error {
    Error::Precondition {
        condition: format!("{name} {side} factor {declared}"),
        witness: witness.unwrap_or((0, 0)),
        detail: format!("measured {side} ratio {measured}"),
    }
}

fn pair_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut v = vec![0.0; n * n];
    for (i, j) in pairs(n) {
        let x = f(i, j);
        v[i * n + j] = x;
        v[j * n + i] = x;
    }
    v
}

fn argmin_r(spec: &TwistedUnionSpec) -> usize {
    (0..spec.len()).fold(0, |best, x| if spec.r(x) < spec.r(best) { x } else { best })
}

fn resolve_basepoint(spec: &TwistedUnionSpec, requested: Option<usize>, needs_min: bool) -> Result<usize> {
    let n = spec.len();
    if n == 0 {
        return Err(Error::Structural("M is empty".into()));
    }
    let m0 = match requested {
        Some(m) if m >= n => {
            return Err(Error::Parameter(format!("basepoint {m} outside M of size {n}")));
        }
        Some(m) => m,
        None if needs_min => argmin_r(spec),
        None => 0,
    };
    if needs_min {
        let best = argmin_r(spec);
        if spec.r(m0) > spec.r(best) {
            return Err(Error::Precondition {
                condition: "r(m0) = min r".into(),
                witness: (m0, best),
                detail: format!("r({m0}) = {} exceeds r({best}) = {}", spec.r(m0), spec.r(best)),
            });
        }
    }
    Ok(m0)
}

fn union_labels(spec: &TwistedUnionSpec) -> Vec<String> {
    let base = spec.labels();
    base.iter()
        .map(|l| format!("{l}/0"))
        .chain(base.iter().map(|l| format!("{l}/1")))
        .collect()
}

/// Ratio ranges of `G` against `d` on the three pair classes.
fn class_ranges(space: &TwistedUnionSpace, g: &L1Embedding) -> [(f64, f64); 3] {
    let n = space.base_len();
    let mut out = [(f64::INFINITY, 0.0f64); 3];
    let mut push = |class: usize, p: usize, q: usize| {
        let ratio = g.distance(p, q) / space.metric().d(p, q);
        out[class].0 = out[class].0.min(ratio);
        out[class].1 = out[class].1.max(ratio);
    };
    for (x, y) in pairs(n) {
        push(0, space.point(x, Layer::Zero), space.point(y, Layer::Zero));
        push(1, space.point(x, Layer::One), space.point(y, Layer::One));
    }
    for x in 0..n {
        for y in 0..n {
            push(2, space.point(x, Layer::Zero), space.point(y, Layer::One));
        }
    }
    // classes without pairs are vacuous
    for r in &mut out {
        if r.0 > r.1 {
            *r = (1.0, 1.0);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn finish(
    theorem: Theorem,
    space: &TwistedUnionSpace,
    embedding: L1Embedding,
    m0: usize,
    rescale: Option<f64>,
    components: Vec<ComponentReport>,
    constants: ConstantsReport,
    estimates: [(f64, f64); 3],
    notes: Vec<String>,
) -> Result<Assembly> {
    let measured = measure_distortion(&embedding, space.metric())?;
    let ranges = class_ranges(space, &embedding);
    let names = ["(x,0),(y,0)", "(x,1),(y,1)", "(x,0),(y,1)"];
    let chains: Vec<ChainBound> = names
        .iter()
        .zip(estimates)
        .zip(ranges)
        .map(|((name, (lower, upper)), (ml, mu))| ChainBound {
            pairs: (*name).into(),
            lower,
            upper,
            measured_lower: ml,
            measured_upper: mu,
        })
        .collect();
    let top = estimates.iter().map(|e| e.1).fold(0.0, f64::max);
    let bottom = estimates.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let derived_bound = top / bottom;
    let within_derived = measured.value <= derived_bound * (1.0 + 1e-9);
    let within_26_6 = (theorem == Theorem::Thm41).then_some(measured.value <= CONCAVE_UNION_BOUND);
    let mut hasher = Sha256::new();
    hasher.update(space.spec().content_hash().as_bytes());
    hasher.update(serde_json::to_vec(&theorem)?);
    hasher.update(m0.to_le_bytes());
    hasher.update(serde_json::to_vec(&embedding)?);
    Ok(Assembly {
        report: AssemblyReport {
            schema_version: REPORT_SCHEMA_VERSION,
            theorem,
            inputs_hash: hex(&hasher.finalize()),
            spec_hash: space.spec().content_hash(),
            basepoint: m0,
            component_rescale: rescale,
            components,
            constants,
            chains,
            derived_bound,
            measured,
            within_derived,
            within_26_6,
            notes,
        },
        embedding,
    })
}

fn rescaled(e: &L1Embedding, rescale: Option<f64>) -> Result<L1Embedding> {
    match rescale {
        None => Ok(e.clone()),
        Some(c) if c > 0.0 && c.is_finite() => Ok(e.scaled(c)),
        Some(c) => Err(Error::Parameter(format!("component rescale {c} must be positive"))),
    }
}

/// Map of the form `(x,0) ↦ (φ0(x), φ1(m0), ψ(x), s(x))`,
/// `(x,1) ↦ (φ0(m0), φ1(x), ψ(x), 0)`.
fn g_map(
    spec: &TwistedUnionSpec,
    phi0: &L1Embedding,
    phi1: &L1Embedding,
    psi: &L1Embedding,
    m0: usize,
) -> Result<L1Embedding> {
    let n = spec.len();
    let mut coords = Vec::with_capacity(2 * n);
    for layer in [Layer::Zero, Layer::One] {
        for x in 0..n {
            let (a, b, s) = match layer {
                Layer::Zero => (x, m0, spec.r(x)),
                Layer::One => (m0, x, 0.0),
            };
            let mut v = Vec::with_capacity(phi0.dim() + phi1.dim() + psi.dim() + 1);
            v.extend_from_slice(phi0.coords(a));
            v.extend_from_slice(phi1.coords(b));
            v.extend_from_slice(psi.coords(x));
            v.push(s);
            coords.push(v);
        }
    }
    L1Embedding::new(union_labels(spec), coords)
}

/// Theorem 4.1 map for a constant joiner `r`:
/// `G(x,0) = (φ0(x), φ1(m0), ψ(x), r)`, `G(x,1) = (φ0(m0), φ1(x), ψ(x), 0)`
/// with `φi` on `ρi = min{d_i, 2r}` and `ψ` on `h = min{d0, d1}`.
pub fn assemble_thm41(
    space: &TwistedUnionSpace,
    phi0: &L1Embedding,
    phi1: &L1Embedding,
    psi: &L1Embedding,
    opts: &AssemblyOptions,
) -> Result<Assembly> {
    let spec = space.spec();
    let Joiner::Constant(r) = *spec.joiner() else {
        return Err(Error::Parameter("Theorem 4.1 assembly needs a constant joiner".into()));
    };
    let n = spec.len();
    let m0 = resolve_basepoint(spec, opts.basepoint, false)?;
    let phi0 = rescaled(phi0, opts.component_rescale)?;
    let phi1 = rescaled(phi1, opts.component_rescale)?;
    let f0 = Component {
        name: "phi0",
        target_name: "min{d0, 2r}",
        embedding: &phi0,
        target: pair_fn(n, |x, y| spec.d0().d(x, y).min(2.0 * r)),
        declared: opts.declared_phi0,
    }
    .measure(n)?;
    let f1 = Component {
        name: "phi1",
        target_name: "min{d1, 2r}",
        embedding: &phi1,
        target: pair_fn(n, |x, y| spec.d1().d(x, y).min(2.0 * r)),
        declared: opts.declared_phi1,
    }
    .measure(n)?;
    let fp = Component {
        name: "psi",
        target_name: "min{d0, d1}",
        embedding: psi,
        target: pair_fn(n, |x, y| spec.h(x, y)),
        declared: opts.declared_psi,
    }
    .measure(n)?;
    let a = 3.0;
    let estimates = [
        (f0.lower.min(fp.lower), 2.0 * f0.upper.max(fp.upper)),
        (f1.lower.min(fp.lower), 2.0 * f1.upper.max(fp.upper)),
        (
            fp.lower.min(1.0),
            a * (2.0 * f0.upper + 2.0 * f1.upper + 1.0).max(fp.upper),
        ),
    ];
    let constants = ConstantsReport {
        d0: Some(f0.distortion),
        d1: Some(f1.distortion),
        k: Some(fp.distortion),
        l: 0.0,
        c: space.constants().domination_c,
        cross_divisor: a,
        ..Default::default()
    };
    let notes = vec![
        "same-layer pairs: rho_i + h lies between d_i and 2 d_i".into(),
        "cross pairs: d lies between (r + h)/3 and r + h".into(),
    ];
    let g = g_map(spec, &phi0, &phi1, psi, m0)?;
    finish(Theorem::Thm41, space, g, m0, opts.component_rescale, vec![f0, f1, fp], constants, estimates, notes)
}

/// Theorem 5.1 map for a Lipschitz joiner: as Theorem 4.1 with scalar
/// channel `r(x)` on layer 0, components on `g_i = min{d_i, r(x)+r(y)}`
/// and `m0` an argmin of `r`.
pub fn assemble_thm51(
    space: &TwistedUnionSpace,
    phi0: &L1Embedding,
    phi1: &L1Embedding,
    psi: &L1Embedding,
    opts: &AssemblyOptions,
) -> Result<Assembly> {
    let spec = space.spec();
    let n = spec.len();
    let m0 = resolve_basepoint(spec, opts.basepoint, true)?;
    let phi0 = rescaled(phi0, opts.component_rescale)?;
    let phi1 = rescaled(phi1, opts.component_rescale)?;
    let f0 = Component {
        name: "phi0",
        target_name: "min{d0, r(x)+r(y)}",
        embedding: &phi0,
        target: pair_fn(n, |x, y| spec.d0().d(x, y).min(spec.r(x) + spec.r(y))),
        declared: opts.declared_phi0,
    }
    .measure(n)?;
    let f1 = Component {
        name: "phi1",
        target_name: "min{d1, r(x)+r(y)}",
        embedding: &phi1,
        target: pair_fn(n, |x, y| spec.d1().d(x, y).min(spec.r(x) + spec.r(y))),
        declared: opts.declared_phi1,
    }
    .measure(n)?;
    let fp = Component {
        name: "psi",
        target_name: "min{d0, d1}",
        embedding: psi,
        target: pair_fn(n, |x, y| spec.h(x, y)),
        declared: opts.declared_psi,
    }
    .measure(n)?;
    let l = space.constants().lipschitz_l;
    let a = (2.0 * l + 1.0).max(3.0);
    let estimates = [
        (f0.lower.min(fp.lower), 2.0 * f0.upper.max(fp.upper + l)),
        (f1.lower.min(fp.lower), 2.0 * f1.upper.max(fp.upper)),
        (
            fp.lower.min(1.0) / (1.0 + l),
            a * (2.0 * f0.upper + 2.0 * f1.upper + 1.0).max(fp.upper),
        ),
    ];
    let constants = ConstantsReport {
        c0: Some(f0.distortion),
        c1: Some(f1.distortion),
        c2: Some(fp.distortion),
        l,
        c: space.constants().domination_c,
        cross_divisor: a,
        ..Default::default()
    };
    let notes = vec![
        "same-layer pairs: g_i + h lies between d_i and 2 d_i; |r(x)-r(y)| <= L h".into(),
        "cross pairs: with R = max{r(x), r(y)}, d lies between (R + h)/max{2L+1, 3} and R + h".into(),
        "cross lower chain: r(x) >= R - L h gives h + r(x) >= (R + h)/(1 + L); weakest constant taken".into(),
    ];
    let g = g_map(spec, &phi0, &phi1, psi, m0)?;
    finish(Theorem::Thm51, space, g, m0, opts.component_rescale, vec![f0, f1, fp], constants, estimates, notes)
}

/// Theorem 5.2 map `F(x,0) = (φ1(x), ψ(x), r(x))`, `F(x,1) = (φ1(x), ψ(m0), 0)`
/// with `φ1` on `d1` and `ψ` on `min{f, r(x)+r(y)}`.
///
/// `f` is a symmetric `n × n` row-major array, and the declared constants
/// must satisfy `d0/C3 ≤ d1 + f ≤ C4 d0` at every pair.
pub fn assemble_thm52(
    space: &TwistedUnionSpace,
    phi1: &L1Embedding,
    psi: &L1Embedding,
    f: &[f64],
    c3: f64,
    c4: f64,
    opts: &AssemblyOptions,
) -> Result<Assembly> {
    let spec = space.spec();
    let n = spec.len();
    if f.len() != n * n {
        return Err(Error::Structural(format!("f has {} entries, expected {}", f.len(), n * n)));
    }
    if !(c3 > 0.0 && c4 > 0.0) {
        return Err(Error::Parameter(format!("C3 = {c3} and C4 = {c4} must be positive")));
    }
    for (x, y) in pairs(n) {
        let (d0, d1, fxy) = (spec.d0().d(x, y), spec.d1().d(x, y), f[x * n + y]);
        if (fxy - f[y * n + x]).abs() > METRIC_TOL * fxy.abs().max(1.0) || fxy < 0.0 {
            return Err(Error::Precondition {
                condition: "f symmetric and nonnegative".into(),
                witness: (x, y),
                detail: format!("f(x,y) = {fxy}, f(y,x) = {}", f[y * n + x]),
            });
        }
        let tol = METRIC_TOL * d0.max(1.0);
        if d0 / c3 > d1 + fxy + tol || d1 + fxy > c4 * d0 + tol {
            return Err(Error::Precondition {
                condition: "d0/C3 <= d1 + f <= C4 d0".into(),
                witness: (x, y),
                detail: format!("d0 = {d0}, d1 + f = {}, C3 = {c3}, C4 = {c4}", d1 + fxy),
            });
        }
        let truncated = d1 + fxy.min(spec.r(x) + spec.r(y));
        if truncated > c4 * d0 + tol {
            return Err(Error::Precondition {
                condition: "d1 + min{f, r(x)+r(y)} <= C4 d0".into(),
                witness: (x, y),
                detail: format!("left side {truncated}, C4 d0 = {}", c4 * d0),
            });
        }
    }
    let m0 = resolve_basepoint(spec, opts.basepoint, true)?;
    let phi1 = rescaled(phi1, opts.component_rescale)?;
    let f1 = Component {
        name: "phi1",
        target_name: "d1",
        embedding: &phi1,
        target: pair_fn(n, |x, y| spec.d1().d(x, y)),
        declared: opts.declared_phi1,
    }
    .measure(n)?;
    let fp = Component {
        name: "psi",
        target_name: "min{f, r(x)+r(y)}",
        embedding: psi,
        target: pair_fn(n, |x, y| f[x * n + y].min(spec.r(x) + spec.r(y))),
        declared: opts.declared_psi,
    }
    .measure(n)?;
    let c = space.constants().domination_c;
    let divisor = if spec.joiner().is_constant() { c + 1.0 } else { 2.0 * c + 1.0 };
    let estimates = [
        (
            f1.lower.min(fp.lower) / c3.max(1.0),
            c4 * f1.upper.max(fp.upper) + 1.0 + c4,
        ),
        (f1.lower, f1.upper),
        (
            f1.lower.min(1.0),
            divisor * f1.upper.max(2.0 * fp.upper + 1.0),
        ),
    ];
    let constants = ConstantsReport {
        c1: Some(f1.distortion),
        c2: Some(fp.distortion),
        c3: Some(c3),
        c4: Some(c4),
        l: space.constants().lipschitz_l,
        c,
        cross_divisor: divisor,
        ..Default::default()
    };
    let notes = vec![
        "layer-0 pairs: d0/max{C3,1} <= d1 + min{f, r(x)+r(y)} <= C4 d0; |r(x)-r(y)| <= d0 + d1".into(),
        "layer-1 pairs: F restricts to phi1".into(),
        "cross pairs: d lies between (d1 + r(x))/(2C+1) (C+1 for constant r) and d1 + r(x)".into(),
    ];
    let mut coords = Vec::with_capacity(2 * n);
    for layer in [Layer::Zero, Layer::One] {
        for x in 0..n {
            let (p, s) = match layer {
                Layer::Zero => (x, spec.r(x)),
                Layer::One => (m0, 0.0),
            };
            let mut v = Vec::with_capacity(phi1.dim() + psi.dim() + 1);
            v.extend_from_slice(phi1.coords(x));
            v.extend_from_slice(psi.coords(p));
            v.push(s);
            coords.push(v);
        }
    }
    let g = L1Embedding::new(union_labels(spec), coords)?;
    finish(Theorem::Thm52, space, g, m0, opts.component_rescale, vec![f1, fp], constants, estimates, notes)
}

/// Optimal ℓ₁ embedding of a symmetric separating function on `M` from the
/// exact cut-cone LP.
pub fn lp_component(labels: &[String], target: &[f64]) -> Result<L1Embedding> {
    let n = labels.len();
    if n < 2 {
        return L1Embedding::new(labels.to_vec(), vec![Vec::new(); n]);
    }
    let h = SemiMetric::from_flat(labels.to_vec(), n, target.to_vec())?;
    let cert = exact_c1_semimetric(&h)?;
    let measure = cert
        .measure
        .ok_or_else(|| Error::Solver("distortion LP returned no measure".into()))?;
    cut_measure_to_embedding(&measure, labels)
}

/// Theorem 4.1 with every component produced by the cut-cone LP.
pub fn pipeline_thm41(space: &TwistedUnionSpace, opts: &AssemblyOptions) -> Result<Assembly> {
    let spec = space.spec();
    let Joiner::Constant(r) = *spec.joiner() else {
        return Err(Error::Parameter("Theorem 4.1 assembly needs a constant joiner".into()));
    };
    let n = spec.len();
    let labels = spec.labels();
    let phi0 = lp_component(labels, &pair_fn(n, |x, y| spec.d0().d(x, y).min(2.0 * r)))?;
    let phi1 = lp_component(labels, &pair_fn(n, |x, y| spec.d1().d(x, y).min(2.0 * r)))?;
    let psi = lp_component(labels, &pair_fn(n, |x, y| spec.h(x, y)))?;
    assemble_thm41(space, &phi0, &phi1, &psi, opts)
}

/// Theorem 5.1 with every component produced by the cut-cone LP.
pub fn pipeline_thm51(space: &TwistedUnionSpace, opts: &AssemblyOptions) -> Result<Assembly> {
    let spec = space.spec();
    let n = spec.len();
    let labels = spec.labels();
    let rr = |x: usize, y: usize| spec.r(x) + spec.r(y);
    let phi0 = lp_component(labels, &pair_fn(n, |x, y| spec.d0().d(x, y).min(rr(x, y))))?;
    let phi1 = lp_component(labels, &pair_fn(n, |x, y| spec.d1().d(x, y).min(rr(x, y))))?;
    let psi = lp_component(labels, &pair_fn(n, |x, y| spec.h(x, y)))?;
    assemble_thm51(space, &phi0, &phi1, &psi, opts)
}

/// Theorem 5.2 with `f = d0`, `C3 = 1`, `C4 = C + 1` and LP components.
pub fn pipeline_thm52(space: &TwistedUnionSpace, opts: &AssemblyOptions) -> Result<Assembly> {
    let spec = space.spec();
    let n = spec.len();
    let labels = spec.labels();
    let f = pair_fn(n, |x, y| spec.d0().d(x, y));
    let c4 = space.constants().domination_c + 1.0;
    let phi1 = lp_component(labels, &pair_fn(n, |x, y| spec.d1().d(x, y)))?;
    let psi = lp_component(labels, &pair_fn(n, |x, y| f[x * n + y].min(spec.r(x) + spec.r(y))))?;
    assemble_thm52(space, &phi1, &psi, &f, 1.0, c4, opts)
}

/// The three proof routes for a constant-joiner twisted union with
/// `d1 ≤ C d0`, each assembled from LP components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineComparison {
    pub spec_hash: String,
    pub routes: Vec<AssemblyReport>,
}

impl PipelineComparison {
    pub fn all_finite(&self) -> bool {
        self.routes.iter().all(|r| r.measured.is_finite())
    }

    pub fn passed(&self) -> bool {
        self.routes.iter().all(AssemblyReport::passed)
    }
}

pub fn corollary53_pipelines(spec: &TwistedUnionSpec) -> Result<PipelineComparison> {
    if !spec.joiner().is_constant() {
        return Err(Error::Parameter("the three routes need a constant joiner".into()));
    }
    let space = build_twisted_union(spec)?;
    let opts = AssemblyOptions::default();
    let routes = vec![
        pipeline_thm41(&space, &opts)?.report,
        pipeline_thm51(&space, &opts)?.report,
        pipeline_thm52(&space, &opts)?.report,
    ];
    Ok(PipelineComparison {
        spec_hash: spec.content_hash(),
        routes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetricSpace;

    fn line(points: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(
            (0..points.len()).map(|i| format!("m{i}")).collect(),
            |i, j| (points[i] - points[j]).abs(),
        )
        .unwrap()
    }

    fn spec(points: &[f64], joiner: Joiner) -> TwistedUnionSpec {
        let d0 = line(points);
        let d1 = d0.scaled(1.5).unwrap();
        TwistedUnionSpec::new(d0, d1, joiner).unwrap()
    }

    #[test]
    fn single_point_is_isometric() {
        let s = TwistedUnionSpec::new(line(&[0.0]), line(&[0.0]), Joiner::Constant(2.0)).unwrap();
        let space = build_twisted_union(&s).unwrap();
        for a in [
            pipeline_thm41(&space, &AssemblyOptions::default()).unwrap(),
            pipeline_thm51(&space, &AssemblyOptions::default()).unwrap(),
            pipeline_thm52(&space, &AssemblyOptions::default()).unwrap(),
        ] {
            assert_eq!(a.embedding.distance(0, 1), 2.0);
            assert_eq!(a.report.measured.value, 1.0);
            assert!(a.report.passed());
        }
    }

    #[test]
    fn line_union_within_bounds() {
        let s = spec(&[0.0, 1.0, 2.5, 4.0], Joiner::Constant(1.0));
        let space = build_twisted_union(&s).unwrap();
        let a = pipeline_thm41(&space, &AssemblyOptions::default()).unwrap();
        assert!(a.report.passed(), "{:#?}", a.report);
        assert_eq!(a.report.within_26_6, Some(true));
        let b = pipeline_thm52(&space, &AssemblyOptions::default()).unwrap();
        assert_eq!(b.report.constants.c3, Some(1.0));
        assert!((b.report.constants.c4.unwrap() - 2.5).abs() < 1e-12);
        assert!(b.report.passed(), "{:#?}", b.report);
    }

    #[test]
    fn basepoint_must_minimize_joiner() {
        let s = spec(&[0.0, 1.0, 2.0], Joiner::Values(vec![1.0, 0.75, 1.0]));
        let space = build_twisted_union(&s).unwrap();
        let opts = AssemblyOptions {
            basepoint: Some(0),
            ..Default::default()
        };
        match pipeline_thm51(&space, &opts) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness, (0, 1)),
            other => panic!("{other:?}"),
        }
        let a = pipeline_thm51(&space, &AssemblyOptions::default()).unwrap();
        assert_eq!(a.report.basepoint, 1);
        assert!(a.report.passed());
    }

    #[test]
    fn declared_factor_refused_with_witness() {
        let s = spec(&[0.0, 1.0, 3.0], Joiner::Constant(1.0));
        let space = build_twisted_union(&s).unwrap();
        let labels = s.labels().to_vec();
        // a line embedding of d0 stretches the truncated pair (0,2) by 3/2
        let phi = L1Embedding::new(labels.clone(), vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let opts = AssemblyOptions {
            declared_phi0: Some(Factors { lower: 1.0, upper: 1.2 }),
            ..Default::default()
        };
        match assemble_thm41(&space, &phi, &phi, &phi, &opts) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness, (0, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thm52_refuses_bad_domination() {
        let s = spec(&[0.0, 1.0, 2.0], Joiner::Constant(1.0));
        let space = build_twisted_union(&s).unwrap();
        let labels = s.labels().to_vec();
        let phi = L1Embedding::new(labels, vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let f = pair_fn(3, |x, y| s.d0().d(x, y));
        let r = assemble_thm52(&space, &phi, &phi, &f, 1.0, 2.0, &AssemblyOptions::default());
        assert!(matches!(r, Err(Error::Precondition { witness: (0, 1), .. })), "{r:?}");
    }
}
