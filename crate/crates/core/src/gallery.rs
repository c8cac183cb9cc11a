//! Named instances: twisted Hamming cubes, the stability lower-bound
//! family and equilateral embeddings.

use serde::{Deserialize, Serialize};

use crate::apsp::bfs_all_pairs;
use crate::cutcone::exact_c1;
use crate::embedding::{DistortionCertificate, L1Embedding};
use crate::error::{Error, Result};
use crate::gauge::ConcaveGauge;
use crate::metric::FiniteMetricSpace;
use crate::transform::apply_concave;
use crate::twisted::{hamming, Joiner, TwistedUnionSpec};

pub const MAX_CUBE_DIM: usize = 10;

/// Largest `k` for which the `2k`-point stable union fits the exact LP.
pub const MAX_SCAN_K: usize = 8;

/// `{0,1}ⁿ` with the Hamming metric. Point `i` is the bit mask `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypercubeBase {
    n: usize,
    metric: FiniteMetricSpace,
}

impl HypercubeBase {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> &FiniteMetricSpace {
        &self.metric
    }

    pub fn point(&self, i: usize) -> u64 {
        i as u64
    }
}

pub fn hamming_cube(n: usize) -> Result<HypercubeBase> {
    if !(1..=MAX_CUBE_DIM).contains(&n) {
        return Err(Error::Parameter(format!("cube dimension {n} outside 1..={MAX_CUBE_DIM}")));
    }
    let labels = (0..1usize << n).map(|i| format!("{i:0n$b}")).collect();
    let metric = FiniteMetricSpace::from_fn(labels, |i, j| f64::from(hamming(i as u64, j as u64)))?;
    Ok(HypercubeBase { n, metric })
}

/// Layer gauges `ω0(t) = t^(1/2α)` and `ω1(t) = t / r^(2α−1)`.
pub fn nr_gauges(alpha: f64, r: f64) -> Result<(ConcaveGauge, ConcaveGauge)> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} outside (1/2, 1]")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("joining parameter {r} must be positive")));
    }
    Ok((
        ConcaveGauge::power(1.0 / (2.0 * alpha)),
        ConcaveGauge::linear(r.powf(1.0 - 2.0 * alpha)),
    ))
}

/// Clamped gauges `ϖ0 = min{ω0, 2r + ω1}` and `ϖ1 = min{ω1, 2r + ω0}`.
pub fn clamped_gauges(
    omega0: &ConcaveGauge,
    omega1: &ConcaveGauge,
    r: f64,
) -> (ConcaveGauge, ConcaveGauge) {
    (
        ConcaveGauge::capped(omega0.clone(), 2.0 * r, omega1.clone()),
        ConcaveGauge::capped(omega1.clone(), 2.0 * r, omega0.clone()),
    )
}

/// Constant-`r` twisted union of `ϖ0 ∘ d` and `ϖ1 ∘ d` for an arbitrary base
/// metric `d`.
pub fn concave_twisted_union(
    base: &FiniteMetricSpace,
    omega0: &ConcaveGauge,
    omega1: &ConcaveGauge,
    r: f64,
) -> Result<TwistedUnionSpec> {
    omega0.validate()?;
    omega1.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("joining parameter {r} must be positive")));
    }
    let (w0, w1) = clamped_gauges(omega0, omega1, r);
    TwistedUnionSpec::new(
        apply_concave(base, &w0)?,
        apply_concave(base, &w1)?,
        Joiner::Constant(r),
    )
}

pub fn concave_twisted_cube(
    n: usize,
    omega0: &ConcaveGauge,
    omega1: &ConcaveGauge,
    r: f64,
) -> Result<TwistedUnionSpec> {
    concave_twisted_union(hamming_cube(n)?.metric(), omega0, omega1, r)
}

pub fn nr_twisted_cube(n: usize, alpha: f64, r: f64) -> Result<TwistedUnionSpec> {
    let (w0, w1) = nr_gauges(alpha, r)?;
    concave_twisted_cube(n, &w0, &w1, r)
}

/// Lower points `0..k` and upper points `k..2k`, lower `i` adjacent to upper
/// `j` exactly when `j ≥ i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StableUnionSpace {
    k: usize,
    metric: FiniteMetricSpace,
}

impl StableUnionSpace {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> &FiniteMetricSpace {
        &self.metric
    }

    pub fn lower(&self, i: usize) -> usize {
        i
    }

    pub fn upper(&self, j: usize) -> usize {
        self.k + j
    }

    pub fn lower_half(&self) -> FiniteMetricSpace {
        self.metric.subspace(&(0..self.k).collect::<Vec<_>>())
    }

    pub fn upper_half(&self) -> FiniteMetricSpace {
        self.metric.subspace(&(self.k..2 * self.k).collect::<Vec<_>>())
    }
}

/// Closed-form distance in the stable union; points are indexed as in
/// [`StableUnionSpace`].
pub fn stable_distance(k: usize, p: usize, q: usize) -> f64 {
    if p == q {
        return 0.0;
    }
    match (p < k, q < k) {
        (true, true) | (false, false) => 2.0,
        (true, false) => {
            if q - k >= p {
                1.0
            } else {
                3.0
            }
        }
        (false, true) => stable_distance(k, q, p),
    }
}

/// Adjacency lists of the bipartite graph behind the stable union.
pub fn stable_union_graph(k: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); 2 * k];
    for i in 0..k {
        for j in i..k {
            adj[i].push(k + j);
            adj[k + j].push(i);
        }
    }
    adj
}

/// Builds the truncated stable union and checks the closed form against
/// breadth-first distances in its graph.
pub fn stable_lowerbound_space(k: usize) -> Result<StableUnionSpace> {
    if k < 2 {
        return Err(Error::Parameter(format!("stable union needs k >= 2, got {k}")));
    }
    let labels = (1..=k)
        .map(|i| format!("lo{i}"))
        .chain((1..=k).map(|j| format!("up{j}")))
        .collect();
    let metric = FiniteMetricSpace::from_fn(labels, |p, q| stable_distance(k, p, q))?;
    let bfs = bfs_all_pairs(&stable_union_graph(k));
    for (p, row) in bfs.iter().enumerate() {
        for (q, hops) in row.iter().enumerate() {
            let expected = hops.map(|h| h as f64);
            if expected != Some(metric.d(p, q)) {
                return Err(Error::Structural(format!(
                    "closed form {} differs from graph distance {hops:?} at ({p},{q})",
                    metric.d(p, q)
                )));
            }
        }
    }
    Ok(StableUnionSpace { k, metric })
}

/// `k` points pairwise at distance `c`: point `i` is `(c/2)·e_i`, or a
/// single coordinate when `k ≤ 2`.
pub fn equilateral_embedding(k: usize, c: f64) -> Result<L1Embedding> {
    if k == 0 {
        return Err(Error::Parameter("equilateral embedding needs k >= 1".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("side length {c} must be positive")));
    }
    let labels = (0..k).map(|i| i.to_string()).collect();
    let coords = match k {
        1 => vec![vec![0.0]],
        2 => vec![vec![0.0], vec![c]],
        _ => (0..k)
            .map(|i| (0..k).map(|j| if i == j { c / 2.0 } else { 0.0 }).collect())
            .collect(),
    };
    L1Embedding::new(labels, coords)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: usize,
    pub points: usize,
    pub c1: f64,
    pub certificate: DistortionCertificate,
}

/// Exact `c₁` of the stable union for `k = 2..=kmax`.
pub fn c1_growth_scan(kmax: usize) -> Result<Vec<GrowthRow>> {
    if kmax > MAX_SCAN_K {
        return Err(Error::SizeCap {
            n: 2 * kmax,
            cap: 2 * MAX_SCAN_K,
        });
    }
    if kmax < 2 {
        return Err(Error::Parameter(format!("kmax {kmax} must be at least 2")));
    }
    (2..=kmax)
        .map(|k| {
            let space = stable_lowerbound_space(k)?;
            let certificate = exact_c1(space.metric())?;
            Ok(GrowthRow {
                k,
                points: 2 * k,
                c1: certificate.value,
                certificate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::measure_distortion;
    use crate::metric::validate_metric;

    #[test]
    fn small_cubes() {
        let c1 = hamming_cube(1).unwrap();
        assert_eq!(c1.metric().len(), 2);
        assert_eq!(c1.metric().d(0, 1), 1.0);
        let c3 = hamming_cube(3).unwrap();
        assert_eq!(c3.metric().labels()[7], "111");
        assert_eq!(c3.metric().d(0, 7), 3.0);
        assert!(validate_metric(&c3.metric().rows()).unwrap().is_valid());
        assert!(hamming_cube(0).is_err());
        assert!(hamming_cube(11).is_err());
    }

    #[test]
    fn nr_gauges_at_alpha_one() {
        let (w0, w1) = nr_gauges(1.0, 1.0).unwrap();
        assert_eq!(w0.eval(4.0), 2.0);
        assert_eq!(w1.eval(3.0), 3.0);
        assert!(nr_gauges(0.5, 1.0).is_err());
        assert!(nr_gauges(0.75, 0.0).is_err());
    }

    #[test]
    fn stable_union_examples() {
        let s = stable_lowerbound_space(2).unwrap();
        assert_eq!(s.metric().d(s.lower(1), s.upper(0)), 3.0);
        assert_eq!(s.metric().d(s.lower(0), s.upper(1)), 1.0);
        for i in 0..2 {
            assert_eq!(s.metric().d(s.lower(i), s.upper(i)), 1.0);
        }
        assert!(stable_lowerbound_space(1).is_err());
    }

    #[test]
    fn equilateral_shapes() {
        let e2 = equilateral_embedding(2, 3.0).unwrap();
        assert_eq!((e2.dim(), e2.distance(0, 1)), (1, 3.0));
        let e5 = equilateral_embedding(5, 2.0).unwrap();
        let eq = FiniteMetricSpace::from_fn(e5.labels().to_vec(), |_, _| 2.0).unwrap();
        assert_eq!(measure_distortion(&e5, &eq).unwrap().value, 1.0);
        assert_eq!(equilateral_embedding(1, 1.0).unwrap().len(), 1);
        assert!(equilateral_embedding(0, 1.0).is_err());
        assert!(equilateral_embedding(3, 0.0).is_err());
    }

    #[test]
    fn scan_caps() {
        assert!(matches!(c1_growth_scan(9), Err(Error::SizeCap { .. })));
        let rows = c1_growth_scan(3).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].c1 - 1.0).abs() < 1e-9);
    }
}
