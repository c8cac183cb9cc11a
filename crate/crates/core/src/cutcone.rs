//! Minimal ℓ₁ distortion of small finite metrics over the cut cone.
//!
//! A finite metric embeds in ℓ₁ with distortion `t` iff some nonnegative
//! combination `L(μ) = Σ μ_S δ_S` of cut pseudometrics satisfies
//! `d ≤ L(μ) ≤ t·d`. The LP over all `2^(n−1) − 1` cuts is solved by column
//! generation: the master LP keeps a growing family of cuts, and pricing
//! enumerates every cut in Gray-code order to find the most violated one.
//! Optimality is therefore certified over the full cut family.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{ratio_scan, CertificateKind, DistortionCertificate, L1Embedding};
use crate::error::{Error, Result};
use crate::lp::{LpStatus, RowKind, Simplex};
use crate::metric::{default_labels, pairs, FiniteMetricSpace, SemiMetric};

/// Largest point count for exact enumeration (32767 cuts).
pub const EXACT_CUT_CAP: usize = 16;

/// Largest point count the sampled mode can represent.
pub const SAMPLED_CUT_CAP: usize = 63;

const PRICING_TOL: f64 = 1e-9;
const MAX_ROUNDS: usize = 20_000;

/// A nontrivial cut `{S, complement}`, stored as the bit mask of the side
/// not containing point 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut(u64);

impl Cut {
    /// Canonical cut from an arbitrary side; `None` for trivial cuts.
    pub fn from_mask(mask: u64, n: usize) -> Option<Cut> {
        let full = full_mask(n);
        let mask = mask & full;
        let canon = if mask & 1 == 1 { full & !mask } else { mask };
        (canon != 0).then_some(Cut(canon))
    }

    pub fn from_indices(indices: &[usize], n: usize) -> Option<Cut> {
        if indices.iter().any(|&i| i >= n) {
            return None;
        }
        Cut::from_mask(indices.iter().fold(0, |m, &i| m | (1 << i)), n)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    /// `δ_S(i, j)`.
    #[inline]
    pub fn separates(self, i: usize, j: usize) -> bool {
        (self.0 >> i ^ self.0 >> j) & 1 == 1
    }

    pub fn indices(self) -> Vec<usize> {
        (0..64).filter(|&i| self.contains(i)).collect()
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// All `2^(n−1) − 1` canonical nontrivial cuts of `{0, …, n−1}`.
pub fn enumerate_cuts(n: usize) -> Result<Vec<Cut>> {
    if n > EXACT_CUT_CAP {
        return Err(Error::SizeCap {
            n,
            cap: EXACT_CUT_CAP,
        });
    }
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 points to cut, got {n}")));
    }
    Ok((1u64..(1 << (n - 1))).map(|s| Cut(s << 1)).collect())
}

/// Nonnegative weights on canonical cuts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct CutMeasure {
    n: usize,
    entries: Vec<(Cut, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CutJson {
    #[serde(rename = "S")]
    s: Vec<usize>,
    w: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MeasureJson {
    n: usize,
    cuts: Vec<CutJson>,
}

impl TryFrom<MeasureJson> for CutMeasure {
    type Error = Error;

    fn try_from(v: MeasureJson) -> Result<Self> {
        let mut entries = Vec::with_capacity(v.cuts.len());
        for c in v.cuts {
            let cut = Cut::from_indices(&c.s, v.n).ok_or_else(|| {
                Error::Structural(format!("cut {:?} is trivial or out of range", c.s))
            })?;
            entries.push((cut, c.w));
        }
        CutMeasure::new(v.n, entries)
    }
}

impl From<CutMeasure> for MeasureJson {
    fn from(m: CutMeasure) -> Self {
        MeasureJson {
            n: m.n,
            cuts: m
                .entries
                .into_iter()
                .map(|(c, w)| CutJson { s: c.indices(), w })
                .collect(),
        }
    }
}

impl CutMeasure {
    /// Merges repeated cuts, drops zero weights and sorts by mask.
    pub fn new(n: usize, entries: Vec<(Cut, f64)>) -> Result<Self> {
        if n > SAMPLED_CUT_CAP {
            return Err(Error::SizeCap {
                n,
                cap: SAMPLED_CUT_CAP,
            });
        }
        let full = full_mask(n);
        let mut merged: Vec<(Cut, f64)> = Vec::with_capacity(entries.len());
        let mut sorted = entries;
        sorted.sort_by_key(|(c, _)| *c);
        for (cut, w) in sorted {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Parameter(format!("cut weight {w} must be nonnegative")));
            }
            if cut.0 & 1 == 1 || cut.0 & !full != 0 || cut.0 == 0 || cut.0 == full {
                return Err(Error::Structural(format!("cut mask {:#b} not canonical", cut.0)));
            }
            match merged.last_mut() {
                Some((c, acc)) if *c == cut => *acc += w,
                _ => merged.push((cut, w)),
            }
        }
        merged.retain(|(_, w)| *w > 0.0);
        Ok(CutMeasure { n, entries: merged })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(Cut, f64)] {
        &self.entries
    }

    /// `L(μ)(i, j) = Σ μ_S δ_S(i, j)`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(c, _)| c.separates(i, j))
            .map(|(_, w)| w)
            .sum()
    }

    /// The induced pseudometric as a dense row-major matrix.
    pub fn induced(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for (i, j) in pairs(n) {
            let v = self.distance(i, j);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
        d
    }

    pub fn scaled(&self, c: f64) -> Self {
        CutMeasure {
            n: self.n,
            entries: self.entries.iter().map(|&(cut, w)| (cut, w * c)).collect(),
        }
    }
}

/// One coordinate per positive-weight cut: `μ_S · [x ∈ S]`.
pub fn cut_measure_to_embedding(measure: &CutMeasure, labels: &[String]) -> Result<L1Embedding> {
    if labels.len() != measure.n {
        return Err(Error::Structural(format!(
            "{} labels for a measure on {} points",
            labels.len(),
            measure.n
        )));
    }
    let coords = (0..measure.n)
        .map(|x| {
            measure
                .entries
                .iter()
                .map(|&(c, w)| if c.contains(x) { w } else { 0.0 })
                .collect()
        })
        .collect();
    L1Embedding::new(labels.to_vec(), coords)
}

/// Which cuts pricing may draw from.
#[derive(Clone, Debug)]
enum CutPool {
    All,
    Sampled(Vec<Cut>),
}

fn singleton_cuts(n: usize) -> Vec<Cut> {
    let mut cuts: Vec<Cut> = (0..n).filter_map(|i| Cut::from_mask(1 << i, n)).collect();
    cuts.sort();
    cuts.dedup();
    cuts
}

/// Finds cuts maximizing `Σ_{i<j} w_ij δ_S(i,j)`, returning at most `keep`
/// cuts whose value exceeds `threshold`, best first.
fn price_cuts(n: usize, w: &[f64], pool: &CutPool, threshold: f64, keep: usize) -> Vec<(Cut, f64)> {
    let mut best: Vec<(Cut, f64)> = Vec::with_capacity(keep + 1);
    let mut offer = |cut: Cut, value: f64| {
        if value > threshold && (best.len() < keep || value > best[best.len() - 1].1) {
            let at = best.partition_point(|&(_, v)| v >= value);
            best.insert(at, (cut, value));
            best.truncate(keep);
        }
    };
    match pool {
        CutPool::All => {
            // Gray-code walk over subsets of {1, …, n−1}
            let mut mask = 0u64;
            let mut value = 0.0;
            for s in 1u64..(1 << (n - 1)) {
                let v = s.trailing_zeros() as usize + 1;
                let bit = 1u64 << v;
                let row = &w[v * n..(v + 1) * n];
                let mut delta = 0.0;
                for (u, &wvu) in row.iter().enumerate() {
                    if u != v {
                        if mask >> u & 1 == 1 {
                            delta -= wvu;
                        } else {
                            delta += wvu;
                        }
                    }
                }
                mask ^= bit;
                if mask & bit == 0 {
                    delta = -delta;
                }
                value += delta;
                offer(Cut(mask), value);
            }
        }
        CutPool::Sampled(cuts) => {
            for &c in cuts {
                let value: f64 = pairs(n)
                    .filter(|&(i, j)| c.separates(i, j))
                    .map(|(i, j)| w[i * n + j])
                    .sum();
                offer(c, value);
            }
        }
    }
    best
}

fn cut_column(cut: Cut, pair_list: &[(usize, usize)], offsets: &[usize]) -> Vec<(usize, f64)> {
    let mut col = Vec::new();
    for (p, &(i, j)) in pair_list.iter().enumerate() {
        if cut.separates(i, j) {
            for &off in offsets {
                col.push((off + p, 1.0));
            }
        }
    }
    col
}

/// Column-generation driver shared by the distortion, feasibility and
/// isometry LPs. Rows are indexed `block * P + p` for pair `p`.
struct CutLp {
    n: usize,
    pair_list: Vec<(usize, usize)>,
    lp: Simplex,
    /// Row blocks each cut column participates in.
    blocks: Vec<usize>,
    cuts: Vec<Cut>,
    /// Structural column index of each cut.
    cut_col: Vec<usize>,
    present: HashSet<Cut>,
    pool: CutPool,
}

impl CutLp {
    fn new(n: usize, lp: Simplex, blocks: Vec<usize>, pool: CutPool) -> Self {
        CutLp {
            n,
            pair_list: pairs(n).collect(),
            lp,
            blocks,
            cuts: Vec::new(),
            cut_col: Vec::new(),
            present: HashSet::new(),
            pool,
        }
    }

    fn add_cut(&mut self, cut: Cut) {
        if self.present.insert(cut) {
            let offsets: Vec<usize> = self.blocks.iter().map(|b| b * self.pair_list.len()).collect();
            let col = cut_column(cut, &self.pair_list, &offsets);
            let j = self.lp.add_column(0.0, &col);
            self.cuts.push(cut);
            self.cut_col.push(j);
        }
    }

    /// Pair weights `Σ_blocks y[block·P + p]` as a dense symmetric matrix.
    fn pair_weights(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let np = self.pair_list.len();
        let mut w = vec![0.0; n * n];
        for (p, &(i, j)) in self.pair_list.iter().enumerate() {
            let v: f64 = self.blocks.iter().map(|b| y[b * np + p]).sum();
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
        w
    }

    /// Solves until no cut prices out. Returns the final LP status.
    fn run(&mut self) -> Result<LpStatus> {
        let keep = (2 * self.n).max(8);
        for _ in 0..MAX_ROUNDS {
            let status = self.lp.solve()?;
            // optimal: a cut improves iff yᵀa > 0 (cut columns cost 0);
            // infeasible: the Farkas multipliers price the same way
            let y = self.lp.duals();
            let scale = 1.0 + y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let w = self.pair_weights(&y);
            let found = price_cuts(self.n, &w, &self.pool, PRICING_TOL * scale, keep);
            let fresh: Vec<Cut> = found
                .into_iter()
                .map(|(c, _)| c)
                .filter(|c| !self.present.contains(c))
                .collect();
            if fresh.is_empty() || status == LpStatus::Unbounded {
                return Ok(status);
            }
            for c in fresh {
                self.add_cut(c);
            }
        }
        Err(Error::Solver(format!("column generation did not settle in {MAX_ROUNDS} rounds")))
    }

    fn measure(&self, scale: f64) -> Result<CutMeasure> {
        let x = self.lp.primal();
        let entries = self
            .cuts
            .iter()
            .zip(&self.cut_col)
            .map(|(&c, &j)| (c, x[j] * scale))
            .filter(|(_, w)| *w > 1e-15)
            .collect();
        CutMeasure::new(self.n, entries)
    }
}

fn normalized(n: usize, d: &[f64]) -> (Vec<f64>, f64) {
    let diam = d.iter().copied().fold(0.0, f64::max);
    let pair_d: Vec<f64> = pairs(n).map(|(i, j)| d[i * n + j] / diam).collect();
    (pair_d, diam)
}

fn check_size(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::SizeCap { n, cap });
    }
    Ok(())
}

fn trivial_certificate(n: usize) -> DistortionCertificate {
    let mut cert = ratio_scan(n, |_, _| 1.0, |_, _| 1.0);
    cert.kind = CertificateKind::Exact;
    cert
}

fn min_distortion(n: usize, d: &[f64], pool: CutPool) -> Result<DistortionCertificate> {
    if n < 2 {
        return Ok(trivial_certificate(n));
    }
    let (pd, diam) = normalized(n, d);
    let np = pd.len();
    let mut kinds = vec![RowKind::Ge; np];
    kinds.extend(std::iter::repeat_n(RowKind::Le, np));
    let mut rhs = pd.clone();
    rhs.extend(std::iter::repeat_n(0.0, np));
    let mut lp = Simplex::new(&kinds, &rhs);
    let t_entries: Vec<(usize, f64)> = pd.iter().enumerate().map(|(p, &v)| (np + p, -v)).collect();
    lp.add_column(1.0, &t_entries);
    let exact = matches!(pool, CutPool::All);
    let mut cg = CutLp::new(n, lp, vec![0, 1], pool);
    for c in singleton_cuts(n) {
        cg.add_cut(c);
    }
    match cg.run()? {
        LpStatus::Optimal => {}
        other => return Err(Error::Solver(format!("distortion LP ended {other:?}"))),
    }
    let t = cg.lp.primal()[0];
    let measure = cg.measure(diam)?;
    let induced = measure.induced();
    let mut cert = ratio_scan(n, |i, j| d[i * n + j], |i, j| induced[i * n + j]);
    cert.kind = if exact {
        CertificateKind::Exact
    } else {
        CertificateKind::UpperBoundOnly
    };
    cert.value = t.max(1.0);
    cert.measure = Some(measure);
    Ok(cert)
}

/// Exact minimal ℓ₁ distortion `c₁` with an optimal cut measure.
pub fn exact_c1(space: &FiniteMetricSpace) -> Result<DistortionCertificate> {
    check_size(space.len(), EXACT_CUT_CAP)?;
    min_distortion(space.len(), space.flat(), CutPool::All)
}

/// Minimal distortion of a symmetric separating function that need not be
/// a metric.
pub fn exact_c1_semimetric(h: &SemiMetric) -> Result<DistortionCertificate> {
    check_size(h.len(), EXACT_CUT_CAP)?;
    min_distortion(h.len(), h.flat(), CutPool::All)
}

/// Optimum over singletons plus `samples` random cuts. Valid for up to
/// [`SAMPLED_CUT_CAP`] points; the result only bounds `c₁` from above.
pub fn sampled_c1(space: &FiniteMetricSpace, samples: usize, seed: u64) -> Result<DistortionCertificate> {
    let n = space.len();
    check_size(n, SAMPLED_CUT_CAP)?;
    if n < 2 {
        let mut cert = trivial_certificate(n);
        cert.kind = CertificateKind::UpperBoundOnly;
        return Ok(cert);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = full_mask(n);
    let mut pool: Vec<Cut> = singleton_cuts(n);
    let mut seen: HashSet<Cut> = pool.iter().copied().collect();
    for _ in 0..samples {
        if let Some(c) = Cut::from_mask(rng.gen::<u64>() & full, n) {
            if seen.insert(c) {
                pool.push(c);
            }
        }
    }
    min_distortion(n, space.flat(), CutPool::Sampled(pool))
}

/// Whether some cut measure satisfies `d ≤ L(μ) ≤ target · d`, with
/// `target` relaxed by `1e-7`.
pub fn feasible_with_distortion(space: &FiniteMetricSpace, target: f64) -> Result<bool> {
    if !(target >= 1.0) {
        return Err(Error::Parameter(format!("target distortion {target} must be at least 1")));
    }
    let n = space.len();
    check_size(n, EXACT_CUT_CAP)?;
    if n < 2 {
        return Ok(true);
    }
    let (pd, _) = normalized(n, space.flat());
    let np = pd.len();
    let mut kinds = vec![RowKind::Ge; np];
    kinds.extend(std::iter::repeat_n(RowKind::Le, np));
    let upper = target + 1e-7;
    let rhs: Vec<f64> = pd.iter().copied().chain(pd.iter().map(|v| v * upper)).collect();
    let mut cg = CutLp::new(n, Simplex::new(&kinds, &rhs), vec![0, 1], CutPool::All);
    for c in singleton_cuts(n) {
        cg.add_cut(c);
    }
    Ok(cg.run()? == LpStatus::Optimal)
}

/// Linear inequality `Σ_p a_p x_p ≤ 0` valid on every cut pseudometric but
/// violated by the metric: `Σ_p a_p d_p = violation > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingInequality {
    /// `((i, j), a_ij)` for pairs with nonzero coefficient, scaled so the
    /// largest magnitude is 1.
    pub coefficients: Vec<((usize, usize), f64)>,
    pub violation: f64,
}

impl SeparatingInequality {
    pub fn evaluate(&self, d: impl Fn(usize, usize) -> f64) -> f64 {
        self.coefficients.iter().map(|&((i, j), a)| a * d(i, j)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometricOutcome {
    Embeds(CutMeasure),
    NotInCutCone(SeparatingInequality),
}

/// Solves `L(μ) = d`, returning either a cut measure or a separating
/// inequality certifying that `d` lies outside the cut cone.
pub fn embed_isometric(space: &FiniteMetricSpace) -> Result<IsometricOutcome> {
    let n = space.len();
    check_size(n, EXACT_CUT_CAP)?;
    if n < 2 {
        return Ok(IsometricOutcome::Embeds(CutMeasure::new(n, Vec::new())?));
    }
    let (pd, diam) = normalized(n, space.flat());
    let np = pd.len();
    let kinds = vec![RowKind::Eq; np];
    let mut cg = CutLp::new(n, Simplex::new(&kinds, &pd), vec![0], CutPool::All);
    for c in singleton_cuts(n) {
        cg.add_cut(c);
    }
    match cg.run()? {
        LpStatus::Optimal => {
            let measure = cg.measure(diam)?;
            for (i, j) in pairs(n) {
                let gap = (measure.distance(i, j) - space.d(i, j)).abs();
                if gap > 1e-8 * diam.max(1.0) {
                    return Err(Error::Solver(format!(
                        "isometric measure misses d({i},{j}) by {gap}"
                    )));
                }
            }
            Ok(IsometricOutcome::Embeds(measure))
        }
        LpStatus::Infeasible => {
            let y = cg.lp.duals();
            let top = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let pair_list: Vec<(usize, usize)> = pairs(n).collect();
            let coefficients: Vec<((usize, usize), f64)> = pair_list
                .iter()
                .zip(&y)
                .filter(|(_, v)| v.abs() > 1e-12 * top)
                .map(|(&p, &v)| (p, v / top))
                .collect();
            let ineq = SeparatingInequality {
                violation: 0.0,
                coefficients,
            };
            let violation = ineq.evaluate(|i, j| space.d(i, j));
            Ok(IsometricOutcome::NotInCutCone(SeparatingInequality {
                violation,
                ..ineq
            }))
        }
        LpStatus::Unbounded => Err(Error::Solver("isometry LP reported unbounded".into())),
    }
}

/// Convenience: labels for a measure's ground set.
pub fn measure_labels(measure: &CutMeasure) -> Vec<String> {
    default_labels(measure.ground_size())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: Vec<Vec<f64>>) -> FiniteMetricSpace {
        FiniteMetricSpace::with_default_labels(rows).unwrap()
    }

    fn equilateral(k: usize, c: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(default_labels(k), |_, _| c).unwrap()
    }

    #[test]
    fn cut_counts() {
        assert_eq!(enumerate_cuts(2).unwrap(), vec![Cut(0b10)]);
        let three: Vec<Vec<usize>> = enumerate_cuts(3).unwrap().iter().map(|c| c.indices()).collect();
        assert_eq!(three, vec![vec![1], vec![2], vec![1, 2]]);
        let five = enumerate_cuts(5).unwrap();
        assert_eq!(five.len(), 15);
        assert_eq!(five.iter().collect::<HashSet<_>>().len(), 15);
        assert!(five.iter().all(|c| !c.contains(0)));
        assert!(matches!(enumerate_cuts(17), Err(Error::SizeCap { n: 17, cap: 16 })));
    }

    #[test]
    fn canonical_cuts() {
        assert_eq!(Cut::from_indices(&[0], 3), Some(Cut(0b110)));
        assert_eq!(Cut::from_indices(&[0, 1, 2], 3), None);
        assert_eq!(Cut::from_indices(&[], 3), None);
        assert_eq!(Cut::from_indices(&[5], 3), None);
    }

    #[test]
    fn two_points_and_equilateral() {
        let c = exact_c1(&from_rows(vec![vec![0.0, 3.0], vec![3.0, 0.0]])).unwrap();
        assert!((c.value - 1.0).abs() < 1e-9);
        for k in 3..7 {
            let c = exact_c1(&equilateral(k, 2.0)).unwrap();
            assert!((c.value - 1.0).abs() < 1e-7, "k={k}: {}", c.value);
        }
    }

    #[test]
    fn measure_json() {
        let m = CutMeasure::new(3, vec![(Cut(0b10), 1.5), (Cut(0b110), 0.5)]).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["cuts"][0]["S"], serde_json::json!([1]));
        let back: CutMeasure = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
        // a side containing 0 is complemented on input
        let m2: CutMeasure = serde_json::from_str(r#"{"n":3,"cuts":[{"S":[0],"w":2.0}]}"#).unwrap();
        assert_eq!(m2.entries(), &[(Cut(0b110), 2.0)]);
        assert!(serde_json::from_str::<CutMeasure>(r#"{"n":3,"cuts":[{"S":[1],"w":-1}]}"#).is_err());
    }

    #[test]
    fn single_cut_embedding() {
        let m = CutMeasure::new(3, vec![(Cut(0b10), 2.5)]).unwrap();
        let e = cut_measure_to_embedding(&m, &default_labels(3)).unwrap();
        assert_eq!(e.dim(), 1);
        assert_eq!(e.distance(0, 1), 2.5);
        assert_eq!(e.distance(0, 2), 0.0);
    }

    #[test]
    fn feasibility_matches_value() {
        // 4-cycle with unit edges is in the cut cone; K_{2,3} is not
        let k23 = k23();
        let c = exact_c1(&k23).unwrap();
        assert!(c.value > 1.0 + 1e-6);
        assert!(feasible_with_distortion(&k23, c.value + 0.01).unwrap());
        assert!(!feasible_with_distortion(&k23, 1.0).unwrap());
        assert!(feasible_with_distortion(&equilateral(5, 1.0), 1.0).unwrap());
        assert!(feasible_with_distortion(&k23, 0.5).is_err());
    }

    fn k23() -> FiniteMetricSpace {
        // parts {0,1} and {2,3,4}
        let side = |i: usize| usize::from(i >= 2);
        FiniteMetricSpace::from_fn(default_labels(5), |i, j| {
            if side(i) == side(j) {
                2.0
            } else {
                1.0
            }
        })
        .unwrap()
    }

    #[test]
    fn isometric_probe() {
        match embed_isometric(&equilateral(4, 2.0)).unwrap() {
            IsometricOutcome::Embeds(m) => {
                for (i, j) in pairs(4) {
                    assert!((m.distance(i, j) - 2.0).abs() < 1e-8);
                }
            }
            other => panic!("{other:?}"),
        }
        match embed_isometric(&k23()).unwrap() {
            IsometricOutcome::NotInCutCone(ineq) => {
                assert!(ineq.violation > 1e-6);
                for cut in enumerate_cuts(5).unwrap() {
                    let v = ineq.evaluate(|i, j| f64::from(u8::from(cut.separates(i, j))));
                    assert!(v <= 1e-9, "{cut:?} gives {v}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampled_mode_is_labeled() {
        let c = sampled_c1(&k23(), 4, 7).unwrap();
        assert_eq!(c.kind, CertificateKind::UpperBoundOnly);
        assert!(c.value >= exact_c1(&k23()).unwrap().value - 1e-9);
    }

    #[test]
    fn gray_code_pricing_matches_direct_sum() {
        let n = 6;
        let w: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    0.0
                } else {
                    ((i.min(j) * 7 + i.max(j) * 3) % 5) as f64 - 2.0
                }
            })
            .collect();
        let all = price_cuts(n, &w, &CutPool::All, f64::NEG_INFINITY, 1 << n);
        assert_eq!(all.len(), 31);
        for (cut, value) in all {
            let direct: f64 = pairs(n)
                .filter(|&(i, j)| cut.separates(i, j))
                .map(|(i, j)| w[i * n + j])
                .sum();
            assert!((direct - value).abs() < 1e-12);
        }
    }
}
