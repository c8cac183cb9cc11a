//! Seeded random instances. Every generator draws from a caller-provided
//! RNG; [`rng`] builds the ChaCha8 stream used throughout the crate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apsp::floyd_warshall;
use crate::error::Result;
use crate::gauge::ConcaveGauge;
use crate::metric::{default_labels, pairs, FiniteMetricSpace};
use crate::twisted::{Joiner, TwistedUnionSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shortest-path closure of uniform edge weights in `[lo, hi)`.
pub fn random_metric(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Result<FiniteMetricSpace> {
    let mut w = vec![0.0; n * n];
    for (i, j) in pairs(n) {
        let v = rng.gen_range(lo..hi);
        w[i * n + j] = v;
        w[j * n + i] = v;
    }
    floyd_warshall(n, &mut w);
    FiniteMetricSpace::from_flat(default_labels(n), n, w)
}

/// `n` points with coordinates uniform in `[0, 1)^dim`.
pub fn random_l1_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// ℓ₁ distances between points.
pub fn l1_metric(points: &[Vec<f64>]) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_fn(default_labels(points.len()), |i, j| {
        points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).abs()).sum()
    })
}

/// A random gauge from the closed-form and piecewise families, scaled to be
/// of order one on `[0, 3]`.
pub fn random_gauge(rng: &mut impl Rng) -> ConcaveGauge {
    match rng.gen_range(0..5) {
        0 => ConcaveGauge::Power {
            coeff: rng.gen_range(0.5..2.0),
            exponent: rng.gen_range(0.2..1.0),
        },
        1 => ConcaveGauge::truncation(rng.gen_range(0.1..2.0)),
        2 => ConcaveGauge::Saturating {
            scale: rng.gen_range(0.5..2.0),
            lambda: rng.gen_range(0.05..2.0),
        },
        3 => ConcaveGauge::capped(
            ConcaveGauge::power(rng.gen_range(0.3..1.0)),
            rng.gen_range(0.0..1.0),
            ConcaveGauge::linear(rng.gen_range(0.1..1.0)),
        ),
        _ => {
            // decreasing slopes through increasing breakpoints
            let mut t = 0.0;
            let mut v = 0.0;
            let mut slope = rng.gen_range(1.0..3.0);
            let mut breakpoints = Vec::new();
            for _ in 0..rng.gen_range(2..6) {
                t += rng.gen_range(0.1..1.0);
                v += slope * rng.gen_range(0.1..1.0);
                breakpoints.push((t, v));
                slope *= rng.gen_range(0.1..1.0);
            }
            piecewise_from_increments(&breakpoints)
        }
    }
}

/// Rebuilds breakpoints so that consecutive slopes never increase.
fn piecewise_from_increments(raw: &[(f64, f64)]) -> ConcaveGauge {
    let mut out = Vec::with_capacity(raw.len() + 1);
    out.push((0.0, 0.0));
    let (mut pt, mut pv, mut last_slope) = (0.0, 0.0, f64::INFINITY);
    for &(t, v) in raw {
        let slope = ((v - pv) / (t - pt)).min(last_slope);
        pv += slope * (t - pt);
        pt = t;
        last_slope = slope;
        out.push((pt, pv));
    }
    ConcaveGauge::Piecewise { breakpoints: out }
}

/// A compatible spec on `n` points with independent random layer metrics.
/// With `function_joiner`, `r(x)` varies by at most the smallest `d0 + d1`.
pub fn random_compatible_spec(
    rng: &mut impl Rng,
    n: usize,
    function_joiner: bool,
) -> Result<TwistedUnionSpec> {
    let d0 = random_metric(rng, n, 0.5, 2.0)?;
    let d1 = random_metric(rng, n, 0.5, 2.0)?;
    let gap = pairs(n)
        .map(|(i, j)| (d0.d(i, j) - d1.d(i, j)).abs())
        .fold(0.0, f64::max);
    let base = gap / 2.0 + rng.gen_range(0.05..1.0);
    let joiner = if function_joiner {
        let room = pairs(n)
            .map(|(i, j)| d0.d(i, j) + d1.d(i, j))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        Joiner::Values((0..n).map(|_| base + rng.gen_range(0.0..room)).collect())
    } else {
        Joiner::Constant(base)
    };
    TwistedUnionSpec::new(d0, d1, joiner)
}

/// A random subset of `0..total` of size `k`, sorted.
pub fn random_subset(rng: &mut impl Rng, total: usize, k: usize) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, total, k.min(total)).into_vec();
    idx.sort_unstable();
    idx
}
