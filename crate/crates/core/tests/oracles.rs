//! Library results checked against independent computations.

use twisted_l1::apsp::floyd_warshall;
use twisted_l1::cutcone::{embed_isometric, enumerate_cuts, exact_c1, IsometricOutcome};
use twisted_l1::embedding::{direct_sum, measure_distortion, L1Embedding};
use twisted_l1::gallery::{
    concave_twisted_cube, equilateral_embedding, hamming_cube, nr_gauges, nr_twisted_cube,
    stable_distance, stable_lowerbound_space,
};
use twisted_l1::gauge::ConcaveGauge;
use twisted_l1::instances::{random_compatible_spec, random_l1_points, random_metric, rng};
use twisted_l1::lp::{LpStatus, RowKind, Simplex};
use twisted_l1::metric::FiniteMetricSpace;
use twisted_l1::twisted::{
    build_twisted_union, check_compatibility, closed_form_concave, cross_distance_oracle, hamming, Layer,
};

use rand::Rng;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn k23() -> FiniteMetricSpace {
    let side = |i: usize| usize::from(i >= 2);
    FiniteMetricSpace::from_fn(labels(5), |i, j| if side(i) == side(j) { 2.0 } else { 1.0 }).unwrap()
}

/// Minimal distortion with every cut present from the start, in the
/// scaled form `max t` subject to `t·d ≤ L(μ) ≤ d`.
fn dense_c1(space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let np = pairs.len();
    let mut kinds = vec![RowKind::Le; np];
    kinds.extend(vec![RowKind::Ge; np]);
    let mut rhs: Vec<f64> = pairs.iter().map(|&(i, j)| space.d(i, j)).collect();
    rhs.extend(vec![0.0; np]);
    let mut lp = Simplex::new(&kinds, &rhs);
    // minimize −t
    let t_col: Vec<(usize, f64)> = pairs
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| (np + p, -space.d(i, j)))
        .collect();
    lp.add_column(-1.0, &t_col);
    for cut in enumerate_cuts(n).unwrap() {
        let mut col = Vec::new();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            if cut.separates(i, j) {
                col.push((p, 1.0));
                col.push((np + p, 1.0));
            }
        }
        lp.add_column(0.0, &col);
    }
    assert_eq!(lp.solve().unwrap(), LpStatus::Optimal);
    1.0 / lp.primal()[0]
}

#[test]
fn k23_distortion_matches_hypermetric_bound() {
    // the pentagonal inequality with weights +1 on {2,3,4} and −1 on {0,1}
    // holds on every cut; with d ≤ f ≤ t·d it forces 4·2 ≤ 6·t
    let c = exact_c1(&k23()).unwrap();
    assert!((c.value - 4.0 / 3.0).abs() < 1e-9, "{}", c.value);
    assert!((dense_c1(&k23()) - 4.0 / 3.0).abs() < 1e-9);
    let b = [-1.0, -1.0, 1.0, 1.0, 1.0];
    for cut in enumerate_cuts(5).unwrap() {
        let mut s = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                if cut.separates(i, j) {
                    s += b[i] * b[j];
                }
            }
        }
        assert!(s <= 0.0);
    }
}

#[test]
fn column_generation_matches_dense_lp() {
    let mut g = rng(17);
    for n in 3..=7 {
        for _ in 0..4 {
            let m = random_metric(&mut g, n, 0.3, 2.0).unwrap();
            let cg = exact_c1(&m).unwrap().value;
            let dense = dense_c1(&m);
            assert!((cg - dense).abs() < 1e-8, "n={n}: {cg} vs {dense}");
        }
    }
}

#[test]
fn four_point_metrics_embed_isometrically() {
    let mut g = rng(4);
    for _ in 0..50 {
        let m = random_metric(&mut g, 4, 0.1, 3.0).unwrap();
        match embed_isometric(&m).unwrap() {
            IsometricOutcome::Embeds(mu) => {
                for (i, j) in m.pairs() {
                    assert!((mu.distance(i, j) - m.d(i, j)).abs() < 1e-8);
                }
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn l1_points_have_unit_distortion() {
    let mut g = rng(5);
    for _ in 0..10 {
        let pts = random_l1_points(&mut g, 7, 2);
        let m = FiniteMetricSpace::from_fn(labels(7), |i, j| {
            pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).abs()).sum()
        })
        .unwrap();
        assert!((exact_c1(&m).unwrap().value - 1.0).abs() < 1e-7);
    }
}

#[test]
fn equilateral_agrees_with_lp() {
    for k in 1..=7 {
        let e = equilateral_embedding(k, 2.0).unwrap();
        let m = FiniteMetricSpace::from_fn(e.labels().to_vec(), |_, _| 2.0).unwrap();
        assert_eq!(measure_distortion(&e, &m).unwrap().value, 1.0);
        if k >= 2 {
            let IsometricOutcome::Embeds(mu) = embed_isometric(&m).unwrap() else {
                panic!("equilateral space outside the cut cone");
            };
            for (i, j) in m.pairs() {
                assert!((mu.distance(i, j) - e.distance(i, j)).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn stable_union_matches_bfs_for_k_up_to_12() {
    for k in 2..=12 {
        let s = stable_lowerbound_space(k).unwrap();
        // independent shortest paths on the unit-weight graph
        let n = 2 * k;
        let mut w = vec![f64::INFINITY; n * n];
        for p in 0..n {
            w[p * n + p] = 0.0;
        }
        for i in 0..k {
            for j in i..k {
                w[i * n + k + j] = 1.0;
                w[(k + j) * n + i] = 1.0;
            }
        }
        floyd_warshall(n, &mut w);
        for p in 0..n {
            for q in 0..n {
                assert_eq!(s.metric().d(p, q), w[p * n + q]);
                assert_eq!(stable_distance(k, p, q), w[p * n + q]);
            }
        }
        let half = s.lower_half();
        assert!(half.pairs().all(|(i, j)| half.d(i, j) == 2.0));
    }
}

#[test]
fn concave_closed_form_matches_shortest_paths() {
    let sqrt = ConcaveGauge::power(0.5);
    let capped = ConcaveGauge::truncation(3.0);
    for n in 1..=4 {
        for r in [0.25, 1.0, 2.5] {
            let spec = concave_twisted_cube(n, &sqrt, &capped, r).unwrap();
            let space = build_twisted_union(&spec).unwrap();
            for x in 0..1usize << n {
                for y in 0..1usize << n {
                    let t = f64::from(hamming(x as u64, y as u64));
                    for a in [Layer::Zero, Layer::One] {
                        for b in [Layer::Zero, Layer::One] {
                            if x == y && a == b {
                                continue;
                            }
                            let f = closed_form_concave(t, a, b, &sqrt, &capped, r).unwrap();
                            assert!((f - space.d(x, a, y, b)).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn nr_cube_is_the_concave_cube_with_nr_gauges() {
    for alpha in [0.6, 0.75, 1.0] {
        for r in [0.5, 1.0, 2.0] {
            let a = nr_twisted_cube(3, alpha, r).unwrap();
            let (w0, w1) = nr_gauges(alpha, r).unwrap();
            let b = concave_twisted_cube(3, &w0, &w1, r).unwrap();
            assert_eq!(a, b);
            assert!(check_compatibility(&a).is_compatible());
            for (i, j) in a.d0().pairs() {
                assert!(a.d1().d(i, j) <= 2.0 * a.d0().d(i, j) + 1e-12);
            }
        }
    }
    let (w0, w1) = nr_gauges(1.0, 1.0).unwrap();
    assert_eq!((w0.eval(9.0), w1.eval(9.0)), (3.0, 9.0));
}

#[test]
fn cross_oracle_matches_shortest_paths() {
    let mut g = rng(99);
    for n in 1..=9 {
        let spec = random_compatible_spec(&mut g, n, n % 2 == 0).unwrap();
        let space = build_twisted_union(&spec).unwrap();
        for x in 0..n {
            for y in 0..n {
                let o = cross_distance_oracle(&spec, x, y);
                assert!((o.value - space.cross(x, y)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn hamming_cube_distances() {
    let c = hamming_cube(4).unwrap();
    for (i, j) in c.metric().pairs() {
        let bits = c.metric().labels()[i]
            .chars()
            .zip(c.metric().labels()[j].chars())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(c.metric().d(i, j), bits as f64);
    }
    assert_eq!(c.metric().diameter(), 4.0);
}

#[test]
fn direct_sum_is_additive() {
    let mut g = rng(8);
    for _ in 0..20 {
        let n = g.gen_range(2..8);
        let a = L1Embedding::new(labels(n), random_l1_points(&mut g, n, 3)).unwrap();
        let b = L1Embedding::new(labels(n), random_l1_points(&mut g, n, 2)).unwrap();
        let s: Vec<f64> = (0..n).map(|_| g.gen()).collect();
        let sum = direct_sum(&[&a, &b], Some(&s)).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = a.distance(i, j) + b.distance(i, j) + (s[i] - s[j]).abs();
                assert!((sum.distance(i, j) - expect).abs() < 1e-12);
            }
        }
    }
}
