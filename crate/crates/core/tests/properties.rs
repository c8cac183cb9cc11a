//! Randomized invariants.

use proptest::prelude::*;

use twisted_l1::cutcone::{cut_measure_to_embedding, exact_c1, Cut, CutMeasure};
use twisted_l1::embedding::measure_distortion;
use twisted_l1::gauge::ConcaveGauge;
use twisted_l1::instances::{random_compatible_spec, random_gauge, random_metric, rng};
use twisted_l1::metric::{validate_metric, FiniteMetricSpace};
use twisted_l1::transform::{apply_concave, snowflake, truncate};
use twisted_l1::twisted::{build_twisted_union, check_compatibility, Layer};

fn metric(seed: u64, n: usize) -> FiniteMetricSpace {
    random_metric(&mut rng(seed), n, 0.2, 3.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn transforms_preserve_metrics(seed in any::<u64>(), n in 2usize..9, lam in 0.05f64..4.0, a in 0.05f64..1.0) {
        let m = metric(seed, n);
        for t in [truncate(&m, lam).unwrap(), snowflake(&m, a).unwrap()] {
            prop_assert!(validate_metric(&t.rows()).unwrap().is_valid());
        }
        let w = random_gauge(&mut rng(seed ^ 1));
        let t = apply_concave(&m, &w).unwrap();
        prop_assert!(validate_metric(&t.rows()).unwrap().is_valid());
    }

    #[test]
    fn twisted_union_restricts_to_layers(seed in any::<u64>(), n in 1usize..8, f in any::<bool>()) {
        let spec = random_compatible_spec(&mut rng(seed), n, f).unwrap();
        prop_assert!(check_compatibility(&spec).is_compatible());
        let space = build_twisted_union(&spec).unwrap();
        for x in 0..n {
            prop_assert_eq!(space.cross(x, x), spec.r(x));
            for y in 0..n {
                prop_assert_eq!(space.d(x, Layer::Zero, y, Layer::Zero), spec.d0().d(x, y));
                prop_assert_eq!(space.d(x, Layer::One, y, Layer::One), spec.d1().d(x, y));
            }
        }
    }

    #[test]
    fn cut_measures_induce_l1_metrics(n in 2usize..8, weights in prop::collection::vec(0.0f64..2.0, 1..12), masks in prop::collection::vec(any::<u64>(), 1..12)) {
        let entries: Vec<(Cut, f64)> = masks
            .iter()
            .zip(&weights)
            .filter_map(|(&m, &w)| Cut::from_mask(m, n).map(|c| (c, w)))
            .collect();
        let mu = CutMeasure::new(n, entries).unwrap();
        let e = cut_measure_to_embedding(&mu, &(0..n).map(|i| i.to_string()).collect::<Vec<_>>()).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((e.distance(i, j) - mu.distance(i, j)).abs() < 1e-12);
            }
        }
        let back: CutMeasure = serde_json::from_str(&serde_json::to_string(&mu).unwrap()).unwrap();
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn c1_is_scale_invariant_and_certified(seed in any::<u64>(), n in 2usize..7, c in 0.01f64..100.0) {
        let m = metric(seed, n);
        let a = exact_c1(&m).unwrap();
        let b = exact_c1(&m.scaled(c).unwrap()).unwrap();
        prop_assert!(a.value >= 1.0);
        prop_assert!((a.value - b.value).abs() < 1e-7 * a.value);
        let e = cut_measure_to_embedding(a.measure.as_ref().unwrap(), m.labels()).unwrap();
        prop_assert!((measure_distortion(&e, &m).unwrap().value - a.value).abs() < 1e-7);
    }

    #[test]
    fn gauges_are_concave_on_samples(seed in any::<u64>()) {
        let w: ConcaveGauge = random_gauge(&mut rng(seed));
        prop_assert_eq!(w.eval(0.0), 0.0);
        let ts: Vec<f64> = (1..40).map(|i| f64::from(i) * 0.1).collect();
        for win in ts.windows(3) {
            let (a, b, c) = (w.eval(win[0]), w.eval(win[1]), w.eval(win[2]));
            prop_assert!(a <= b + 1e-12 && b <= c + 1e-12);
            prop_assert!(b >= (a + c) / 2.0 - 1e-9);
        }
    }
}
