use fclt_core::metrics::{j1_distance, rho_metric, uniform_distance, vague_distance};
use fclt_core::{PointMeasure, StepFunction};
use proptest::prelude::*;

const TOL: f64 = 1e-7;

fn step_strategy(max_jumps: usize) -> impl Strategy<Value = StepFunction> {
    (
        -3.0f64..3.0,
        prop::collection::btree_set(1u32..1000, 0..=max_jumps),
        prop::collection::vec(-3.0f64..3.0, max_jumps),
    )
        .prop_map(|(init, ticks, vals)| {
            let times: Vec<f64> = ticks.iter().map(|&k| k as f64 / 1000.0).collect();
            let values = vals[..times.len()].to_vec();
            StepFunction::new(init, times, values).unwrap()
        })
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3, Just(f64::INFINITY), Just(f64::NEG_INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn j1_is_symmetric_and_satisfies_triangle(x in step_strategy(5), y in step_strategy(5), z in step_strategy(5)) {
        let xy = j1_distance(&x, &y, TOL).unwrap();
        prop_assert_eq!(xy, j1_distance(&y, &x, TOL).unwrap());
        let xz = j1_distance(&x, &z, TOL).unwrap();
        let zy = j1_distance(&z, &y, TOL).unwrap();
        prop_assert!(xy <= xz + zy + 2.0 * TOL);
        prop_assert_eq!(j1_distance(&x, &x, TOL).unwrap(), 0.0);
    }

    #[test]
    fn j1_is_dominated_by_uniform(x in step_strategy(6), y in step_strategy(6)) {
        prop_assert!(j1_distance(&x, &y, TOL).unwrap() <= uniform_distance(&x, &y) + TOL);
    }

    // jump times on a 1/1000 lattice, so a 10^4 point grid visits every level pair
    #[test]
    fn uniform_matches_dense_evaluation(x in step_strategy(6), y in step_strategy(6)) {
        let dense = (0..=10_000).map(|i| {
            let t = i as f64 / 10_000.0;
            (x.eval(t) - y.eval(t)).abs()
        }).fold(0.0, f64::max);
        prop_assert!((uniform_distance(&x, &y) - dense).abs() <= 1e-12);
    }

    #[test]
    fn time_change_certificate(
        x in step_strategy(5),
        knots in prop::collection::btree_set(1u32..1000, 1..6),
        shifts in prop::collection::vec(-1.0f64..1.0, 6),
        eps in 1e-4f64..0.05,
    ) {
        let mut lam = vec![(0.0, 0.0)];
        for (k, s) in knots.iter().zip(&shifts) {
            let t = *k as f64 / 1000.0;
            lam.push((t, (t + eps * s).clamp(1e-9, 1.0 - 1e-9)));
        }
        lam.push((1.0, 1.0));
        prop_assume!(lam.windows(2).all(|w| w[1].1 > w[0].1));
        let moved = lam.iter().map(|(s, l)| (l - s).abs()).fold(0.0, f64::max);
        let xl = match x.compose(&lam) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        prop_assert!(j1_distance(&x, &xl, TOL).unwrap() <= moved + TOL);
    }

    #[test]
    fn rho_is_a_metric(a in nonzero(), b in nonzero(), c in nonzero()) {
        let ab = rho_metric(a, b).unwrap();
        prop_assert_eq!(ab, rho_metric(b, a).unwrap());
        prop_assert_eq!(rho_metric(a, a).unwrap(), 0.0);
        prop_assert!(ab <= rho_metric(a, c).unwrap() + rho_metric(c, b).unwrap() + 1e-12);
    }

    #[test]
    fn vague_distance_is_symmetric_and_bounded(
        a in prop::collection::vec(nonzero(), 0..8),
        b in prop::collection::vec(nonzero(), 0..8),
    ) {
        let finite = |v: Vec<f64>| v.into_iter().filter(|x| x.is_finite()).collect::<Vec<_>>();
        let (m1, m2) = (PointMeasure::on_line(finite(a)).unwrap(), PointMeasure::on_line(finite(b)).unwrap());
        let d = vague_distance(&m1, &m2);
        prop_assert_eq!(d, vague_distance(&m2, &m1));
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
