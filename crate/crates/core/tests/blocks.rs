use fclt_core::blocks::{block_sums, block_sums_of, build_V, build_W, truncate_W, BlockScheme};
use fclt_core::diagnostics::{condition31_prob, simulate_block_sums};
use fclt_core::metrics::uniform_distance;
use fclt_core::models::{norming_constant, sample};
use fclt_core::RegVarSpec;
use proptest::prelude::*;

fn big_jumps(f: &fclt_core::StepFunction, u: f64) -> usize {
    f.jump_sizes().iter().filter(|d| d.abs() > u).count()
}

#[test]
fn jump_counts_and_grid() {
    let spec = RegVarSpec::moving_average(0.7, 0.4, vec![1.0, 0.5]).unwrap();
    let n = 10_000;
    let scheme = BlockScheme::from_exponent(n, 0.4).unwrap();
    let a = norming_constant(&spec, n).unwrap();
    for seed in 0..5 {
        let path = sample(&spec, n, seed).unwrap();
        let bs = block_sums(&path, scheme, a).unwrap();
        let w = build_W(&bs, 0.01);
        assert!(w.jump_count() <= scheme.k_n);
        for &t in w.jump_times() {
            let k = t * scheme.k_n as f64;
            assert!((k - k.round()).abs() < 1e-9, "jump at {t} off the block grid");
        }
        let v = build_V(&path.values, a, 0.0).unwrap();
        assert!(v.jump_count() <= n);
    }
}

// a block sum beyond u comes from one large innovation, which shows up in
// at most two consecutive observations, each beyond u/2
#[test]
fn clusters_shrink_to_single_jumps() {
    let spec = RegVarSpec::moving_average(0.5, 0.5, vec![1.0, 1.0]).unwrap();
    let n = 100_000;
    let scheme = BlockScheme::from_exponent(n, 0.4).unwrap();
    let a = norming_constant(&spec, n).unwrap();
    let mut total = 0;
    for seed in 0..20 {
        let path = sample(&spec, n, seed).unwrap();
        let bs = block_sums(&path, scheme, a).unwrap();
        let w = build_W(&bs, 0.0);
        let v = build_V(&path.values[..scheme.used()], a, 0.0).unwrap();
        for u in [0.05, 0.2, 1.0] {
            let (jw, jv) = (big_jumps(&w, u), big_jumps(&v, u / 2.0));
            assert!(jw <= jv, "seed {seed} u {u}: W {jw} jumps, V {jv}");
            total += jw;
        }
    }
    assert!(total > 0);
}

#[test]
fn endpoint_identity_on_sampled_paths() {
    let spec = RegVarSpec::iid_pareto(1.3, 0.6).unwrap();
    let n = 5_000;
    let scheme = BlockScheme::from_exponent(n, 0.5).unwrap();
    let a = norming_constant(&spec, n).unwrap();
    let path = sample(&spec, n, 3).unwrap();
    let bs = block_sums(&path, scheme, a).unwrap();
    let c = 0.013;
    let w = build_W(&bs, c);
    let direct: f64 = bs.sums.iter().map(|s| s / a - c).sum();
    assert!((w.final_value() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    let v = build_V(&path.values, a, 0.2).unwrap();
    let direct: f64 = path.values.iter().map(|x| (x - 0.2) / a).sum();
    assert!((v.final_value() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
}

// sup |W - W^(u)| is the maximal excursion of the small-jump partial sums,
// which is what the concentration estimator thresholds
#[test]
fn truncation_gap_matches_concentration_estimator() {
    let spec = RegVarSpec::iid_pareto(0.5, 0.7).unwrap();
    let scheme = BlockScheme::from_exponent(10_000, 0.4).unwrap();
    let (u, delta, reps, seed) = (0.25, 0.5, 400, 11);
    let est = condition31_prob(&spec, scheme, u, delta, reps, seed).unwrap();
    assert!(est.prob > 0.0 && est.prob < 1.0, "degenerate probability {}", est.prob);
    let exceed = (0..reps)
        .filter(|&i| {
            let bs = simulate_block_sums(&spec, scheme, seed, i).unwrap();
            let w = build_W(&bs, 0.0);
            let wu = truncate_W(&bs, u, -est.inner_mean).unwrap();
            uniform_distance(&w, &wu) > delta
        })
        .count();
    assert!((exceed as f64 / reps as f64 - est.prob).abs() <= 1.0 / reps as f64, "{exceed} vs {}", est.prob);
}

proptest! {
    #[test]
    fn block_sums_conserve_the_total(values in prop::collection::vec(-1e3f64..1e3, 1..200), r in 1usize..50) {
        let r = r.min(values.len());
        let scheme = BlockScheme::new(values.len(), r).unwrap();
        let bs = block_sums_of(&values, scheme, 1.0).unwrap();
        prop_assert_eq!(bs.sums.len(), scheme.k_n);
        let remainder: f64 = values[scheme.used()..].iter().sum();
        let total: f64 = values.iter().sum();
        let blocks: f64 = bs.sums.iter().sum();
        prop_assert!((blocks + remainder - total).abs() <= 1e-9 * values.iter().map(|x| x.abs()).sum::<f64>().max(1.0));
    }

    #[test]
    fn w_endpoint_is_sum_of_increments(sums in prop::collection::vec(-10f64..10.0, 1..100), c in -1f64..1.0) {
        let scheme = BlockScheme::new(sums.len(), 1).unwrap();
        let bs = block_sums_of(&sums, scheme, 2.0).unwrap();
        let w = build_W(&bs, c);
        let direct: f64 = sums.iter().map(|s| s / 2.0 - c).sum();
        prop_assert!((w.final_value() - direct).abs() <= 1e-9);
        prop_assert!(w.jump_count() <= sums.len());
    }
}
