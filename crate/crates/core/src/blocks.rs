//! Block decomposition and the processes `V_n`, `W_n` and `W_n^(u)`.
//!
//! A path of length `n` is cut into `k_n = floor(n / r_n)` blocks of length
//! `r_n`; the remainder is discarded. `W_n` jumps at `k / k_n` by the
//! normalized block sum minus the centering
//! `E(S_{r_n}/a_n 1{|S_{r_n}|/a_n <= 1})`, which is estimated from freshly
//! simulated blocks rather than from blocks of the observed path.

use crate::error::{Error, Result};
use crate::exec::map_reps;
use crate::models::{generate, RegVarSpec, SamplePath};
use crate::rng::{rng_for, stream};
use crate::stats::mean_se;
use crate::step::StepFunction;

/// Block scheme `(n, r_n, k_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockScheme {
    pub n: usize,
    pub r_n: usize,
    pub k_n: usize,
}

impl BlockScheme {
    pub fn new(n: usize, r_n: usize) -> Result<Self> {
        if r_n == 0 || r_n > n {
            return Err(Error::Scheme(format!("need 1 <= r_n <= n, got r_n = {r_n}, n = {n}")));
        }
        Ok(BlockScheme { n, r_n, k_n: n / r_n })
    }

    /// `r_n = ceil(n^beta)`, with `n^beta` snapped to an integer when it is
    /// one up to rounding error (so `(10^5)^0.4` gives 100, not 101).
    pub fn from_exponent(n: usize, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Scheme(format!("block exponent {beta} not in (0, 1)")));
        }
        if n == 0 {
            return Err(Error::Scheme("n must be positive".into()));
        }
        let x = (n as f64).powf(beta);
        let r = if (x - x.round()).abs() <= 1e-9 * x {
            x.round()
        } else {
            x.ceil()
        };
        Self::new(n, (r as usize).clamp(1, n))
    }

    /// Number of path entries actually used, `k_n r_n`.
    pub fn used(&self) -> usize {
        self.k_n * self.r_n
    }
}

/// Block sums `S^k_{r_n}` of one path with the norming constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSums {
    pub sums: Vec<f64>,
    pub a_n: f64,
    pub scheme: BlockScheme,
}

impl BlockSums {
    /// `S^k / a_n` for all blocks.
    pub fn normalized(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s / self.a_n).collect()
    }
}

/// Block sums of a sample path.
pub fn block_sums(path: &SamplePath, scheme: BlockScheme, a_n: f64) -> Result<BlockSums> {
    block_sums_of(&path.values, scheme, a_n)
}

/// Block sums of a raw slice of observations.
pub fn block_sums_of(values: &[f64], scheme: BlockScheme, a_n: f64) -> Result<BlockSums> {
    if scheme.n > values.len() {
        return Err(Error::Domain(format!(
            "scheme needs {} observations, path has {}",
            scheme.n,
            values.len()
        )));
    }
    if !(a_n > 0.0) {
        return Err(Error::Domain(format!("a_n must be positive, got {a_n}")));
    }
    let sums = values[..scheme.used()]
        .chunks_exact(scheme.r_n)
        .map(|c| c.iter().sum())
        .collect();
    Ok(BlockSums {
        sums,
        a_n,
        scheme,
    })
}

/// Monte Carlo estimate of the centering constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteringEstimate {
    pub c_hat: f64,
    pub reps: usize,
    pub std_err: f64,
}

/// `S_{r}/a_n` for `reps` independent freshly simulated blocks of length `r`.
///
/// Block `i` draws from stream `tag` of replication `i` under `seed`.
pub fn fresh_block_sums(spec: &RegVarSpec, r: usize, a_n: f64, reps: usize, seed: u64, tag: u64) -> Vec<f64> {
    map_reps(reps, |i| {
        let mut rng = rng_for(seed, i as u64, tag);
        let mut s = 0.0;
        generate(spec, r, &mut rng, |x| s += x);
        s / a_n
    })
}

/// Estimates `E[(S/a_n) 1{lo < |S|/a_n <= hi}]` from fresh blocks of length `r`.
///
/// For symmetric models each block is paired with its reflection, which
/// leaves the estimator unbiased and makes it exactly 0.
pub fn truncated_block_mean(
    spec: &RegVarSpec,
    r: usize,
    a_n: f64,
    lo: f64,
    hi: f64,
    reps: usize,
    seed: u64,
) -> Result<CenteringEstimate> {
    if reps < 100 {
        return Err(Error::Domain(format!("need at least 100 replications, got {reps}")));
    }
    spec.validate()?;
    let symmetric = spec.is_symmetric();
    let g = |s: f64| if s.abs() > lo && s.abs() <= hi { s } else { 0.0 };
    let vals: Vec<f64> = fresh_block_sums(spec, r, a_n, reps, seed, stream::BLOCK)
        .into_iter()
        .map(|s| if symmetric { 0.5 * (g(s) + g(-s)) } else { g(s) })
        .collect();
    let m = mean_se(&vals);
    Ok(CenteringEstimate {
        c_hat: m.mean,
        reps,
        std_err: m.std_err,
    })
}

/// Centering `E(S_{r_n}/a_n 1{|S_{r_n}|/a_n <= 1})` from `reps` fresh blocks.
pub fn estimate_centering(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    a_n: f64,
    reps: usize,
    seed: u64,
) -> Result<CenteringEstimate> {
    truncated_block_mean(spec, scheme.r_n, a_n, 0.0, 1.0, reps, seed)
}

/// `E(X 1{|X| <= level})` for skewed unit Pareto `X`:
/// `(p - q) alpha/(1 - alpha) (level^(1-alpha) - 1)`, or `(p - q) ln(level)` at `alpha = 1`.
pub fn pareto_truncated_mean(alpha: f64, p: f64, level: f64) -> f64 {
    if level <= 1.0 {
        return 0.0;
    }
    let d = 2.0 * p - 1.0;
    if alpha == 1.0 {
        d * level.ln()
    } else {
        d * alpha / (1.0 - alpha) * (level.powf(1.0 - alpha) - 1.0)
    }
}

fn cumulative_on_grid(increments: impl Iterator<Item = f64>, k: usize) -> StepFunction {
    let mut times = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut acc = 0.0;
    for (i, d) in increments.enumerate() {
        acc += d;
        times.push((i + 1) as f64 / k as f64);
        values.push(acc);
    }
    StepFunction::normalized(0.0, times, values)
}

/// `W_n(t) = sum_{k <= floor(k_n t)} (S^k/a_n - c_hat)`.
#[allow(non_snake_case)]
pub fn build_W(blocks: &BlockSums, c_hat: f64) -> StepFunction {
    let a = blocks.a_n;
    cumulative_on_grid(blocks.sums.iter().map(|s| s / a - c_hat), blocks.sums.len())
}

/// `V_n(t) = (1/a_n) sum_{k <= floor(n t)} (X_k - b_n)`.
#[allow(non_snake_case)]
pub fn build_V(values: &[f64], a_n: f64, b_n: f64) -> Result<StepFunction> {
    if values.is_empty() {
        return Err(Error::Domain("empty path".into()));
    }
    if !(a_n > 0.0) {
        return Err(Error::Domain(format!("a_n must be positive, got {a_n}")));
    }
    Ok(cumulative_on_grid(values.iter().map(|x| (x - b_n) / a_n), values.len()))
}

/// `W_n^(u)(t) = sum_{k <= floor(k_n t)} (S^k/a_n 1{|S^k|/a_n > u} - compensator)`.
#[allow(non_snake_case)]
pub fn truncate_W(blocks: &BlockSums, u: f64, compensator: f64) -> Result<StepFunction> {
    if !(u > 0.0) {
        return Err(Error::Domain(format!("truncation level must be positive, got {u}")));
    }
    Ok(truncate_W_unchecked(blocks, u, compensator))
}

#[allow(non_snake_case)]
pub(crate) fn truncate_W_unchecked(blocks: &BlockSums, u: f64, compensator: f64) -> StepFunction {
    let a = blocks.a_n;
    cumulative_on_grid(
        blocks.sums.iter().map(|s| {
            let x = s / a;
            (if x.abs() > u { x } else { 0.0 }) - compensator
        }),
        blocks.sums.len(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};

    fn raw(values: &[f64], r: usize) -> BlockSums {
        block_sums_of(values, BlockScheme::new(values.len(), r).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn scheme_rounding_and_bounds() {
        let s = BlockScheme::from_exponent(100_000, 0.4).unwrap();
        assert_eq!((s.r_n, s.k_n), (100, 1000));
        let s = BlockScheme::from_exponent(1000, 0.4).unwrap();
        assert_eq!((s.r_n, s.k_n), (16, 62));
        assert!(BlockScheme::new(10, 0).is_err());
        assert!(BlockScheme::new(10, 11).is_err());
        assert!(BlockScheme::from_exponent(10, 1.0).is_err());
    }

    #[test]
    fn block_sum_examples() {
        assert_eq!(raw(&[1.0, 2.0, 3.0, 4.0], 2).sums, vec![3.0, 7.0]);
        assert_eq!(raw(&[1.0, 2.0, 3.0, 4.0], 4).sums, vec![10.0]);
        let bad = BlockScheme::new(5, 2).unwrap();
        assert!(matches!(block_sums_of(&[1.0; 4], bad, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn block_sums_conserve_total() {
        let spec = RegVarSpec::iid_pareto(1.5, 0.3).unwrap();
        let path = crate::models::sample(&spec, 1003, 4).unwrap();
        let b = block_sums(&path, BlockScheme::new(1003, 10).unwrap(), 1.0).unwrap();
        let rem: f64 = path.values[1000..].iter().sum();
        let total: f64 = path.values.iter().sum();
        let blocks: f64 = b.sums.iter().sum();
        assert!((blocks + rem - total).abs() < 1e-9 * path.values.iter().map(|x| x.abs()).sum::<f64>());
    }

    #[test]
    fn w_examples() {
        let zero = raw(&[0.0, 0.0, 0.0, 0.0], 2);
        assert_eq!(build_W(&zero, 0.0), StepFunction::constant(0.0));
        let pm = raw(&[1.0, -1.0], 1);
        let w = build_W(&pm, 0.0);
        assert_eq!(w.eval(0.25), 0.0);
        assert_eq!(w.eval(0.5), 1.0);
        assert_eq!(w.eval(0.99), 1.0);
        assert_eq!(w.eval(1.0), 0.0);
        let b = raw(&[0.5, 2.0, -1.0, 3.0, 0.25, 0.0], 2);
        let w = build_W(&b, 0.1);
        let expect: f64 = b.sums.iter().sum::<f64>() - 3.0 * 0.1;
        assert!((w.final_value() - expect).abs() < 1e-12);
    }

    #[test]
    fn v_examples() {
        let v = build_V(&[3.0], 2.0, 1.0).unwrap();
        assert_eq!(v, StepFunction::indicator(1.0, 1.0).unwrap());
        let xs = [1.0, 5.0, -2.0, 7.5];
        let v = build_V(&xs, 3.0, 0.5).unwrap();
        assert!((v.final_value() - (11.5 - 4.0 * 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_examples() {
        let b = raw(&[0.5, -0.2, 0.3, 0.1], 1);
        assert_eq!(truncate_W(&b, 10.0, 0.0).unwrap(), StepFunction::constant(0.0));
        assert_eq!(truncate_W(&b, 1e-300, 0.05).unwrap(), build_W(&b, 0.05));
        assert!(truncate_W(&b, 0.0, 0.0).is_err());
    }

    #[test]
    fn symmetric_centering_is_zero() {
        let spec = RegVarSpec::moving_average(0.5, 0.5, vec![1.0, 1.0]).unwrap();
        let s = BlockScheme::from_exponent(10_000, 0.4).unwrap();
        let a = crate::models::norming_constant(&spec, s.n).unwrap();
        let c = estimate_centering(&spec, s, a, 1000, 1).unwrap();
        assert!(c.c_hat.abs() <= 3.0 * c.std_err + 1e-15);
    }

    #[test]
    fn pareto_truncated_mean_matches_quadrature() {
        let tol = Tolerance {
            abs: 1e-12,
            rel: 1e-12,
            max_depth: 50,
        };
        for (alpha, p, level) in [(0.5, 1.0, 1e4), (0.5, 0.7, 100.0), (1.5, 0.2, 50.0), (1.0, 1.0, 30.0)] {
            let d = 2.0 * p - 1.0;
            let q = integrate(|x: f64| d * x * alpha * x.powf(-alpha - 1.0), 1.0, level, tol);
            let c = pareto_truncated_mean(alpha, p, level);
            assert!((q - c).abs() < 1e-8 * c.abs().max(1.0), "{alpha} {p} {level}: {q} vs {c}");
        }
    }

    #[test]
    fn centering_matches_closed_form_for_single_observation_blocks() {
        let spec = RegVarSpec::iid_pareto(0.5, 1.0).unwrap();
        let s = BlockScheme::new(100, 1).unwrap();
        let a = crate::models::norming_constant(&spec, 100).unwrap();
        let c = estimate_centering(&spec, s, a, 200_000, 9).unwrap();
        let exact = pareto_truncated_mean(0.5, 1.0, a) / a;
        assert!((c.c_hat - exact).abs() < 3.0 * c.std_err, "{} vs {exact}", c.c_hat);
    }

    #[test]
    fn centering_std_err_scales() {
        let spec = RegVarSpec::iid_pareto(0.5, 0.8).unwrap();
        let s = BlockScheme::from_exponent(10_000, 0.4).unwrap();
        let a = crate::models::norming_constant(&spec, s.n).unwrap();
        let c1 = estimate_centering(&spec, s, a, 20_000, 3).unwrap();
        let c4 = estimate_centering(&spec, s, a, 80_000, 3).unwrap();
        let ratio = c1.std_err / c4.std_err;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
        assert!(c1.c_hat.abs() <= 1.0);
    }
}
