//! Monte Carlo checks of the hypotheses and conclusions of the limit theorem.
//!
//! Population expectations are always estimated from independent
//! replications (fresh paths or fresh blocks), never by averaging along one
//! path. Replication `i` of a study with seed `s` draws from
//! `rng_for(s, i, stream)`, so results do not depend on scheduling.
//!
//! Terms of the form `(E g(S_{r_n}))^{k_n}` are estimated from `k_n`
//! independent blocks per replication: with one block per replication the
//! relative error of the power grows like `sqrt(k_n / reps)`. The blocks are
//! either fresh, or coupled to a path by sharing its innovations inside each
//! block and redrawing the state inherited from before the block start.
//! Coupled blocks are still mutually independent with the stationary block
//! law, and paired differences with the path have much smaller variance.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::blocks::{block_sums_of, build_W, estimate_centering, fresh_block_sums, truncated_block_mean, BlockScheme, BlockSums};
use crate::error::{Error, Result};
use crate::exec::map_reps;
use crate::levy::{build_levy_path, cdf_W01_table, sample_prm_with, LevyMeasureParams};
use crate::metrics::{j1_distance_exact, uniform_distance, vague_distance};
use crate::models::{generate, norming_constant, skewed_pareto, Family, RegVarSpec};
use crate::pathio::{csv_err, fmt_f64};
use crate::points::PointMeasure;
use crate::quad::{integrate, Tolerance};
use crate::rng::{rng_for, stream};
use crate::stats::{jackknife_se, ks_statistic_sorted, mean_se, MeanSe};

/// Header of every estimator CSV.
pub const SERIES_HEADER: [&str; 7] = ["grid_value", "estimate", "std_err", "target", "n", "reps", "seed_base"];

/// Estimates on a grid with Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    pub grid: Vec<f64>,
    pub estimates: Vec<f64>,
    pub std_errs: Vec<f64>,
    /// Limit value at each grid point; NaN when no closed form is known.
    pub targets: Vec<f64>,
    pub n_values: Vec<usize>,
    pub reps: usize,
}

impl EstimateSeries {
    fn with_capacity(m: usize, reps: usize) -> Self {
        EstimateSeries {
            grid: Vec::with_capacity(m),
            estimates: Vec::with_capacity(m),
            std_errs: Vec::with_capacity(m),
            targets: Vec::with_capacity(m),
            n_values: Vec::with_capacity(m),
            reps,
        }
    }

    fn push(&mut self, grid: f64, est: f64, se: f64, target: f64, n: usize) {
        self.grid.push(grid);
        self.estimates.push(est);
        self.std_errs.push(se);
        self.targets.push(target);
        self.n_values.push(n);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Writes this series as CSV with the standard header.
    pub fn write_csv<W: Write>(&self, seed_base: u64, w: W) -> Result<()> {
        write_series_csv(std::slice::from_ref(self), seed_base, w)
    }
}

/// Writes several series under one header, in the order given.
pub fn write_series_csv<W: Write>(series: &[EstimateSeries], seed_base: u64, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SERIES_HEADER).map_err(csv_err)?;
    for s in series {
        for i in 0..s.len() {
            wr.write_record([
                fmt_f64(s.grid[i]),
                fmt_f64(s.estimates[i]),
                fmt_f64(s.std_errs[i]),
                fmt_f64(s.targets[i]),
                s.n_values[i].to_string(),
                s.reps.to_string(),
                seed_base.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Tent test function `f_r(x) = clamp(|x|/r - 1, 0, 1)`: zero on `|x| <= r`,
/// one on `|x| >= 2r`. `r = inf` gives `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub r: f64,
}

impl TestFunctionSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Parameter(format!("tent threshold must be positive, got {r}")));
        }
        Ok(TestFunctionSpec { r })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.r.is_infinite() {
            return 0.0;
        }
        (x.abs() / self.r - 1.0).clamp(0.0, 1.0)
    }

    /// `int (1 - e^{-f}) dnu`, so that `exp(-.)` is the Laplace functional of PRM(nu).
    pub fn nu_laplace_exponent(&self, params: &LevyMeasureParams) -> f64 {
        if self.r.is_infinite() {
            return 0.0;
        }
        let (a, r) = (params.alpha, self.r);
        let c = params.c_plus + params.c_minus;
        // ramp part on r < |x| < 2r with x = r (1 + s)
        let ramp = integrate(
            |s: f64| (-(-s).exp_m1()) * a * (1.0 + s).powf(-a - 1.0),
            0.0,
            1.0,
            Tolerance::default(),
        );
        c * r.powf(-a) * ramp + c * (-(-1.0f64).exp_m1()) * (2.0 * r).powf(-a)
    }
}

fn check_reps(reps: usize, min: usize) -> Result<()> {
    if reps < min {
        return Err(Error::Domain(format!("need at least {min} replications, got {reps}")));
    }
    Ok(())
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Domain(format!("{name} grid is empty")));
    }
    if g.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Domain(format!("{name} grid must be positive and finite")));
    }
    Ok(())
}

fn nan_or(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Raw block sums of one simulated path. Each block is split into its first
/// `r_n - trim` observations (`kept`) and the last `trim` (`dropped`).
struct PathBlocks {
    kept: Vec<f64>,
    dropped: Vec<f64>,
    total: f64,
}

fn simulate_blocks(spec: &RegVarSpec, scheme: BlockScheme, trim: usize, seed: u64, rep: usize) -> PathBlocks {
    let mut rng = rng_for(seed, rep as u64, stream::PATH);
    let (r, used) = (scheme.r_n, scheme.used());
    let keep = r - trim;
    let mut kept = vec![0.0; scheme.k_n];
    let mut dropped = vec![0.0; scheme.k_n];
    let mut total = 0.0;
    let mut t = 0;
    generate(spec, scheme.n, &mut rng, |x| {
        if t < used {
            let (b, pos) = (t / r, t % r);
            if pos < keep {
                kept[b] += x;
            } else {
                dropped[b] += x;
            }
        }
        total += x;
        t += 1;
    });
    PathBlocks { kept, dropped, total }
}

/// Block sums of replication `rep`, paired with `a_n`.
fn path_block_sums(spec: &RegVarSpec, scheme: BlockScheme, a_n: f64, seed: u64, rep: usize) -> BlockSums {
    let pb = simulate_blocks(spec, scheme, 0, seed, rep);
    BlockSums {
        sums: pb.kept,
        a_n,
        scheme,
    }
}

/// Mean of `g(S_r / a_n)` over `k` fresh blocks drawn from one rng.
fn fresh_block_mean<T, G>(spec: &RegVarSpec, r: usize, k: usize, a_n: f64, seed: u64, rep: usize, g: G) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Div<f64, Output = T> + Default,
    G: Fn(f64) -> T,
{
    let mut rng = rng_for(seed, rep as u64, stream::BLOCK);
    let mut acc = T::default();
    for _ in 0..k {
        let mut s = 0.0;
        generate(spec, r, &mut rng, |x| s += x);
        acc = acc + g(s / a_n);
    }
    acc / k as f64
}

/// Block sums of one path together with `k_n` mutually independent blocks
/// built from the same innovations. Independent block `k` reuses the
/// innovations inside the block and redraws only the state it inherits
/// from before the block start: earlier innovations for moving averages, a
/// fresh stationary volatility for GARCH and stochastic volatility.
struct CoupledBlocks {
    joint: Vec<f64>,
    indep: Vec<f64>,
}

fn simulate_coupled_blocks(spec: &RegVarSpec, scheme: BlockScheme, seed: u64, rep: usize) -> CoupledBlocks {
    let mut rng = rng_for(seed, rep as u64, stream::PATH);
    let mut fresh = rng_for(seed, rep as u64, stream::COUPLING);
    let (r, k) = (scheme.r_n, scheme.k_n);
    let (alpha, p) = (spec.alpha, spec.p);
    let mut joint = vec![0.0; k];
    let mut indep = vec![0.0; k];
    match &spec.family {
        Family::IidPareto => {
            for (j, d) in joint.iter_mut().zip(indep.iter_mut()) {
                for _ in 0..r {
                    *j += skewed_pareto(&mut rng, alpha, p);
                }
                *d = *j;
            }
        }
        Family::MovingAverage { coeffs } => {
            let lags = coeffs.len() - 1;
            // z[i] holds Z_{i - lags}
            let z: Vec<f64> = (0..lags + k * r).map(|_| skewed_pareto(&mut rng, alpha, p)).collect();
            let mut pre = vec![0.0; lags];
            for b in 0..k {
                let start = b * r;
                for v in pre.iter_mut() {
                    *v = skewed_pareto(&mut fresh, alpha, p);
                }
                for t in start..start + r {
                    let (mut x, mut y) = (0.0, 0.0);
                    for (j, c) in coeffs.iter().enumerate() {
                        let zi = z[t + lags - j];
                        x += c * zi;
                        // Z_{t-j} with t - j < start comes from pre[start - (t - j) - 1]
                        y += c * if t >= start + j { zi } else { pre[start + j - t - 1] };
                    }
                    joint[b] += x;
                    indep[b] += y;
                }
            }
        }
        &Family::Garch11 { a0, a1, b1, squared } => {
            let mean = if a1 + b1 < 1.0 { a0 / (1.0 - a1 - b1) } else { a0 };
            let step = |s2: f64, z: f64| {
                let x = s2.sqrt() * z;
                (x, a0 + a1 * x * x + b1 * s2)
            };
            let mut s2 = mean;
            for _ in 0..spec.burn_in_for(scheme.n) {
                s2 = step(s2, rng.sample(StandardNormal)).1;
            }
            for b in 0..k {
                let mut t2 = mean;
                for _ in 0..spec.burn_in_for(r) {
                    t2 = step(t2, fresh.sample(StandardNormal)).1;
                }
                for _ in 0..r {
                    let z: f64 = rng.sample(StandardNormal);
                    let (x, n2) = step(s2, z);
                    let (y, m2) = step(t2, z);
                    s2 = n2;
                    t2 = m2;
                    joint[b] += if squared { x * x } else { x };
                    indep[b] += if squared { y * y } else { y };
                }
            }
        }
        &Family::StochVol { phi, scale } => {
            let sd0 = scale / (1.0 - phi * phi).sqrt();
            let mut h = sd0 * rng.sample::<f64, _>(StandardNormal);
            for b in 0..k {
                let mut g = sd0 * fresh.sample::<f64, _>(StandardNormal);
                for i in 0..r {
                    if b > 0 || i > 0 {
                        let e: f64 = rng.sample(StandardNormal);
                        h = phi * h + scale * e;
                        if i > 0 {
                            g = phi * g + scale * e;
                        }
                    }
                    let z = skewed_pareto(&mut rng, alpha, p);
                    joint[b] += h.exp() * z;
                    indep[b] += g.exp() * z;
                }
            }
        }
    }
    CoupledBlocks { joint, indep }
}

// ---------------------------------------------------------------------------
// Large deviations

/// Estimator of the block-sum tail probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEstimator {
    /// Indicator averages over fresh blocks.
    Crude,
    /// Conditioning on all but the largest observation of an i.i.d. Pareto
    /// block (Asmussen-Kroese). Unbiased, with far smaller variance.
    Conditional,
}

/// Tail estimates `k_n P(+-S_{r_n} > x a_n)` for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeDevCurve {
    pub scheme: BlockScheme,
    pub a_n: f64,
    pub positive: EstimateSeries,
    pub negative: EstimateSeries,
}

/// `k_n P(+-S_{r_n} > x a_n)` on `xs` for each `n`, with targets `c_+- x^-alpha`.
///
/// Uses the conditional estimator for i.i.d. Pareto models and the crude one otherwise.
pub fn large_dev_curve(
    spec: &RegVarSpec,
    ns: &[usize],
    beta: f64,
    xs: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<LargeDevCurve>> {
    let est = if spec.family == Family::IidPareto {
        TailEstimator::Conditional
    } else {
        TailEstimator::Crude
    };
    large_dev_curve_with(spec, ns, beta, xs, reps, seed, est)
}

/// [`large_dev_curve`] with an explicit estimator.
pub fn large_dev_curve_with(
    spec: &RegVarSpec,
    ns: &[usize],
    beta: f64,
    xs: &[f64],
    reps: usize,
    seed: u64,
    estimator: TailEstimator,
) -> Result<Vec<LargeDevCurve>> {
    spec.validate()?;
    if ns.is_empty() {
        return Err(Error::Domain("n grid is empty".into()));
    }
    check_grid("x", xs)?;
    check_reps(reps, 1000)?;
    if estimator == TailEstimator::Conditional && spec.family != Family::IidPareto {
        return Err(Error::Parameter("the conditional tail estimator needs an i.i.d. Pareto model".into()));
    }
    let limit = spec.limit_params();
    ns.iter()
        .map(|&n| {
            let scheme = BlockScheme::from_exponent(n, beta)?;
            let a_n = norming_constant(spec, n)?;
            let per_rep: Vec<(Vec<f64>, Vec<f64>)> = match estimator {
                TailEstimator::Crude => fresh_block_sums(spec, scheme.r_n, a_n, reps, seed, stream::BLOCK)
                    .into_iter()
                    .map(|s| {
                        let pos = xs.iter().map(|&x| f64::from(u8::from(s > x))).collect();
                        let neg = xs.iter().map(|&x| f64::from(u8::from(-s > x))).collect();
                        (pos, neg)
                    })
                    .collect(),
                TailEstimator::Conditional => map_reps(reps, |i| {
                    let mut rng = rng_for(seed, i as u64, stream::BLOCK);
                    let (mut s, mut m) = (0.0f64, 0.0f64);
                    for _ in 1..scheme.r_n {
                        let x = skewed_pareto(&mut rng, spec.alpha, spec.p);
                        s += x;
                        m = m.max(x.abs());
                    }
                    let r = scheme.r_n as f64;
                    let pos = xs
                        .iter()
                        .map(|&x| r * conditional_tail(spec.alpha, spec.p, s, m, x * a_n))
                        .collect();
                    let neg = xs
                        .iter()
                        .map(|&x| r * conditional_tail(spec.alpha, 1.0 - spec.p, -s, m, x * a_n))
                        .collect();
                    (pos, neg)
                }),
            };
            let k = scheme.k_n as f64;
            let mut positive = EstimateSeries::with_capacity(xs.len(), reps);
            let mut negative = EstimateSeries::with_capacity(xs.len(), reps);
            for (j, &x) in xs.iter().enumerate() {
                let p = mean_se(&per_rep.iter().map(|v| v.0[j]).collect::<Vec<_>>());
                let q = mean_se(&per_rep.iter().map(|v| v.1[j]).collect::<Vec<_>>());
                let tp = nan_or(limit.map(|l| l.c_plus * x.powf(-l.alpha)));
                let tq = nan_or(limit.map(|l| l.c_minus * x.powf(-l.alpha)));
                positive.push(x, k * p.mean, k * p.std_err, tp, n);
                negative.push(x, k * q.mean, k * q.std_err, tq, n);
            }
            Ok(LargeDevCurve {
                scheme,
                a_n,
                positive,
                negative,
            })
        })
        .collect()
}

/// `P(S > t, |X_r| > m | rest)` for a skewed unit Pareto `X_r`, where the
/// other observations sum to `s` and have largest modulus `m` (0 if none).
fn conditional_tail(alpha: f64, p: f64, s: f64, m: f64, t: f64) -> f64 {
    let q = 1.0 - p;
    let surv = |y: f64| if y <= 1.0 { 1.0 } else { y.powf(-alpha) };
    // X_r > max(m, t - s), on the positive side
    let y = (t - s).max(m);
    let up = if y >= 1.0 { p * y.powf(-alpha) } else { p };
    // t - s < X_r < -m, on the negative side
    let lo = t - s;
    let down = if lo < -m { q * (surv(m) - surv(-lo)) } else { 0.0 };
    up + down
}

// ---------------------------------------------------------------------------
// Truncated first moment

/// `k_n E[|S_{r_n}|/a_n 1{|S_{r_n}|/a_n <= u}]` on `us` for each `n`, with
/// target `int_{|x| <= u} |x| nu(dx)`. Requires `alpha < 1`.
pub fn lemma21_check(
    spec: &RegVarSpec,
    ns: &[usize],
    beta: f64,
    us: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<EstimateSeries>> {
    spec.validate()?;
    if spec.alpha >= 1.0 {
        return Err(Error::DivergentMoment(format!(
            "the truncated first moment limit needs alpha < 1, got {}",
            spec.alpha
        )));
    }
    if ns.is_empty() {
        return Err(Error::Domain("n grid is empty".into()));
    }
    check_grid("u", us)?;
    check_reps(reps, 100)?;
    let limit = spec.limit_params();
    ns.iter()
        .map(|&n| {
            let scheme = BlockScheme::from_exponent(n, beta)?;
            let a_n = norming_constant(spec, n)?;
            let sums = fresh_block_sums(spec, scheme.r_n, a_n, reps, seed, stream::BLOCK);
            let k = scheme.k_n as f64;
            let mut out = EstimateSeries::with_capacity(us.len(), reps);
            for &u in us {
                let v: Vec<f64> = sums.iter().map(|s| if s.abs() <= u { s.abs() } else { 0.0 }).collect();
                let m = mean_se(&v);
                let target = nan_or(limit.and_then(|l| l.nu_truncated_abs_moment(u).ok()));
                out.push(u, k * m.mean, k * m.std_err, target, n);
            }
            Ok(out)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Blockwise Laplace functional

/// The two terms of the blockwise factorization and their PRM limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceGap {
    /// `E exp(-sum_k f(S^k/a_n))` over full paths.
    pub joint: f64,
    pub joint_se: f64,
    /// `(E exp(-f(S_{r_n}/a_n)))^{k_n}` over fresh blocks.
    pub product: f64,
    pub product_se: f64,
    /// `joint - product`.
    pub gap: f64,
    pub gap_se: f64,
    /// `exp(-int (1 - e^{-f}) dnu)`; NaN without a closed-form limit.
    pub limit: f64,
}

/// How the product term `(E g(S_{r_n}))^{k_n}` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductEstimator {
    /// `k_n` fresh blocks per replication, independent of the paths.
    FreshBlocks,
    /// `k_n` independent blocks coupled to each path (see the module docs),
    /// so the gap is a mean of paired differences.
    Coupled,
}

/// Blockwise Laplace functional gap with [`ProductEstimator::FreshBlocks`].
pub fn laplace_gap(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    f: TestFunctionSpec,
    reps: usize,
    seed: u64,
) -> Result<LaplaceGap> {
    laplace_gap_with(spec, scheme, f, reps, seed, ProductEstimator::FreshBlocks)
}

pub fn laplace_gap_with(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    f: TestFunctionSpec,
    reps: usize,
    seed: u64,
    estimator: ProductEstimator,
) -> Result<LaplaceGap> {
    spec.validate()?;
    check_reps(reps, 100)?;
    let a_n = norming_constant(spec, scheme.n)?;
    let limit = nan_or(spec.limit_params().map(|l| (-f.nu_laplace_exponent(&l)).exp()));
    let laplace = |sums: &[f64]| (-sums.iter().map(|s| f.eval(s / a_n)).sum::<f64>()).exp();
    match estimator {
        ProductEstimator::FreshBlocks => {
            let joint_vals = map_reps(reps, |i| laplace(&path_block_sums(spec, scheme, a_n, seed, i).sums));
            let k = scheme.k_n;
            let block_vals =
                map_reps(reps, |i| fresh_block_mean(spec, scheme.r_n, k, a_n, seed, i, |s| (-f.eval(s)).exp()));
            let joint = mean_se(&joint_vals);
            let m = mean_se(&block_vals);
            let kf = k as f64;
            let product = m.mean.powf(kf);
            // delta method on x -> x^k
            let product_se = kf * m.mean.powf(kf - 1.0) * m.std_err;
            Ok(LaplaceGap {
                joint: joint.mean,
                joint_se: joint.std_err,
                product,
                product_se,
                gap: joint.mean - product,
                gap_se: joint.std_err.hypot(product_se),
                limit,
            })
        }
        ProductEstimator::Coupled => {
            let vals: Vec<(f64, f64)> = map_reps(reps, |i| {
                let cb = simulate_coupled_blocks(spec, scheme, seed, i);
                (laplace(&cb.joint), laplace(&cb.indep))
            });
            let joint = mean_se(&vals.iter().map(|v| v.0).collect::<Vec<_>>());
            let product = mean_se(&vals.iter().map(|v| v.1).collect::<Vec<_>>());
            let gap = mean_se(&vals.iter().map(|v| v.0 - v.1).collect::<Vec<_>>());
            Ok(LaplaceGap {
                joint: joint.mean,
                joint_se: joint.std_err,
                product: product.mean,
                product_se: product.std_err,
                gap: gap.mean,
                gap_se: gap.std_err,
                limit,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Small-jump concentration

/// Frequency of `max_j |sum_{k<=j} (Y_k - E Y)| > delta` with
/// `Y_k = S^k/a_n 1{|S^k|/a_n <= u}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cond31Estimate {
    pub u: f64,
    pub delta: f64,
    pub prob: f64,
    pub std_err: f64,
    /// Monte Carlo estimate of `E Y` from `reps k_n` fresh blocks.
    pub inner_mean: f64,
    pub inner_se: f64,
}

pub fn condition31_prob(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    u: f64,
    delta: f64,
    reps: usize,
    seed: u64,
) -> Result<Cond31Estimate> {
    let mut v = condition31_grid(spec, scheme, &[u], &[delta], reps, seed)?;
    Ok(v.remove(0))
}

/// [`condition31_prob`] for every `(u, delta)` pair, sharing paths across
/// the grid. Output is ordered by `u`, then `delta`, as given.
pub fn condition31_grid(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    us: &[f64],
    deltas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<Cond31Estimate>> {
    spec.validate()?;
    check_grid("u", us)?;
    check_grid("delta", deltas)?;
    check_reps(reps, 100)?;
    let a_n = norming_constant(spec, scheme.n)?;
    let inner: Vec<_> = us
        .iter()
        .map(|&u| truncated_block_mean(spec, scheme.r_n, a_n, 0.0, u, reps * scheme.k_n, seed))
        .collect::<Result<_>>()?;
    // per replication: max partial-sum excursion for each u
    let maxima: Vec<Vec<f64>> = map_reps(reps, |i| {
        let bs = path_block_sums(spec, scheme, a_n, seed, i);
        us.iter()
            .zip(&inner)
            .map(|(&u, c)| {
                let (mut acc, mut mx) = (0.0f64, 0.0f64);
                for s in &bs.sums {
                    let x = s / a_n;
                    acc += if x.abs() <= u { x } else { 0.0 } - c.c_hat;
                    mx = mx.max(acc.abs());
                }
                mx
            })
            .collect()
    });
    let mut out = Vec::with_capacity(us.len() * deltas.len());
    for (j, &u) in us.iter().enumerate() {
        for &delta in deltas {
            let ind: Vec<f64> = maxima.iter().map(|m| f64::from(u8::from(m[j] > delta))).collect();
            let m = mean_se(&ind);
            out.push(Cond31Estimate {
                u,
                delta,
                prob: m.mean,
                std_err: m.std_err,
                inner_mean: inner[j].c_hat,
                inner_se: inner[j].std_err,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Characteristic-function gap

/// Number of jackknife groups used by [`cf_gap`].
pub const JACKKNIFE_GROUPS: usize = 20;

/// `|phi_n(z) - phi_{r_n}(z)^{k_n}|` on `zs`, where `phi_j(z) = E exp(i z S_j / a_n)`.
///
/// `phi_n` comes from `reps` full paths, `phi_{r_n}` from `reps k_n` fresh
/// blocks; standard errors are delete-a-group jackknife.
pub fn cf_gap(spec: &RegVarSpec, n: usize, r_n: usize, zs: &[f64], reps: usize, seed: u64) -> Result<EstimateSeries> {
    spec.validate()?;
    if zs.is_empty() {
        return Err(Error::Domain("z grid is empty".into()));
    }
    if zs.iter().any(|z| !z.is_finite()) {
        return Err(Error::Domain("z grid must be finite".into()));
    }
    check_reps(reps, JACKKNIFE_GROUPS.max(100))?;
    let scheme = BlockScheme::new(n, r_n)?;
    let a_n = norming_constant(spec, n)?;
    let k = scheme.k_n;
    let cis = |s: f64| -> Vec<Complex64> { zs.iter().map(|&z| Complex64::from_polar(1.0, z * s)).collect() };
    let full: Vec<Vec<Complex64>> = map_reps(reps, |i| cis(simulate_blocks(spec, scheme, 0, seed, i).total / a_n));
    let blocks: Vec<Vec<Complex64>> = map_reps(reps, |i| {
        let mut rng = rng_for(seed, i as u64, stream::BLOCK);
        let mut acc = vec![Complex64::new(0.0, 0.0); zs.len()];
        for _ in 0..k {
            let mut s = 0.0;
            generate(spec, r_n, &mut rng, |x| s += x);
            for (a, c) in acc.iter_mut().zip(cis(s / a_n)) {
                *a += c;
            }
        }
        acc.into_iter().map(|a| a / k as f64).collect()
    });
    let group = |i: usize| i * JACKKNIFE_GROUPS / reps;
    let gap_without = |j: usize, skip: Option<usize>| {
        let (mut a, mut b, mut cnt) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0usize);
        for i in 0..reps {
            if Some(group(i)) == skip {
                continue;
            }
            a += full[i][j];
            b += blocks[i][j];
            cnt += 1;
        }
        let c = cnt as f64;
        (a / c - (b / c).powu(k as u32)).norm()
    };
    let mut out = EstimateSeries::with_capacity(zs.len(), reps);
    for (j, &z) in zs.iter().enumerate() {
        let g = gap_without(j, None);
        let se = jackknife_se(JACKKNIFE_GROUPS, |grp| gap_without(j, Some(grp)));
        out.push(z, g, se, 0.0, n);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Point processes

/// Atoms `(k / k_n, S^k / a_n)` for `k = 1..k_n`, dropping sums with modulus
/// at most `1e-12`, which lie outside the punctured line.
pub fn empirical_ppp(blocks: &BlockSums) -> PointMeasure {
    let k = blocks.sums.len() as f64;
    let (times, marks): (Vec<f64>, Vec<f64>) = blocks
        .sums
        .iter()
        .enumerate()
        .map(|(i, s)| ((i + 1) as f64 / k, s / blocks.a_n))
        .filter(|(_, x)| x.abs() > 1e-12)
        .unzip();
    PointMeasure::on_time_line(times, marks).expect("block times lie in (0, 1] and marks are nonzero")
}

/// Mean atom counts of the empirical point process in `{|x| > r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PppCounts {
    /// Target `nu_tail(r)`.
    pub series: EstimateSeries,
    /// Variance-to-mean ratio of the counts for each `r`.
    pub dispersion: Vec<f64>,
}

pub fn ppp_counts(spec: &RegVarSpec, scheme: BlockScheme, rs: &[f64], reps: usize, seed: u64) -> Result<PppCounts> {
    spec.validate()?;
    check_grid("r", rs)?;
    check_reps(reps, 100)?;
    let a_n = norming_constant(spec, scheme.n)?;
    let counts: Vec<Vec<f64>> = map_reps(reps, |i| {
        let ppp = empirical_ppp(&path_block_sums(spec, scheme, a_n, seed, i));
        rs.iter().map(|&r| ppp.count_abs_gt(r) as f64).collect()
    });
    let limit = spec.limit_params();
    let mut series = EstimateSeries::with_capacity(rs.len(), reps);
    let mut dispersion = Vec::with_capacity(rs.len());
    for (j, &r) in rs.iter().enumerate() {
        let c: Vec<f64> = counts.iter().map(|v| v[j]).collect();
        let m = mean_se(&c);
        series.push(r, m.mean, m.std_err, nan_or(limit.map(|l| l.nu_tail(r))), scheme.n);
        dispersion.push(m.std_err * m.std_err * reps as f64 / m.mean);
    }
    Ok(PppCounts { series, dispersion })
}

/// Vague distance between the empirical point process (times dropped) and
/// an independent PRM(nu) restricted to `{|x| > 0.1}`, per replication.
///
/// Every test function of the vague metric vanishes on `|x| <= 0.1`, so
/// the restriction does not change the distance.
pub fn ppp_vague_distances(spec: &RegVarSpec, scheme: BlockScheme, reps: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let limit = spec
        .limit_params()
        .ok_or_else(|| Error::Parameter("no closed-form limit measure for this model".into()))?;
    let a_n = norming_constant(spec, scheme.n)?;
    let d = map_reps(reps, |i| {
        let emp = empirical_ppp(&path_block_sums(spec, scheme, a_n, seed, i)).project();
        let prm = sample_prm_with(&limit, 0.1, &mut rng_for(seed, i as u64, stream::PRM)).map(|p| p.project());
        prm.map(|p| vague_distance(&emp, &p))
    });
    d.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Block trimming

/// Trimming exponent `q = min(1/alpha, (1 - t)/(1 + alpha)) / 2`.
pub fn trim_exponent(alpha: f64, t: f64) -> f64 {
    (1.0 / alpha).min((1.0 - t) / (1.0 + alpha)) / 2.0
}

/// `l_n = ceil(n^q)`, with `n^q` snapped to an integer when it is one up to rounding.
pub fn trim_length(n: usize, q: f64) -> usize {
    let x = (n as f64).powf(q);
    let l = if (x - x.round()).abs() <= 1e-9 * x { x.round() } else { x.ceil() };
    l as usize
}

/// Whether `(beta, t, q)` satisfy the rate requirements of the trimming
/// argument: `k_n = o(n^t)` needs `beta > 1 - t`, and `l_n = o(r_n)` needs `q < beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrimAdmissibility {
    pub t: f64,
    pub q: f64,
    pub block_count_ok: bool,
    pub trim_length_ok: bool,
}

pub fn trim_admissibility(alpha: f64, beta: f64, t: f64) -> TrimAdmissibility {
    let q = trim_exponent(alpha, t);
    TrimAdmissibility {
        t,
        q,
        block_count_ok: beta > 1.0 - t,
        trim_length_ok: q < beta,
    }
}

/// Effect of dropping the last `l_n` observations of every block on the
/// blockwise Laplace functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimResult {
    pub l_n: usize,
    /// `|E exp(-sum f(trimmed)) - E exp(-sum f(full))|`, paired on the same paths.
    pub gap: f64,
    pub gap_se: f64,
    /// `E sum_k min(1, |D_k| / (r a_n))` with `D_k` the dropped part of
    /// block `k` and `r` the tent threshold. Bounds the gap pathwise.
    pub lipschitz_bound: f64,
    pub lipschitz_se: f64,
    /// `8 k_n P(|S_{l_n}| > (r/4) a_n)`.
    pub tail_bound: f64,
    pub tail_bound_se: f64,
}

/// Trimming experiment with `l_n = ceil(n^q)`.
pub fn block_trim_experiment(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    q: f64,
    f: TestFunctionSpec,
    reps: usize,
    seed: u64,
) -> Result<TrimResult> {
    block_trim_gap(spec, scheme, trim_length(scheme.n, q), f, reps, seed)
}

/// Trimming experiment with an explicit trim length.
pub fn block_trim_gap(
    spec: &RegVarSpec,
    scheme: BlockScheme,
    l_n: usize,
    f: TestFunctionSpec,
    reps: usize,
    seed: u64,
) -> Result<TrimResult> {
    spec.validate()?;
    check_reps(reps, 100)?;
    if l_n >= scheme.r_n {
        return Err(Error::Scheme(format!("trim length {l_n} must be below the block length {}", scheme.r_n)));
    }
    let a_n = norming_constant(spec, scheme.n)?;
    let gamma = f.r / 4.0;
    let per_rep: Vec<(f64, f64, f64)> = map_reps(reps, |i| {
        let pb = simulate_blocks(spec, scheme, l_n, seed, i);
        let (mut st, mut sf, mut lip, mut big) = (0.0, 0.0, 0.0, 0.0);
        for (kept, dropped) in pb.kept.iter().zip(&pb.dropped) {
            st += f.eval(kept / a_n);
            sf += f.eval((kept + dropped) / a_n);
            lip += (dropped.abs() / (f.r * a_n)).min(1.0);
            if dropped.abs() > gamma * a_n {
                big += 8.0;
            }
        }
        ((-st).exp() - (-sf).exp(), lip, big)
    });
    let d = mean_se(&per_rep.iter().map(|v| v.0).collect::<Vec<_>>());
    let lip = mean_se(&per_rep.iter().map(|v| v.1).collect::<Vec<_>>());
    let big = mean_se(&per_rep.iter().map(|v| v.2).collect::<Vec<_>>());
    Ok(TrimResult {
        l_n,
        gap: d.mean.abs(),
        gap_se: d.std_err,
        lipschitz_bound: lip.mean,
        lipschitz_se: lip.std_err,
        tail_bound: big.mean,
        tail_bound_se: big.std_err,
    })
}

// ---------------------------------------------------------------------------
// Mixing

/// Known decay of the strong mixing coefficients `alpha_k` of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "lags")]
pub enum MixingRate {
    /// `alpha_k = 0` for all `k >= 1`.
    Independent,
    /// `alpha_k = 0` for `k > m`.
    MDependent(usize),
    /// Geometric decay under standard conditions; documented, not estimated.
    Geometric,
}

/// One documented condition of the limit theorem for a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub condition: &'static str,
    pub status: String,
}

/// Mixing facts and documented conditions for a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingLedger {
    pub rate: MixingRate,
    pub entries: Vec<LedgerEntry>,
    /// `sum_{j <= 30} rho_{floor(2^{j/3})}` for a supplied rho bound.
    pub rho_sum: Option<f64>,
}

impl MixingLedger {
    /// `Some(true)` when `alpha_k` is known to vanish, `Some(false)` when it
    /// is known not to, `None` when only a rate is known.
    pub fn alpha_vanishes(&self, k: usize) -> Option<bool> {
        match self.rate {
            MixingRate::Independent => Some(k >= 1),
            MixingRate::MDependent(m) => Some(k > m),
            MixingRate::Geometric => None,
        }
    }
}

/// Number of terms beyond `j = 0` in the rho series.
pub const RHO_SERIES_TERMS: u32 = 30;

/// `sum_{j=0}^{j_max} rho(floor(2^{j/3}))`.
pub fn rho_series_sum(rho: impl Fn(usize) -> f64, j_max: u32) -> f64 {
    (0..=j_max).map(|j| rho(2f64.powf(j as f64 / 3.0).floor() as usize)).sum()
}

pub fn mixing_ledger(spec: &RegVarSpec) -> MixingLedger {
    let a = spec.alpha;
    let sym = spec.is_symmetric();
    let c5 = if a < 1.0 {
        "not required for alpha < 1".to_string()
    } else if sym {
        "holds: the law is symmetric".to_string()
    } else if a > 1.0 {
        "fails: E X_1 is nonzero for an asymmetric model".to_string()
    } else {
        "assumed; not computed".to_string()
    };
    let (rate, c1, c3, c4) = match &spec.family {
        Family::IidPareto => (
            MixingRate::Independent,
            "holds: i.i.d. with Pareto marginals",
            "holds: independent sequence",
            "holds with c_+ = p, c_- = q",
        ),
        Family::MovingAverage { coeffs } => (
            MixingRate::MDependent(coeffs.len() - 1),
            "holds: finite linear filter of regularly varying innovations",
            "holds: m-dependent sequence",
            "holds; c_+- from the single-large-innovation computation",
        ),
        Family::Garch11 { .. } => (
            MixingRate::Geometric,
            "holds under the Kesten-Goldie conditions; assumed, not checked",
            "assumed; not computed",
            "assumed; not computed",
        ),
        Family::StochVol { .. } => (
            MixingRate::Geometric,
            "holds by Breiman's lemma for the product with a light-tailed factor",
            "assumed; not computed",
            "assumed; not computed",
        ),
    };
    let entry = |condition, status: &str| LedgerEntry {
        condition,
        status: status.to_string(),
    };
    MixingLedger {
        rate,
        entries: vec![
            entry("C1 multivariate regular variation", c1),
            entry("C2 characteristic-function factorization", "estimated by cf_gap"),
            entry("C3 anti-clustering of truncated sums", c3),
            entry("C4 tail limits of partial sums", c4),
            entry("C5 centering", &c5),
        ],
        rho_sum: None,
    }
}

/// [`mixing_ledger`] with the rho series evaluated for a supplied bound `rho(j)`.
pub fn mixing_ledger_with_rho(spec: &RegVarSpec, rho: impl Fn(usize) -> f64) -> MixingLedger {
    let mut l = mixing_ledger(spec);
    l.rho_sum = Some(rho_series_sum(rho, RHO_SERIES_TERMS));
    l
}

/// Sample correlation with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub rho: f64,
    pub std_err: f64,
}

/// Correlation of `tanh(S/a_r)` over two blocks of length `r` whose closest
/// observations are `lag` indices apart, from `reps` fresh paths.
pub fn separated_block_correlation(spec: &RegVarSpec, r: usize, lag: usize, reps: usize, seed: u64) -> Result<Correlation> {
    spec.validate()?;
    check_reps(reps, 100)?;
    if r == 0 || lag == 0 {
        return Err(Error::Domain("block length and lag must be positive".into()));
    }
    let a_r = norming_constant(spec, r)?;
    let start2 = r - 1 + lag;
    let pairs: Vec<(f64, f64)> = map_reps(reps, |i| {
        let mut rng = rng_for(seed, i as u64, stream::PATH);
        let (mut s1, mut s2, mut t) = (0.0, 0.0, 0);
        generate(spec, start2 + r, &mut rng, |x| {
            if t < r {
                s1 += x;
            } else if t >= start2 {
                s2 += x;
            }
            t += 1;
        });
        ((s1 / a_r).tanh(), (s2 / a_r).tanh())
    });
    let n = reps as f64;
    let (m1, m2) = (
        pairs.iter().map(|p| p.0).sum::<f64>() / n,
        pairs.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - m1) * (y - m2);
        sxx += (x - m1) * (x - m1);
        syy += (y - m2) * (y - m2);
    }
    let rho = sxy / (sxx * syy).sqrt();
    Ok(Correlation {
        rho,
        std_err: (1.0 - rho * rho) / (n - 1.0).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Limit paths

/// `sup_t |W_0^(u)(t) - W_0^(v)(t)|` for each `(u, v)` in `pairs`, per
/// replication. All levels of one replication restrict a single PRM sampled
/// at the smallest level.
pub fn coupled_sup_differences(
    params: &LevyMeasureParams,
    pairs: &[(f64, f64)],
    reps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if pairs.is_empty() {
        return Err(Error::Domain("no truncation pairs".into()));
    }
    let levels: Vec<f64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    check_grid("truncation", &levels)?;
    let finest = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let per_rep: Vec<Result<Vec<f64>>> = map_reps(reps, |i| {
        let pts = sample_prm_with(params, finest, &mut rng_for(seed, i as u64, stream::PRM))?;
        pairs
            .iter()
            .map(|&(u, v)| Ok(uniform_distance(&build_levy_path(&pts, params, u)?, &build_levy_path(&pts, params, v)?)))
            .collect()
    });
    let per_rep: Vec<Vec<f64>> = per_rep.into_iter().collect::<Result<_>>()?;
    Ok((0..pairs.len()).map(|j| per_rep.iter().map(|v| v[j]).collect()).collect())
}

/// Median of a sample (mean of the two middle values for even length).
pub fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

/// KS distance between a sample of `W_n(1)` and the law of `W_0(1)`.
pub fn endpoint_ks(samples: &[f64], params: &LevyMeasureParams) -> Result<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let f = cdf_W01_table(params, &s)?;
    Ok(ks_statistic_sorted(&s, &f))
}

/// One row of the convergence study of `W_n` to `W_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub scheme: BlockScheme,
    pub a_n: f64,
    pub c_hat: f64,
    /// KS distance of the empirical law of `W_n(1)` to that of `W_0(1)`.
    pub ks: f64,
    /// Mean and standard error of the J1 distance between `W_n` and its coupled limit path.
    pub j1: MeanSe,
    pub j1_median: f64,
    /// `W_n(1)` for every replication.
    pub endpoints: Vec<f64>,
}

/// Number of fresh blocks behind the tail transform of the coupling.
fn coupling_blocks(k_n: usize) -> usize {
    (200 * k_n).max(200_000)
}

/// Order statistics of `|S_{r_n}|/a_n` above which the coupling uses a Pareto tail.
const COUPLING_TAIL_POINTS: usize = 200;

/// Convergence study at one `n`.
///
/// The J1 coupling keeps the jump times and signs of `W_n` and maps each
/// normalized block sum `y` to the limit jump size with the same tail mass,
/// `nu_tail^{-1}(k_n G_n(|y|))`, where `G_n` is the tail of `|S_{r_n}|/a_n`
/// from fresh blocks (extended with a Pareto tail beyond the 200th largest
/// value). The J1 distance inherits the heavy tail of the largest jump, so
/// its median is reported next to the mean. Jumps above `u_levy` and the compensator give the limit path.
pub fn converge_study(
    spec: &RegVarSpec,
    n: usize,
    beta: f64,
    reps: usize,
    j1_reps: usize,
    u_levy: f64,
    seed: u64,
) -> Result<ConvergeRow> {
    spec.validate()?;
    check_reps(reps, 100)?;
    let params = spec
        .limit_params()
        .ok_or_else(|| Error::Parameter("no closed-form limit measure for this model".into()))?;
    if !(u_levy > 0.0 && u_levy <= 1.0) {
        return Err(Error::Domain(format!("limit path truncation must be in (0, 1], got {u_levy}")));
    }
    let scheme = BlockScheme::from_exponent(n, beta)?;
    let a_n = norming_constant(spec, n)?;
    let c_hat = estimate_centering(spec, scheme, a_n, reps * scheme.k_n, seed)?.c_hat;
    let endpoints = map_reps(reps, |i| {
        let bs = path_block_sums(spec, scheme, a_n, seed, i);
        bs.sums.iter().map(|s| s / a_n - c_hat).sum::<f64>()
    });
    let ks = endpoint_ks(&endpoints, &params)?;

    let m = coupling_blocks(scheme.k_n);
    let mut tail: Vec<f64> = fresh_block_sums(spec, scheme.r_n, a_n, m, seed, stream::COUPLING)
        .into_iter()
        .map(f64::abs)
        .collect();
    tail.sort_by(f64::total_cmp);
    let mf = m as f64;
    let kf = scheme.k_n as f64;
    let top = COUPLING_TAIL_POINTS.min(m);
    let y_top = tail[m - top];
    let tail_mass = |y: f64| -> f64 {
        if y >= y_top {
            top as f64 / mf * (y / y_top).powf(-params.alpha)
        } else {
            (m - tail.partition_point(|&v| v <= y)) as f64 / mf
        }
    };
    let c_total = params.c_plus + params.c_minus;
    let j1s: Vec<Result<f64>> = map_reps(j1_reps.min(reps), |i| {
        let bs = path_block_sums(spec, scheme, a_n, seed, i);
        let w = build_W(&bs, c_hat);
        let (mut times, mut marks) = (Vec::new(), Vec::new());
        for (b, s) in bs.sums.iter().enumerate() {
            let y = s / a_n;
            let mass = kf * tail_mass(y.abs());
            if mass <= 0.0 {
                continue;
            }
            let size = (c_total / mass).powf(1.0 / params.alpha);
            if size > u_levy {
                times.push((b + 1) as f64 / kf);
                marks.push(size.copysign(y));
            }
        }
        let limit = build_levy_path(&PointMeasure::on_time_line(times, marks)?, &params, u_levy)?;
        Ok(j1_distance_exact(&w, &limit))
    });
    let j1s: Vec<f64> = j1s.into_iter().collect::<Result<_>>()?;
    Ok(ConvergeRow {
        scheme,
        a_n,
        c_hat,
        ks,
        j1: mean_se(&j1s),
        j1_median: median(&j1s),
        endpoints,
    })
}

/// Blocks of one simulated path, for callers that need the raw sums.
pub fn simulate_block_sums(spec: &RegVarSpec, scheme: BlockScheme, seed: u64, rep: usize) -> Result<BlockSums> {
    spec.validate()?;
    let a_n = norming_constant(spec, scheme.n)?;
    let mut rng = rng_for(seed, rep as u64, stream::PATH);
    let mut v = Vec::with_capacity(scheme.n);
    generate(spec, scheme.n, &mut rng, |x| v.push(x));
    block_sums_of(&v, scheme, a_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_function_shape() {
        let f = TestFunctionSpec::new(0.5).unwrap();
        assert_eq!(f.eval(0.4), 0.0);
        assert_eq!(f.eval(-0.75), 0.5);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(TestFunctionSpec::new(f64::INFINITY).unwrap().eval(1e300), 0.0);
        assert!(TestFunctionSpec::new(0.0).is_err());
    }

    #[test]
    fn conditional_tail_single_observation() {
        // r = 1: P(X > t) = p t^-alpha, P(X < -t) = q t^-alpha
        let v = conditional_tail(0.5, 0.7, 0.0, 0.0, 4.0);
        assert!((v - 0.35).abs() < 1e-15);
        let v = conditional_tail(0.5, 0.3, 0.0, 0.0, 4.0);
        assert!((v - 0.15).abs() < 1e-15);
        // threshold below 1 is exceeded by every positive draw
        assert_eq!(conditional_tail(0.5, 0.7, 0.0, 0.0, 0.5), 0.7);
    }

    #[test]
    fn conditional_tail_negative_side() {
        // rest sums to 10 with max 2; S > 4 with X_r the largest means
        // X_r > 2, or -6 < X_r < -2
        let v = conditional_tail(1.0, 0.5, 10.0, 2.0, 4.0);
        let expect = 0.5 * 0.5 + 0.5 * (0.5 - 1.0 / 6.0);
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn rho_series_terms() {
        // floor(2^{j/3}) is 1 for j = 0, 1, 2 and 2 for j = 3
        assert_eq!(rho_series_sum(|j| if j == 1 { 1.0 } else { 0.0 }, 30), 3.0);
        assert_eq!(rho_series_sum(|j| if j == 2 { 1.0 } else { 0.0 }, 3), 1.0);
    }

    #[test]
    fn trim_exponent_and_length() {
        let q = trim_exponent(0.5, 0.6);
        assert!((q - 0.4 / 1.5 / 2.0).abs() < 1e-15);
        assert_eq!(trim_length(1000, q), 3);
        assert_eq!(trim_length(100_000, q), 5);
        assert_eq!(trim_length(100, 0.5), 10);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
