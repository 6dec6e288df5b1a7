//! Strictly stationary regularly varying sequences.
//!
//! Four families are built in: i.i.d. skewed Pareto, finite moving averages
//! with nonnegative coefficients, GARCH(1,1) (or its squares) and a
//! stochastic-volatility model with AR(1) Gaussian log-volatility. All
//! innovations have pure Pareto tails, so norming constants and limit
//! constants are available in closed form wherever the model allows it.
//!
//! The stochastic-volatility model is one representative choice,
//! `X_i = exp(h_i) Z_i` with `h_i = phi h_{i-1} + sigma eps_i`; it keeps the
//! innovation tail index but is not claimed to be canonical.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::LevyMeasureParams;
use crate::rng::{rng_from_seed, stream};

/// Default number of pilot draws used to estimate `a_n` by a quantile.
pub const DEFAULT_PILOT_SIZE: usize = 1_000_000;

/// Model family of a [`RegVarSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    IidPareto,
    /// `X_t = sum_j coeffs[j] Z_{t-j}` with skewed Pareto innovations.
    MovingAverage { coeffs: Vec<f64> },
    /// `X_t = sigma_t Z_t`, `sigma_t^2 = a0 + a1 X_{t-1}^2 + b1 sigma_{t-1}^2`.
    Garch11 { a0: f64, a1: f64, b1: f64, squared: bool },
    /// `X_t = exp(h_t) Z_t`, `h_t = phi h_{t-1} + scale eps_t`.
    StochVol { phi: f64, scale: f64 },
}

/// A regularly varying stationary model: tail index, tail balance, family.
///
/// For `MovingAverage` and `StochVol`, `alpha` and `p` describe the Pareto
/// innovations; both families inherit them as marginal tail parameters.
/// For `Garch11` they are derived from the Kesten exponent, see
/// [`RegVarSpec::garch11`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegVarSpec {
    pub alpha: f64,
    pub p: f64,
    pub family: Family,
    /// Burn-in discarded by recursive models; `None` uses `max(1000, 10 ceil(sqrt n))`.
    pub burn_in: Option<usize>,
    /// Pilot sample size for quantile-based norming.
    pub pilot_size: usize,
}

impl RegVarSpec {
    /// i.i.d. skewed Pareto: `P(X > x) = p x^-alpha`, `P(X < -x) = q x^-alpha` for `x >= 1`.
    pub fn iid_pareto(alpha: f64, p: f64) -> Result<Self> {
        Self::build(alpha, p, Family::IidPareto)
    }

    pub fn moving_average(alpha: f64, p: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::build(alpha, p, Family::MovingAverage { coeffs })
    }

    /// GARCH(1,1) with standard normal noise. The tail index is `2 kappa`,
    /// or `kappa` when `squared`, and must land in `(0, 2)`.
    pub fn garch11(a0: f64, a1: f64, b1: f64, squared: bool) -> Result<Self> {
        let kappa = garch_tail_index(a0, a1, b1)?;
        let alpha = if squared { kappa } else { 2.0 * kappa };
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::ModelOutsideRange(format!(
                "GARCH tail index {alpha} is outside (0, 2)"
            )));
        }
        let p = if squared { 1.0 } else { 0.5 };
        Self::build(alpha, p, Family::Garch11 { a0, a1, b1, squared })
    }

    pub fn stoch_vol(alpha: f64, p: f64, phi: f64, scale: f64) -> Result<Self> {
        Self::build(alpha, p, Family::StochVol { phi, scale })
    }

    fn build(alpha: f64, p: f64, family: Family) -> Result<Self> {
        let spec = RegVarSpec {
            alpha,
            p,
            family,
            burn_in: None,
            pilot_size: DEFAULT_PILOT_SIZE,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn with_pilot_size(mut self, pilot_size: usize) -> Self {
        self.pilot_size = pilot_size;
        self
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// Checks the model invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::Parameter(format!("alpha = {} not in (0, 2)", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Parameter(format!("p = {} not in [0, 1]", self.p)));
        }
        if self.pilot_size == 0 {
            return Err(Error::Parameter("pilot size must be positive".into()));
        }
        match &self.family {
            Family::IidPareto => {}
            Family::MovingAverage { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Parameter("moving average needs coefficients".into()));
                }
                if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    return Err(Error::Parameter(
                        "moving average coefficients must be finite and nonnegative".into(),
                    ));
                }
                if coeffs.iter().all(|&c| c == 0.0) {
                    return Err(Error::Parameter("moving average coefficients are all zero".into()));
                }
            }
            &Family::Garch11 { a0, a1, b1, .. } => {
                if !(a0 > 0.0 && a1 >= 0.0 && b1 >= 0.0) {
                    return Err(Error::Parameter("GARCH needs a0 > 0, a1 >= 0, b1 >= 0".into()));
                }
                if garch_log_moment(a1, b1) >= 0.0 {
                    return Err(Error::Parameter(
                        "GARCH parameters admit no stationary solution (E log(a1 Z^2 + b1) >= 0)"
                            .into(),
                    ));
                }
            }
            &Family::StochVol { phi, scale } => {
                if !(phi > -1.0 && phi < 1.0) {
                    return Err(Error::Parameter(format!("phi = {phi} not in (-1, 1)")));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Parameter(format!("scale = {scale} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// True when `X` and `-X` have the same joint law.
    pub fn is_symmetric(&self) -> bool {
        match self.family {
            Family::Garch11 { squared, .. } => !squared,
            _ => self.p == 0.5,
        }
    }

    /// Burn-in length for a path of length `n`.
    pub fn burn_in_for(&self, n: usize) -> usize {
        match self.family {
            Family::Garch11 { .. } => self
                .burn_in
                .unwrap_or_else(|| (10 * (n as f64).sqrt().ceil() as usize).max(1000)),
            _ => 0,
        }
    }

    /// Limit Levy measure of the block sums under the norming of
    /// [`norming_constant`], when it is known in closed form.
    ///
    /// i.i.d.: `c_+ = p`, `c_- = q`. Moving average with nonnegative
    /// coefficients: one large innovation enters a block with weight
    /// `sum c_j`, so `c_+ = p (sum c_j)^alpha / sum c_j^alpha`.
    pub fn limit_params(&self) -> Option<LevyMeasureParams> {
        let a = self.alpha;
        match &self.family {
            Family::IidPareto => LevyMeasureParams::new(a, self.p, self.q()).ok(),
            Family::MovingAverage { coeffs } => {
                let s: f64 = coeffs.iter().sum();
                let sa: f64 = coeffs.iter().map(|c| c.powf(a)).sum();
                let w = s.powf(a) / sa;
                LevyMeasureParams::new(a, self.p * w, self.q() * w).ok()
            }
            _ => None,
        }
    }
}

/// A simulated path together with what is needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub seed: u64,
    pub spec: RegVarSpec,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draws `n` stationary observations from `spec` with the given seed.
pub fn sample(spec: &RegVarSpec, n: usize, seed: u64) -> Result<SamplePath> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed, stream::PATH);
    let mut values = Vec::with_capacity(n);
    generate(spec, n, &mut rng, |x| values.push(x));
    Ok(SamplePath {
        values,
        seed,
        spec: spec.clone(),
    })
}

/// Skewed Pareto draw: unit Pareto magnitude, positive sign with probability `p`.
#[inline]
pub fn skewed_pareto<R: Rng + ?Sized>(rng: &mut R, alpha: f64, p: f64) -> f64 {
    let u: f64 = rng.random();
    let mag = (1.0 - u).powf(-1.0 / alpha);
    let s: f64 = rng.random();
    if s < p {
        mag
    } else {
        -mag
    }
}

/// Streams `n` stationary observations from `spec` into `emit`.
///
/// The spec is assumed valid. Used by [`sample`] and by fresh-block
/// estimators that only need running sums.
pub fn generate<R, F>(spec: &RegVarSpec, n: usize, rng: &mut R, mut emit: F)
where
    R: Rng + ?Sized,
    F: FnMut(f64),
{
    let (alpha, p) = (spec.alpha, spec.p);
    match &spec.family {
        Family::IidPareto => {
            for _ in 0..n {
                emit(skewed_pareto(rng, alpha, p));
            }
        }
        Family::MovingAverage { coeffs } => {
            let m = coeffs.len();
            // ring[(t + j) % m] holds Z_{t-j} once Z_t is written at slot t % m
            let mut ring: Vec<f64> = (0..m).map(|_| skewed_pareto(rng, alpha, p)).collect();
            for t in 0..n {
                let slot = t % m;
                ring[slot] = skewed_pareto(rng, alpha, p);
                let mut x = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    x += c * ring[(slot + m - j) % m];
                }
                emit(x);
            }
        }
        &Family::Garch11 { a0, a1, b1, squared } => {
            let mut sigma2 = if a1 + b1 < 1.0 { a0 / (1.0 - a1 - b1) } else { a0 };
            let burn = spec.burn_in_for(n);
            for t in 0..burn + n {
                let z: f64 = rng.sample(StandardNormal);
                let x = sigma2.sqrt() * z;
                if t >= burn {
                    emit(if squared { x * x } else { x });
                }
                sigma2 = a0 + a1 * x * x + b1 * sigma2;
            }
        }
        &Family::StochVol { phi, scale } => {
            // exact stationary start, so no burn-in is needed
            let sd0 = scale / (1.0 - phi * phi).sqrt();
            let e0: f64 = rng.sample(StandardNormal);
            let mut h = sd0 * e0;
            for t in 0..n {
                if t > 0 {
                    let e: f64 = rng.sample(StandardNormal);
                    h = phi * h + scale * e;
                }
                emit(h.exp() * skewed_pareto(rng, alpha, p));
            }
        }
    }
}

/// Norming constant `a_n` with `n P(|X_1| > a_n) -> 1`.
///
/// i.i.d. Pareto: exact `n^(1/alpha)`. Moving average: the tail-equivalence
/// solution `(n sum c_j^alpha)^(1/alpha)`. GARCH and stochastic volatility:
/// the `(1 - 1/n)`-quantile of `|X_1|` from a pilot sample, cached per
/// `(spec, n)`.
pub fn norming_constant(spec: &RegVarSpec, n: usize) -> Result<f64> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let nf = n as f64;
    match &spec.family {
        Family::IidPareto => Ok(nf.powf(1.0 / spec.alpha)),
        Family::MovingAverage { coeffs } => {
            let sa: f64 = coeffs.iter().map(|c| c.powf(spec.alpha)).sum();
            Ok((nf * sa).powf(1.0 / spec.alpha))
        }
        _ => cached_pilot(spec, n),
    }
}

fn cached_pilot(spec: &RegVarSpec, n: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<String, f64>>> = OnceLock::new();
    let key = format!("{spec:?}|{n}");
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&a) = cache.lock().expect("norming cache poisoned").get(&key) {
        return Ok(a);
    }
    let a = pilot_norming_constant(spec, n, spec.pilot_size)?;
    cache.lock().expect("norming cache poisoned").insert(key, a);
    Ok(a)
}

/// `(1 - 1/n)`-quantile of `|X_1|` from one pilot path of `pilot_size` draws.
pub fn pilot_norming_constant(spec: &RegVarSpec, n: usize, pilot_size: usize) -> Result<f64> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > pilot_size {
        return Err(Error::Precision(format!(
            "pilot of {pilot_size} draws cannot resolve the 1 - 1/{n} quantile"
        )));
    }
    let mut rng = rng_from_seed(0x5_EED0_FA11_u64, stream::PILOT);
    let mut abs = Vec::with_capacity(pilot_size);
    generate(spec, pilot_size, &mut rng, |x| abs.push(x.abs()));
    let nf = pilot_size as f64;
    let j = (nf - nf / n as f64).ceil().max(1.0) as usize;
    let (_, q, _) = abs.select_nth_unstable_by(j - 1, f64::total_cmp);
    Ok(*q)
}

/// Hill estimate of the tail index from the `k` largest values of `|x|`.
pub fn hill_tail_index(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= values.len() {
        return Err(Error::Domain(format!(
            "need 0 < k < {} order statistics, got {k}",
            values.len()
        )));
    }
    let mut abs: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let thresh = abs[k];
    if thresh <= 0.0 {
        return Err(Error::Domain("threshold order statistic is zero".into()));
    }
    let s: f64 = abs[..k].iter().map(|x| (x / thresh).ln()).sum();
    Ok(k as f64 / s)
}

/// Gauss-Hermite rule for `int f(x) exp(-x^2) dx` with `n` nodes.
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    // Newton iteration on orthonormal Hermite polynomials
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * out[0].0,
            3 => 1.91 * z - 0.91 * out[1].0,
            _ => 2.0 * z - out[i - 2].0,
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / (pp * pp);
        out[i] = (z, w);
        out[n - 1 - i] = (-z, w);
    }
    out
}

fn gh_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(128))
}

/// `E g(Z)` for standard normal `Z` by Gauss-Hermite quadrature.
fn normal_expectation(g: impl Fn(f64) -> f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    gh_rule().iter().map(|&(x, w)| w * g(s2 * x)).sum::<f64>() / std::f64::consts::PI.sqrt()
}

/// `E log(a1 Z^2 + b1)`.
fn garch_log_moment(a1: f64, b1: f64) -> f64 {
    if a1 == 0.0 {
        return if b1 > 0.0 { b1.ln() } else { f64::NEG_INFINITY };
    }
    if b1 == 0.0 {
        // E log Z^2 = -gamma - ln 2
        return a1.ln() - 0.577_215_664_901_532_9 - std::f64::consts::LN_2;
    }
    normal_expectation(|z| (a1 * z * z + b1).ln())
}

/// `E (a1 Z^2 + b1)^kappa`.
pub fn garch_moment(a1: f64, b1: f64, kappa: f64) -> f64 {
    normal_expectation(|z| (a1 * z * z + b1).powf(kappa))
}

/// Kesten exponent of GARCH(1,1): the positive root of `E (a1 Z^2 + b1)^kappa = 1`.
///
/// The volatility `sigma^2` then has tail index `kappa`, `X` has `2 kappa`
/// and `X^2` has `kappa`.
pub fn garch_tail_index(a0: f64, a1: f64, b1: f64) -> Result<f64> {
    const CAP: f64 = 50.0;
    if !(a0 > 0.0 && a1 > 0.0 && b1 >= 0.0) {
        return Err(Error::Parameter("need a0 > 0, a1 > 0, b1 >= 0".into()));
    }
    if garch_log_moment(a1, b1) >= 0.0 {
        return Err(Error::Parameter(
            "stationarity violated: E log(a1 Z^2 + b1) >= 0".into(),
        ));
    }
    let h = |k: f64| garch_moment(a1, b1, k) - 1.0;
    let mut hi = 0.5;
    while h(hi) < 0.0 {
        if hi >= CAP {
            return Err(Error::ModelOutsideRange(format!(
                "no Kesten root in (0, {CAP}]: light-tailed regime"
            )));
        }
        hi = (hi * 2.0).min(CAP);
    }
    // h < 0 just right of zero since h'(0) = E log(a1 Z^2 + b1) < 0
    let mut lo = hi / 2.0;
    while lo > 1e-12 && h(lo) >= 0.0 {
        lo /= 2.0;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = h(mid);
        if v.abs() < 1e-8 && hi - lo < 1e-10 {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_pareto_support_and_median() {
        let spec = RegVarSpec::iid_pareto(1.0, 1.0).unwrap();
        let path = sample(&spec, 100_000, 11).unwrap();
        assert!(path.values.iter().all(|&x| x >= 1.0));
        let mut v = path.values.clone();
        v.sort_by(f64::total_cmp);
        let med = v[v.len() / 2];
        // the density at the median is 1/4, so sd(median) = 1/(2 f sqrt n) ~ 0.0063
        assert!((med - 2.0).abs() < 0.03, "median {med}");
    }

    #[test]
    fn sampling_is_deterministic() {
        for spec in [
            RegVarSpec::iid_pareto(0.5, 0.7).unwrap(),
            RegVarSpec::moving_average(0.5, 0.5, vec![1.0, 1.0]).unwrap(),
            RegVarSpec::garch11(1.0, 0.5, 0.3, true).unwrap(),
            RegVarSpec::garch11(1.0, 1.2, 0.0, false).unwrap(),
            RegVarSpec::stoch_vol(1.2, 0.5, 0.8, 0.3).unwrap(),
        ] {
            let a = sample(&spec, 500, 99).unwrap();
            let b = sample(&spec, 500, 99).unwrap();
            assert_eq!(a, b);
            let c = sample(&spec, 500, 100).unwrap();
            assert_ne!(a.values, c.values);
        }
    }

    #[test]
    fn zero_length_and_bad_specs_are_rejected() {
        let spec = RegVarSpec::iid_pareto(1.0, 1.0).unwrap();
        assert!(matches!(sample(&spec, 0, 1), Err(Error::Domain(_))));
        assert!(matches!(RegVarSpec::iid_pareto(2.0, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(RegVarSpec::iid_pareto(1.0, 1.5), Err(Error::Parameter(_))));
        assert!(matches!(
            RegVarSpec::moving_average(1.0, 0.5, vec![1.0, -0.5]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            RegVarSpec::stoch_vol(1.0, 0.5, 1.0, 0.3),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn moving_average_tail_doubles() {
        // brute-force oracle: compare exceedance counts of X and of one innovation
        let spec = RegVarSpec::moving_average(1.0, 0.5, vec![1.0, 1.0]).unwrap();
        let n = 2_000_000;
        let path = sample(&spec, n, 5).unwrap();
        let x = 200.0;
        let count = path.values.iter().filter(|v| v.abs() > x).count() as f64;
        let ratio = count / (n as f64 / x);
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn norming_constants() {
        let s = RegVarSpec::iid_pareto(0.5, 1.0).unwrap();
        assert!((norming_constant(&s, 10_000).unwrap() - 1e8).abs() < 1e-4);
        let s1 = RegVarSpec::iid_pareto(1.0, 1.0).unwrap();
        assert_eq!(norming_constant(&s1, 1).unwrap(), 1.0);
        assert!(matches!(norming_constant(&s1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn pilot_matches_tail_doubling() {
        let spec = RegVarSpec::moving_average(1.0, 0.5, vec![1.0, 1.0]).unwrap();
        let analytic = norming_constant(&spec, 10_000).unwrap();
        assert!((analytic - 2e4).abs() < 1e-6);
        let pilot = pilot_norming_constant(&spec, 10_000, 1_000_000).unwrap();
        assert!((pilot / 2e4 - 1.0).abs() < 0.1, "pilot {pilot}");
        assert!(matches!(
            pilot_norming_constant(&spec, 2_000_000, 1_000_000),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn gauss_hermite_integrates_moments() {
        assert!((normal_expectation(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!((normal_expectation(|z| z * z) - 1.0).abs() < 1e-12);
        assert!((normal_expectation(|z| z.powi(4)) - 3.0).abs() < 1e-11);
        assert!((normal_expectation(|z| z.powi(8)) - 105.0).abs() < 1e-9);
    }

    #[test]
    fn kesten_exponent_closed_form() {
        // 2^k Gamma(k + 1/2) / sqrt(pi) = 1 at k = 1
        let k = garch_tail_index(1.0, 1.0, 0.0).unwrap();
        assert!((k - 1.0).abs() < 1e-7, "kappa {k}");
    }

    #[test]
    fn kesten_exponent_light_tail_is_out_of_range() {
        assert!(matches!(
            garch_tail_index(1.0, 1e-3, 0.5),
            Err(Error::ModelOutsideRange(_))
        ));
        assert!(matches!(garch_tail_index(1.0, 3.0, 0.9), Err(Error::Parameter(_))));
    }

    #[test]
    fn kesten_exponent_mc_oracle() {
        use rand::SeedableRng;
        let (a1, b1) = (0.5, 0.3);
        let k = garch_tail_index(1.0, a1, b1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 10_000_000;
        let mut s = 0.0;
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            s += (a1 * z * z + b1).powf(k);
        }
        let m = s / n as f64;
        assert!((m - 1.0).abs() < 1e-3 * 3.0, "MC moment {m} at kappa {k}");
    }

    #[test]
    fn hill_recovers_pareto_index() {
        let spec = RegVarSpec::iid_pareto(1.5, 0.5).unwrap();
        let path = sample(&spec, 100_000, 2).unwrap();
        let h = hill_tail_index(&path.values, 1000).unwrap();
        assert!((h - 1.5).abs() < 0.15, "hill {h}");
    }
}
