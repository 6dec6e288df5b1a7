//! The alpha-stable Levy limit with characteristic triplet `(0, nu, 0)`.
//!
//! `nu` has density `c_+ alpha x^(-alpha-1)` on `(0, inf)` and
//! `c_- alpha (-x)^(-alpha-1)` on `(-inf, 0)`. The limit path is built the
//! way the convergence argument builds it: a Poisson random measure of jumps
//! with modulus above `u`, minus the compensator drift over `u < |x| <= 1`.
//! The law of `W_0(1)` is available through its characteristic function and a
//! Gil-Pelaez inversion.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathio::{csv_err, fmt_f64};
use crate::points::PointMeasure;
use crate::quad::{integrate_complex, Tolerance};
use crate::rng::{rng_from_seed, stream};
use crate::step::StepFunction;

/// Grid size used to represent the compensator drift as a step function.
pub const DRIFT_GRID: usize = 1024;

/// Parameters `(alpha, c_+, c_-)` of the Levy measure `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasureParams {
    pub alpha: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl LevyMeasureParams {
    pub fn new(alpha: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Parameter(format!("alpha = {alpha} not in (0, 2)")));
        }
        if !(c_plus >= 0.0 && c_minus >= 0.0) || !(c_plus + c_minus > 0.0) {
            return Err(Error::Parameter(
                "need c_+ >= 0, c_- >= 0, not both zero".into(),
            ));
        }
        if !(c_plus.is_finite() && c_minus.is_finite()) {
            return Err(Error::Parameter("c_+ and c_- must be finite".into()));
        }
        Ok(LevyMeasureParams {
            alpha,
            c_plus,
            c_minus,
        })
    }

    /// Symmetric measure with `c_+ = c_- = c`.
    pub fn symmetric(alpha: f64, c: f64) -> Result<Self> {
        Self::new(alpha, c, c)
    }

    /// Law of `-W`: the two sides swapped.
    pub fn reflected(&self) -> Self {
        LevyMeasureParams {
            alpha: self.alpha,
            c_plus: self.c_minus,
            c_minus: self.c_plus,
        }
    }

    fn total(&self) -> f64 {
        self.c_plus + self.c_minus
    }

    /// Density of `nu` at `x != 0`.
    pub fn density(&self, x: f64) -> f64 {
        let c = if x > 0.0 { self.c_plus } else { self.c_minus };
        c * self.alpha * x.abs().powf(-self.alpha - 1.0)
    }

    /// `nu({|x| > r}) = (c_+ + c_-) r^-alpha`; infinite for `r <= 0`.
    pub fn nu_tail(&self, r: f64) -> f64 {
        if r <= 0.0 {
            f64::INFINITY
        } else {
            self.total() * r.powf(-self.alpha)
        }
    }

    /// `int_{|x| <= u} |x| nu(dx) = (c_- + c_+) alpha/(1 - alpha) u^(1 - alpha)`, for `alpha < 1`.
    pub fn nu_truncated_abs_moment(&self, u: f64) -> Result<f64> {
        if self.alpha >= 1.0 {
            return Err(Error::DivergentMoment(format!(
                "int |x| nu(dx) near 0 diverges for alpha = {} >= 1",
                self.alpha
            )));
        }
        if !(u > 0.0) {
            return Err(Error::Domain(format!("u must be positive, got {u}")));
        }
        let a = self.alpha;
        Ok(self.total() * a / (1.0 - a) * u.powf(1.0 - a))
    }

    /// `int_{u < |x| <= 1} x nu(dx)` for `u` in `(0, 1]`.
    pub fn compensator_integral(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("u must lie in (0, 1], got {u}")));
        }
        let a = self.alpha;
        let cd = self.c_plus - self.c_minus;
        if cd == 0.0 {
            return Ok(0.0);
        }
        Ok(if a == 1.0 {
            cd * (1.0 / u).ln()
        } else {
            cd * a / (1.0 - a) * (1.0 - u.powf(1.0 - a))
        })
    }
}

/// A truncated limit path together with the jumps it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct LevySample {
    pub points: PointMeasure,
    pub u: f64,
    pub path: StepFunction,
}

/// `PRM(Leb x nu)` restricted to `[0, 1] x {|x| > u}`.
pub fn sample_prm(params: &LevyMeasureParams, u: f64, seed: u64) -> Result<PointMeasure> {
    let mut rng = rng_from_seed(seed, stream::PRM);
    sample_prm_with(params, u, &mut rng)
}

/// [`sample_prm`] drawing from a caller-supplied generator.
pub fn sample_prm_with<R: Rng + ?Sized>(
    params: &LevyMeasureParams,
    u: f64,
    rng: &mut R,
) -> Result<PointMeasure> {
    if !(u > 0.0) {
        return Err(Error::InfiniteIntensity(format!(
            "nu has infinite mass on |x| > {u}"
        )));
    }
    let lambda = params.nu_tail(u);
    let count = if lambda > 0.0 {
        let pois = Poisson::new(lambda).map_err(|e| Error::Parameter(e.to_string()))?;
        pois.sample(rng) as usize
    } else {
        0
    };
    let p_plus = params.c_plus / params.total();
    let mut atoms: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let t = 1.0 - rng.random::<f64>();
            let v: f64 = rng.random();
            let mag = u * (1.0 - v).powf(-1.0 / params.alpha);
            let s: f64 = rng.random();
            (t, if s < p_plus { mag } else { -mag })
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    PointMeasure::on_time_line(
        atoms.iter().map(|a| a.0).collect(),
        atoms.iter().map(|a| a.1).collect(),
    )
}

/// `W_0^(u)(t) = sum_{t_k <= t} j_k 1{|j_k| > u} - t int_{u<|x|<=1} x nu(dx)`,
/// with the drift discretized on a grid of [`DRIFT_GRID`] steps.
pub fn build_levy_path(points: &PointMeasure, params: &LevyMeasureParams, u: f64) -> Result<StepFunction> {
    let times = points
        .times()
        .ok_or_else(|| Error::Domain("Levy path needs time-stamped atoms".into()))?;
    if !(u > 0.0) {
        return Err(Error::Domain(format!("u must be positive, got {u}")));
    }
    let comp = if u < 1.0 {
        params.compensator_integral(u)?
    } else {
        0.0
    };
    let mut atoms: Vec<(f64, f64)> = times
        .iter()
        .zip(points.marks())
        .filter(|(_, x)| x.abs() > u)
        .map(|(&t, &x)| (t, x))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    if atoms.first().is_some_and(|a| a.0 <= 0.0) {
        return Err(Error::Domain("atom times must lie in (0, 1]".into()));
    }
    let grid = if comp != 0.0 { DRIFT_GRID } else { 0 };
    let mut out_t = Vec::with_capacity(atoms.len() + grid);
    let mut out_v = Vec::with_capacity(atoms.len() + grid);
    let (mut i, mut g) = (0usize, 1usize);
    let mut jump_sum = 0.0;
    while i < atoms.len() || g <= grid {
        let tg = if g <= grid { g as f64 / grid as f64 } else { f64::INFINITY };
        let ta = atoms.get(i).map_or(f64::INFINITY, |a| a.0);
        let t = ta.min(tg);
        while i < atoms.len() && atoms[i].0 == t {
            jump_sum += atoms[i].1;
            i += 1;
        }
        if tg == t {
            g += 1;
        }
        let drift = if grid > 0 { comp * (g - 1) as f64 / grid as f64 } else { 0.0 };
        out_t.push(t);
        out_v.push(jump_sum - drift);
    }
    StepFunction::new(0.0, out_t, out_v)
}

/// Draws the PRM and builds the truncated limit path.
pub fn sample_levy(params: &LevyMeasureParams, u: f64, seed: u64) -> Result<LevySample> {
    let points = sample_prm(params, u, seed)?;
    let path = build_levy_path(&points, params, u)?;
    Ok(LevySample { points, u, path })
}

/// `e^{iy} - 1 - iy`, accurate for small `y`.
fn eiy_m1_miy(y: f64) -> Complex64 {
    let half = (0.5 * y).sin();
    let re = -2.0 * half * half;
    let im = if y.abs() < 0.1 {
        let y2 = y * y;
        -y * y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0)))
    } else {
        y.sin() - y
    };
    Complex64::new(re, im)
}

/// `int_0^inf (e^{iy} - 1 - iy 1{y <= 1}) alpha y^(-alpha-1) dy`.
///
/// Quadrature on `(0, 1]` after `y = s^(1/(2-alpha))`, which makes the
/// integrand bounded at 0; quadrature over whole periods on `[1, T]`; the
/// tail beyond `T` by the integration-by-parts series
/// `int_T^inf e^{iy} y^-b dy = i e^{iT} sum_k (-i)^k (b)_k T^(-b-k)`.
pub fn stable_constant(alpha: f64) -> Complex64 {
    let tol = Tolerance {
        abs: 1e-13,
        rel: 1e-13,
        max_depth: 30,
    };
    let m = 1.0 / (2.0 - alpha);
    let head = integrate_complex(
        |s: f64| {
            if s == 0.0 {
                return Complex64::new(-0.5 * alpha * m, 0.0);
            }
            let y = s.powf(m);
            eiy_m1_miy(y) * (alpha * m * y.powf(-alpha - 1.0) * y / s)
        },
        0.0,
        1.0,
        tol,
    );
    let beta = alpha + 1.0;
    let periods = 256usize;
    let two_pi = 2.0 * PI;
    let mut osc = Complex64::new(0.0, 0.0);
    let mut a = 1.0;
    for k in 1..=periods {
        let b = 1.0 + k as f64 * two_pi;
        osc += integrate_complex(|y: f64| Complex64::from_polar(y.powf(-beta), y), a, b, tol);
        a = b;
    }
    let t = a;
    let mut term = Complex64::new(0.0, 1.0) * Complex64::from_polar(t.powf(-beta), t);
    let mut tail = term;
    for k in 0..12 {
        let kf = k as f64;
        term *= Complex64::new(0.0, -(beta + kf) / t);
        tail += term;
    }
    head + alpha * (osc + tail) - 1.0
}

/// Log-characteristic function `psi` extended analytically to `Re z > 0`,
/// given the stable constant `k` of `alpha`.
fn exponent_analytic(params: &LevyMeasureParams, k: Complex64, z: Complex64) -> Complex64 {
    let (a, cp, cm) = (params.alpha, params.c_plus, params.c_minus);
    let i = Complex64::new(0.0, 1.0);
    if a == 1.0 {
        let zl = z * z.ln();
        let phi = z * k - i * zl;
        let phi_bar = z * k.conj() + i * zl;
        cp * phi + cm * phi_bar
    } else {
        let za = (a * z.ln()).exp();
        let lin = i * a * (z - za) / (1.0 - a);
        let phi = za * k - lin;
        let phi_bar = za * k.conj() + lin;
        cp * phi + cm * phi_bar
    }
}

/// `log E exp(iz W_0(1)) = int (e^{izx} - 1 - izx 1_{[-1,1]}(x)) nu(dx)`.
pub fn char_exponent(params: &LevyMeasureParams, z: f64) -> Complex64 {
    if z == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let k = stable_constant(params.alpha);
    let v = exponent_analytic(params, k, Complex64::new(z.abs(), 0.0));
    if z > 0.0 {
        v
    } else {
        v.conj()
    }
}

/// Characteristic function of `W_0(1)`.
#[allow(non_snake_case)]
pub fn cf_W01(params: &LevyMeasureParams, z: f64) -> Complex64 {
    char_exponent(params, z).exp()
}

/// Distribution function of `W_0(1)`, accurate to about `1e-8`.
///
/// Gil-Pelaez inversion with the integration ray rotated into the lower
/// half-plane, `z = t e^{-i theta}`:
/// `F(x) = 1/2 - (1/pi) (int_0^inf Im(e^{-izx} phi(z)) dt/t - theta)`.
/// The angle is chosen so that both the stable part and the linear part of
/// the exponent decay along the ray; when the linear coefficient would grow,
/// the law of `-W` is inverted instead. For `alpha = 1` with `c_+ != c_-`
/// the real axis is used. The result is clamped into `[0, 1]`.
#[allow(non_snake_case)]
pub fn cdf_W01(params: &LevyMeasureParams, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("x is NaN".into()));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let k = stable_constant(params.alpha);
    Ok(cdf_with_constant(params, k, x).clamp(0.0, 1.0))
}

fn cdf_with_constant(params: &LevyMeasureParams, k: Complex64, x: f64) -> f64 {
    let a = params.alpha;
    let cd = params.c_plus - params.c_minus;
    if a == 1.0 {
        if cd == 0.0 {
            if x < 0.0 {
                return 1.0 - gil_pelaez(&params.reflected(), k, -x, 0.25 * PI);
            }
            return gil_pelaez(params, k, x, 0.25 * PI);
        }
        return gil_pelaez(params, k, x, 0.0);
    }
    let shift = x + a * cd / (1.0 - a);
    if shift < 0.0 {
        let r = params.reflected();
        return 1.0 - cdf_with_constant(&r, k, -x);
    }
    // A = -Gamma(1-a)(c_+ e^{-i pi a/2} + c_- e^{i pi a/2}) is the z^a coefficient
    let i = Complex64::new(0.0, 1.0);
    let coef = params.c_plus * (k + i * a / (1.0 - a)) + params.c_minus * (k.conj() - i * a / (1.0 - a));
    let mut omega = coef.arg();
    if omega < 0.0 {
        omega += 2.0 * PI;
    }
    let theta = (0.5 * (omega - 0.5 * PI) / a).clamp(0.0, 0.5 * PI);
    gil_pelaez(params, k, x, theta)
}

fn gil_pelaez(params: &LevyMeasureParams, k: Complex64, x: f64, theta: f64) -> f64 {
    let a = params.alpha;
    let rot = Complex64::from_polar(1.0, -theta);
    let i = Complex64::new(0.0, 1.0);
    // t = s^m; t^a = s for a < 1
    let m = if a < 1.0 { 1.0 / a } else { 1.0 };
    let expo = |s: f64| -> Complex64 {
        let z = rot * s.powf(m);
        exponent_analytic(params, k, z) - i * x * z
    };
    let integrand = |s: f64| -> Complex64 {
        if s == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(expo(s).exp().im * m / s, 0.0)
    };
    // panel width from the scale where the exponent reaches modulus ~ 1
    let scale = {
        let mut s = 1.0;
        for _ in 0..200 {
            let v = expo(s).norm();
            if v > 2.0 {
                s *= 0.5;
            } else if v < 0.5 {
                s *= 2.0;
            } else {
                break;
            }
        }
        s
    };
    let width = 0.5 * scale;
    let tol = Tolerance {
        abs: 1e-11,
        rel: 1e-10,
        max_depth: 40,
    };
    let mut total = 0.0;
    let mut lo = 0.0;
    for _ in 0..20_000 {
        let hi = lo + width;
        total += integrate_complex(integrand, lo, hi, tol).re;
        lo = hi;
        let bound = expo(lo).re.exp() * m / lo;
        if bound * width < 1e-15 && expo(lo + width).re < expo(lo).re {
            break;
        }
    }
    0.5 - (total - theta) / PI
}

/// `F` on a grid, forced non-decreasing by a running maximum.
#[allow(non_snake_case)]
pub fn cdf_W01_table(params: &LevyMeasureParams, xs: &[f64]) -> Result<Vec<f64>> {
    let k = stable_constant(params.alpha);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; xs.len()];
    let mut run = 0.0f64;
    for idx in order {
        let x = xs[idx];
        if x.is_nan() {
            return Err(Error::Domain("x is NaN".into()));
        }
        let f = if x == f64::INFINITY {
            1.0
        } else if x == f64::NEG_INFINITY {
            0.0
        } else {
            cdf_with_constant(params, k, x).clamp(0.0, 1.0)
        };
        run = run.max(f);
        out[idx] = run;
    }
    Ok(out)
}

/// CSV table `(z, re, im)` of the characteristic function.
pub fn write_cf_table<W: Write>(params: &LevyMeasureParams, zs: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["z", "re", "im"]).map_err(csv_err)?;
    for &z in zs {
        let c = cf_W01(params, z);
        out.write_record([fmt_f64(z), fmt_f64(c.re), fmt_f64(c.im)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// CSV table `(x, F)` of the distribution function.
pub fn write_cdf_table<W: Write>(params: &LevyMeasureParams, xs: &[f64], w: W) -> Result<()> {
    let f = cdf_W01_table(params, xs)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "F"]).map_err(csv_err)?;
    for (&x, &fx) in xs.iter().zip(&f) {
        out.write_record([fmt_f64(x), fmt_f64(fx)]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
