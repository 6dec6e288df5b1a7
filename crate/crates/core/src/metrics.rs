//! Distances between step functions and between point measures.
//!
//! # J1 for step functions
//!
//! Let `x` jump at `s_1 < ... < s_p` to levels `x_1..x_p` (level `x_0`
//! before), and `y` at `t_1 < ... < t_q` to `y_1..y_q`. A time change moves
//! the jumps of `x` to `sigma_i`, and `||lambda - e||` is `max |sigma_i - s_i|`
//! for the piecewise-linear `lambda` through the matched points. The merged
//! order of the `sigma_i` and `t_j` is a monotone lattice path from `(0, 0)`
//! to `(p, q)`, and every visited state `(a, b)` is a piece where `x o lambda`
//! equals `x_a` and `y` equals `y_b`. Steps:
//!
//! * skip-x `(i-1, b) -> (i, b)`: `sigma_i` falls in the gap `(t_b, t_{b+1})`
//!   (with `t_0 = 0`, `t_{q+1} = 1`), costing `dist(s_i, gap)`;
//! * skip-y `(a, j-1) -> (a, j)`: free, the cost is carried by the x jumps;
//! * match `(i-1, j-1) -> (i, j)`: `sigma_i = t_j`, costing `|s_i - t_j|`.
//!
//! A jump at time 1 must stay at 1, so it can only be matched with a jump of
//! the other function at time 1 or placed after every jump of the other
//! function. The distance is the minimum over paths of the largest state or
//! step cost. [`j1_distance`] bisects on that cost with a reachability DP;
//! [`j1_distance_exact`] solves the same min-max recursion directly.

use crate::error::{Error, Result};
use crate::points::PointMeasure;
use crate::step::StepFunction;

/// Default bisection tolerance for [`j1_distance`].
pub const DEFAULT_J1_TOL: f64 = 1e-6;

/// `sup_t |x(t) - y(t)|`, exact over the merged breakpoints.
pub fn uniform_distance(x: &StepFunction, y: &StepFunction) -> f64 {
    let (xt, xv) = (x.jump_times(), x.post_values());
    let (yt, yv) = (y.jump_times(), y.post_values());
    let (mut i, mut j) = (0, 0);
    let (mut a, mut b) = (x.initial(), y.initial());
    let mut best = (a - b).abs();
    while i < xt.len() || j < yt.len() {
        let next_x = xt.get(i).copied().unwrap_or(f64::INFINITY);
        let next_y = yt.get(j).copied().unwrap_or(f64::INFINITY);
        let t = next_x.min(next_y);
        if next_x == t {
            a = xv[i];
            i += 1;
        }
        if next_y == t {
            b = yv[j];
            j += 1;
        }
        best = best.max((a - b).abs());
    }
    best
}

/// Jump data of one function as used by the lattice DP.
struct Jumps<'a> {
    times: &'a [f64],
    levels: Vec<f64>,
}

impl<'a> Jumps<'a> {
    fn of(f: &'a StepFunction) -> Self {
        Jumps {
            times: f.jump_times(),
            levels: f.levels().collect(),
        }
    }

    fn pinned(&self, i: usize) -> bool {
        self.times[i - 1] == 1.0
    }
}

/// Cost of placing jump `i` of `x` in the `b`-th gap of `y`.
fn skip_cost(x: &Jumps, y: &Jumps, i: usize, b: usize) -> f64 {
    let q = y.times.len();
    let lo = if b == 0 { 0.0 } else { y.times[b - 1] };
    let hi = if b == q { 1.0 } else { y.times[b] };
    if x.pinned(i) {
        // sigma_i = 1 is only possible in the last gap, and only if it is nonempty
        return if b == q && lo < 1.0 { 0.0 } else { f64::INFINITY };
    }
    if b == q && lo == 1.0 {
        return f64::INFINITY;
    }
    let s = x.times[i - 1];
    if s < lo {
        lo - s
    } else if s > hi {
        s - hi
    } else {
        0.0
    }
}

fn match_cost(x: &Jumps, y: &Jumps, i: usize, j: usize) -> f64 {
    match (x.pinned(i), y.pinned(j)) {
        (true, true) => 0.0,
        (false, false) => (x.times[i - 1] - y.times[j - 1]).abs(),
        _ => f64::INFINITY,
    }
}

/// Exact J1 distance between step functions by min-max dynamic programming.
pub fn j1_distance_exact(x: &StepFunction, y: &StepFunction) -> f64 {
    let xj = Jumps::of(x);
    let yj = Jumps::of(y);
    let (p, q) = (xj.times.len(), yj.times.len());
    let mut prev = vec![f64::INFINITY; q + 1];
    let mut cur = vec![f64::INFINITY; q + 1];
    for a in 0..=p {
        for b in 0..=q {
            let mut best = f64::INFINITY;
            if a == 0 && b == 0 {
                best = 0.0;
            }
            if a > 0 {
                best = best.min(prev[b].max(skip_cost(&xj, &yj, a, b)));
                if b > 0 {
                    best = best.min(prev[b - 1].max(match_cost(&xj, &yj, a, b)));
                }
            }
            if b > 0 {
                best = best.min(cur[b - 1]);
            }
            cur[b] = best.max((xj.levels[a] - yj.levels[b]).abs());
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[q]
}

/// Whether some time change achieves `max(||x o lambda - y||, ||lambda - e||) <= delta`.
pub fn j1_feasible(x: &StepFunction, y: &StepFunction, delta: f64) -> bool {
    let xj = Jumps::of(x);
    let yj = Jumps::of(y);
    let (p, q) = (xj.times.len(), yj.times.len());
    let mut prev = vec![false; q + 1];
    let mut cur = vec![false; q + 1];
    for a in 0..=p {
        for b in 0..=q {
            let ok_state = (xj.levels[a] - yj.levels[b]).abs() <= delta;
            let reach = (a == 0 && b == 0)
                || (a > 0 && prev[b] && skip_cost(&xj, &yj, a, b) <= delta)
                || (a > 0 && b > 0 && prev[b - 1] && match_cost(&xj, &yj, a, b) <= delta)
                || (b > 0 && cur[b - 1]);
            cur[b] = ok_state && reach;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[q]
}

/// J1 distance within `tol` by bisection on `[0, uniform_distance]` with [`j1_feasible`].
///
/// Returns the upper end of the final bracket, so the result is always an
/// attainable value and never below the true distance.
pub fn j1_distance(x: &StepFunction, y: &StepFunction, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if j1_feasible(x, y, 0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, uniform_distance(x, y));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if j1_feasible(x, y, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The metric on the punctured extended line:
/// `max(|1/|x| - 1/|y||, |sign x - sign y|)`, with `1/|inf| = 0`.
pub fn rho_metric(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 || y == 0.0 || x.is_nan() || y.is_nan() {
        return Err(Error::Domain("rho is defined on nonzero points only".into()));
    }
    let inv = |z: f64| if z.is_infinite() { 0.0 } else { 1.0 / z.abs() };
    let sign = (x.signum() - y.signum()).abs();
    Ok((inv(x) - inv(y)).abs().max(sign))
}

/// Number of terms in the test-function family of [`vague_distance`].
pub const VAGUE_TERMS: u32 = 32;

/// Scale exponent `e_k = (ceil(k/2) - 4)/2` of the `k`-th test function.
fn vague_scale_exponent(k: u32) -> f64 {
    (k.div_ceil(2) as f64 - 4.0) / 2.0
}

/// Test function `f_k` of the vague metric, `k >= 1`.
///
/// The tent `clamp(2 - |2^e/|x| - 1|, 0, 1)` with `e = (ceil(k/2) - 4)/2`
/// equals 1 for `|x| >= 2^(e-1)` and 0 for `|x| <= 2^e/3`. Scales step by
/// half octaves from `2^-1.5` to `2^6`, so every point with `|x|` between
/// about 0.12 and 32 lies inside some transition band. Odd `k` use both
/// signs, even `k` only the positive half-line.
pub fn vague_test_function(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let e = vague_scale_exponent(k);
    let inv = if x.is_infinite() { 0.0 } else { 1.0 / x.abs() };
    let tent = (2.0 - (e.exp2() * inv - 1.0).abs()).clamp(0.0, 1.0);
    if k.is_multiple_of(2) && x < 0.0 {
        0.0
    } else {
        tent
    }
}

/// `sum_k 2^-k (|mu1(f_k) - mu2(f_k)| min 1)` over the family of
/// [`vague_test_function`]. Time coordinates, if present, are ignored.
pub fn vague_distance(mu1: &PointMeasure, mu2: &PointMeasure) -> f64 {
    (1..=VAGUE_TERMS)
        .map(|k| {
            let a = mu1.integrate(|x| vague_test_function(k, x));
            let b = mu2.integrate(|x| vague_test_function(k, x));
            0.5f64.powi(k as i32) * (a - b).abs().min(1.0)
        })
        .sum()
}
