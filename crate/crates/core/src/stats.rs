//! Small statistical helpers: means with standard errors and KS statistics.

/// Sample mean with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Mean and standard error `sd / sqrt(n)` in a fixed summation order.
pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            std_err: f64::NAN,
            n,
        };
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    if n == 1 {
        return MeanSe { mean, std_err: 0.0, n };
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    MeanSe {
        mean,
        std_err: (var / nf).sqrt(),
        n,
    }
}

/// Sample variance with denominator `n - 1`.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// Kolmogorov-Smirnov distance between the empirical law of `sorted`
/// (ascending) and the distribution function values `cdf[i] = F(sorted[i])`.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // ties share one jump of the empirical distribution function
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = cdf[i];
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// KS distance of a sample from a continuous distribution function.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let f: Vec<f64> = s.iter().map(|&x| cdf(x)).collect();
    ks_statistic_sorted(&s, &f)
}

/// Two-sample KS distance and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, kolmogorov_q(lambda))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(l) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 l^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        s += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Delete-one-group jackknife standard error of a statistic computed from
/// `groups` equal parts of the data. `leave_out(g)` evaluates the statistic
/// without group `g`.
pub fn jackknife_se(groups: usize, leave_out: impl Fn(usize) -> f64) -> f64 {
    let vals: Vec<f64> = (0..groups).map(leave_out).collect();
    let g = groups as f64;
    let m = vals.iter().sum::<f64>() / g;
    ((g - 1.0) / g * vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sqrt()
}
