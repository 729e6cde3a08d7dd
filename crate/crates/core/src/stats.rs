//! Small statistical toolbox: least-squares fits, Kolmogorov–Smirnov and
//! chi-square tests, quantiles and adaptive quadrature.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Standard normal distribution function, via the complementary error
/// function so the upper tail keeps full relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `1 - F(x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit {
        slope,
        intercept,
        r2,
        n,
    })
}

/// Linear-interpolated quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS distance between `sample` and a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTwoSample {
    pub d: f64,
    pub p_value: f64,
}

/// Two-sample KS test with the asymptotic p-value (Stephens' small-sample
/// correction). Ties are handled by evaluating both ECDFs after each distinct
/// value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsTwoSample {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
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
    KsTwoSample {
        d,
        p_value: kolmogorov_sf(lambda),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(f64::NAN)
}

/// Chi-square test of homogeneity for two samples of integer outcomes.
/// Categories whose pooled count is below `min_pooled` are merged into one
/// rest bin.
pub fn chi_square_homogeneity(
    a: &BTreeMap<i64, u64>,
    b: &BTreeMap<i64, u64>,
    min_pooled: u64,
) -> ChiSquare {
    let keys: Vec<i64> = a.keys().chain(b.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut rest = (0u64, 0u64);
    for k in keys {
        let (x, y) = (*a.get(&k).unwrap_or(&0), *b.get(&k).unwrap_or(&0));
        if x + y >= min_pooled {
            bins.push((x, y));
        } else {
            rest.0 += x;
            rest.1 += y;
        }
    }
    if rest.0 + rest.1 > 0 {
        bins.push(rest);
    }
    let na: u64 = bins.iter().map(|b| b.0).sum();
    let nb: u64 = bins.iter().map(|b| b.1).sum();
    let n = (na + nb) as f64;
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        let ea = tot * na as f64 / n;
        let eb = tot * nb as f64 / n;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let df = bins.len().saturating_sub(1);
    ChiSquare {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// Chi-square goodness of fit of integer counts against exact probabilities.
/// Outcomes with expected count below `min_expected` are merged, and the
/// probability mass not listed in `probs` joins that rest bin.
pub fn chi_square_goodness(
    counts: &BTreeMap<i64, u64>,
    probs: &BTreeMap<i64, f64>,
    min_expected: f64,
) -> ChiSquare {
    let n: u64 = counts.values().sum();
    let nf = n as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut rest_obs, mut rest_exp) = (0u64, 0.0f64);
    let mut listed_obs = 0u64;
    let mut listed_p = 0.0;
    for (k, &p) in probs {
        let obs = *counts.get(k).unwrap_or(&0);
        listed_obs += obs;
        listed_p += p;
        let e = p * nf;
        if e >= min_expected {
            stat += (obs as f64 - e).powi(2) / e;
            bins += 1;
        } else {
            rest_obs += obs;
            rest_exp += e;
        }
    }
    rest_obs += n - listed_obs;
    rest_exp += (1.0 - listed_p).max(0.0) * nf;
    if rest_exp > 0.0 {
        stat += (rest_obs as f64 - rest_exp).powi(2) / rest_exp;
        bins += 1;
    } else if rest_obs > 0 {
        stat = f64::INFINITY;
    }
    let df = bins.saturating_sub(1);
    ChiSquare {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        let c = normal_cdf(1.0);
        assert!((c - 0.841_344_746_068_542_9).abs() < 1e-15, "{c:.17}");
        // upper tail keeps relative accuracy
        let sf = normal_sf(10.0);
        assert!((sf / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_line_fit() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.3581) ≈ 0.05, Q(1.6276) ≈ 0.01
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_against_uniform_grid() {
        let sample: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&sample, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
        let same = ks_two_sample(&sample, &sample);
        assert_eq!(same.d, 0.0);
        assert_eq!(same.p_value, 1.0);
        let shifted: Vec<f64> = sample.iter().map(|x| x + 0.5).collect();
        assert!(ks_two_sample(&sample, &shifted).p_value < 1e-6);
    }

    #[test]
    fn chi_square_identical_samples() {
        let a: BTreeMap<i64, u64> = [(0, 50), (1, 30), (2, 20)].into();
        let c = chi_square_homogeneity(&a, &a, 5);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.df, 2);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        let single: BTreeMap<i64, u64> = [(0, 10)].into();
        assert_eq!(chi_square_homogeneity(&single, &single, 5).p_value, 1.0);
    }

    #[test]
    fn chi_square_goodness_detects_mismatch() {
        let counts: BTreeMap<i64, u64> = [(0, 500), (1, 500)].into();
        let fair: BTreeMap<i64, f64> = [(0, 0.5), (1, 0.5)].into();
        assert!(chi_square_goodness(&counts, &fair, 5.0).p_value > 0.99);
        let skew: BTreeMap<i64, f64> = [(0, 0.7), (1, 0.3)].into();
        assert!(chi_square_goodness(&counts, &skew, 5.0).p_value < 1e-10);
    }

    #[test]
    fn simpson_on_gaussian() {
        let v = integrate(&|x: f64| (-x * x).exp(), 0.0, 10.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
    }
}
