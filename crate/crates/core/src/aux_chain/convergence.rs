use serde::{Deserialize, Serialize};

use super::kernel::EtaKernel;
use super::stationary::StationaryDistribution;
use crate::error::{Error, Result};
use crate::stats::{linear_fit, LinearFit};

/// `‖ρP - ρ‖₁` on the kernel window.
pub fn fixed_point_residual(kernel: &EtaKernel, rho: &StationaryDistribution) -> Result<f64> {
    let (lo, hi) = kernel.window();
    let r = rho.on_window(lo, hi)?;
    let rp = kernel.apply(&r);
    Ok(rp.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum())
}

/// Mean of `P^n(0, ·)`.
pub fn mean_after(kernel: &EtaKernel, n: usize) -> Result<f64> {
    let (lo, _) = kernel.window();
    let mut v = kernel.delta(0)?;
    for _ in 0..n {
        v = kernel.apply(&v);
    }
    Ok(v.iter()
        .enumerate()
        .map(|(i, p)| (lo + i as i64) as f64 * p)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub m: usize,
    pub tv: f64,
    /// Probability that would have left the window by step `m`.
    pub lost_mass: f64,
}

/// Exact `‖P^m(0,·) - ρ‖_TV` for `m = 0..=m_max`.
///
/// The signed deviation `δ₀P^m - ρ` is propagated directly instead of
/// subtracting two probability vectors, so values far below `f64` epsilon are
/// resolved. Because `ρP = ρ` this is the same vector; its total mass is
/// re-projected to zero after every step.
pub fn tv_decay_curve(
    kernel: &EtaKernel,
    rho: &StationaryDistribution,
    m_max: usize,
) -> Result<Vec<TvPoint>> {
    let (lo, hi) = kernel.window();
    let r = rho.on_window(lo, hi)?;
    let mut v = kernel.delta(0)?;
    let mut d: Vec<f64> = v.iter().zip(&r).map(|(a, b)| a - b).collect();
    let mut lost = 0.0;
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let tv = 0.5 * d.iter().map(|x| x.abs()).sum::<f64>();
        if lost > 0.01 * tv {
            return Err(Error::Truncation {
                mass: lost,
                tolerance: 0.01 * tv,
            });
        }
        out.push(TvPoint {
            m,
            tv,
            lost_mass: lost,
        });
        if m == m_max {
            break;
        }
        lost += v
            .iter()
            .zip(kernel.row_truncation())
            .map(|(a, t)| a * t)
            .sum::<f64>();
        v = kernel.apply(&v);
        d = kernel.apply(&d);
        let s: f64 = d.iter().sum();
        for (di, ri) in d.iter_mut().zip(&r) {
            *di -= s * ri;
        }
    }
    Ok(out)
}

/// Least-squares fit of `ln TV` against `m` over `m_lo..=m_hi`.
pub fn tv_decay_fit(curve: &[TvPoint], m_lo: usize, m_hi: usize) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .iter()
        .filter(|p| p.m >= m_lo && p.m <= m_hi && p.tv > 0.0)
        .map(|p| (p.m as f64, p.tv.ln()))
        .unzip();
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailViolation {
    pub m: usize,
    pub y: i64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheckReport {
    pub checked: usize,
    /// Largest `P^m(0,y) / bound` seen.
    pub max_ratio: f64,
    pub violations: Vec<TailViolation>,
}

impl TailCheckReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `P^m(0, y) <= ρ(y)/ρ(0)` for every `y` in the window and every `m`
/// in `m_list`. Where `ρ` was truncated to zero the bound is the truncation
/// tolerance.
pub fn exponential_tail_check(
    kernel: &EtaKernel,
    rho: &StationaryDistribution,
    m_list: &[usize],
) -> Result<TailCheckReport> {
    let (lo, hi) = kernel.window();
    rho.on_window(lo, hi)?;
    let rho0 = rho.get(0);
    let m_max = m_list.iter().copied().max().unwrap_or(0);
    let mut v = kernel.delta(0)?;
    let mut report = TailCheckReport {
        checked: 0,
        max_ratio: 0.0,
        violations: Vec::new(),
    };
    for m in 0..=m_max {
        if m_list.contains(&m) {
            for (i, &value) in v.iter().enumerate() {
                let y = lo + i as i64;
                let bound = (rho.get(y) / rho0).max(rho.tolerance());
                report.checked += 1;
                let ratio = value / bound;
                report.max_ratio = report.max_ratio.max(ratio);
                // slack for rounding in the renormalised rows
                if value > bound * (1.0 + 1e-9) {
                    report.violations.push(TailViolation { m, y, value, bound });
                }
            }
        }
        v = kernel.apply(&v);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_chain::stationary_rho;
    use crate::weight::WeightFunction;

    fn setup(base: f64) -> (EtaKernel, StationaryDistribution) {
        let w = WeightFunction::exponential(base).unwrap();
        let rho = stationary_rho(&w, 1e-300).unwrap();
        let (lo, hi) = rho.support();
        let k = EtaKernel::build_covering(&w, lo, hi, crate::aux_chain::DEFAULT_TRUNCATION).unwrap();
        (k, rho)
    }

    #[test]
    fn rho_is_a_fixed_point() {
        for b in [1.5, 2.0, 10.0] {
            let (k, rho) = setup(b);
            let res = fixed_point_residual(&k, &rho).unwrap();
            assert!(res < 1e-12, "base {b}: residual {res:e}");
        }
    }

    #[test]
    fn tv_starts_at_one_minus_rho0_and_decreases() {
        let (k, rho) = setup(2.0);
        let curve = tv_decay_curve(&k, &rho, 40).unwrap();
        assert!((curve[0].tv - (1.0 - rho.get(0))).abs() < 1e-15);
        for pair in curve.windows(2) {
            assert!(pair[1].tv <= pair[0].tv);
        }
        let fit = tv_decay_fit(&curve, 5, 40).unwrap();
        assert!(fit.slope < 0.0);
    }

    #[test]
    fn tv_curve_matches_brute_difference_while_resolvable() {
        let (k, rho) = setup(2.0);
        let (lo, hi) = k.window();
        let r = rho.on_window(lo, hi).unwrap();
        let curve = tv_decay_curve(&k, &rho, 6).unwrap();
        let mut v = k.delta(0).unwrap();
        for p in &curve {
            let brute = 0.5 * v.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum::<f64>();
            assert!((brute - p.tv).abs() < 1e-13, "m={} {} vs {}", p.m, brute, p.tv);
            v = k.apply(&v);
        }
    }

    #[test]
    fn pest_bound_holds() {
        for b in [2.0, 10.0] {
            let (k, rho) = setup(b);
            let rep = exponential_tail_check(&k, &rho, &[1, 5, 25]).unwrap();
            assert!(rep.holds(), "{:?}", rep.violations.first());
            assert!(rep.checked > 0);
        }
    }

    #[test]
    fn mismatched_window_is_an_error() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let k = EtaKernel::build(&w).unwrap();
        let slow = stationary_rho(&WeightFunction::exponential(1.001).unwrap(), 1e-300).unwrap();
        assert!(tv_decay_curve(&k, &slow, 3).is_err());
    }

    #[test]
    fn mean_converges_to_minus_half() {
        let (k, _) = setup(2.0);
        assert_eq!(mean_after(&k, 0).unwrap(), 0.0);
        assert!((mean_after(&k, 60).unwrap() + 0.5).abs() < 1e-12);
    }
}
