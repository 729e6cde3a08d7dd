use std::io::Write;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::weight::WeightFunction;

const MAX_TERMS: usize = 1 << 22;

/// Stationary law of the `η` chain,
/// `ρ(x) = Z⁻¹ Π_{z=1}^{n(x)} w(-z)/w(z)` with `n(x) = ⌊|2x+1|/2⌋`.
///
/// `n(x) = n(-1-x)`, so the law is symmetric about `-1/2` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    /// `ρ` on `[-N-1, N]`; index `i` holds `ρ(x_min + i)`.
    rho: Vec<f64>,
    x_min: i64,
    normalizer: f64,
    tolerance: f64,
}

/// `n(x) = ⌊|2x+1|/2⌋`.
fn product_length(x: i64) -> i64 {
    (2 * x + 1).abs() / 2
}

/// Computes `ρ`, truncating the product series once its terms drop below
/// `tolerance` and renormalising.
pub fn stationary_rho(w: &WeightFunction, tolerance: f64) -> Result<StationaryDistribution> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(invalid("tolerance", "must lie in (0, 1)"));
    }
    w.ensure_valid(WeightFunction::DEFAULT_RANGE)?;
    let ln_tol = tolerance.ln();
    // ln t(n), t(n) = Π_{z=1}^n w(-z)/w(z)
    let mut ln_terms = vec![0.0f64];
    loop {
        let n = ln_terms.len() as i64;
        let next = ln_terms[ln_terms.len() - 1] + w.log_ratio(n);
        if next < ln_tol {
            break;
        }
        if ln_terms.len() >= MAX_TERMS || next > 700.0 {
            return Err(Error::InvalidWeight(format!(
                "{}: stationary series does not converge",
                w.label()
            )));
        }
        ln_terms.push(next);
    }
    let terms: Vec<f64> = ln_terms.iter().map(|l| l.exp()).collect();
    let normalizer = 2.0 * terms.iter().sum::<f64>();
    let big_n = terms.len() as i64 - 1;
    let x_min = -big_n - 1;
    let rho = (x_min..=big_n)
        .map(|x| terms[product_length(x) as usize] / normalizer)
        .collect();
    Ok(StationaryDistribution {
        rho,
        x_min,
        normalizer,
        tolerance,
    })
}

impl StationaryDistribution {
    /// Support `[x_min, x_max]` after truncation.
    pub fn support(&self) -> (i64, i64) {
        (self.x_min, self.x_min + self.rho.len() as i64 - 1)
    }

    /// `Z = 2 Σ_{x≥0} Π_{z=1}^x w(-z)/w(z)` (truncated).
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn get(&self, x: i64) -> f64 {
        let i = x - self.x_min;
        if i >= 0 && (i as usize) < self.rho.len() {
            self.rho[i as usize]
        } else {
            0.0
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.rho
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.x_min + i as i64, p))
    }

    pub fn total(&self) -> f64 {
        self.rho.iter().sum()
    }

    /// `Σ x ρ(x)`, accumulated in mirror pairs `(x, -1-x)`.
    pub fn mean(&self) -> f64 {
        let (_, hi) = self.support();
        (0..=hi)
            .map(|x| x as f64 * self.get(x) + (-1 - x) as f64 * self.get(-1 - x))
            .sum()
    }

    /// `ρ` restricted to `[lo, hi]`; the support must fit inside.
    pub fn on_window(&self, lo: i64, hi: i64) -> Result<Vec<f64>> {
        let (a, b) = self.support();
        if a < lo || b > hi {
            return Err(invalid(
                "window",
                format!("[{lo}, {hi}] does not cover the support [{a}, {b}]"),
            ));
        }
        Ok((lo..=hi).map(|x| self.get(x)).collect())
    }

    /// Inverse-CDF sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        for (x, p) in self.iter() {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.support().1
    }

    /// Writes `x,rho`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,rho")?;
        for (x, p) in self.iter() {
            writeln!(out, "{x},{p:e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base2_values() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let rho = stationary_rho(&w, 1e-300).unwrap();
        // partial sums of 2 Σ 4^{-x(x+1)/2}
        let z_oracle: f64 = 2.0 * (0..40).map(|x: i32| 4f64.powi(-x * (x + 1) / 2)).sum::<f64>();
        assert!((rho.normalizer() - z_oracle).abs() < 1e-14);
        assert!((rho.normalizer() - 2.531_740_190).abs() < 1e-8);
        assert!((rho.get(0) - 0.394_986).abs() < 1e-6);
        assert_eq!(rho.get(0), rho.get(-1));
        assert!((rho.get(1) - rho.get(0) / 4.0).abs() < 1e-16);
        assert!((rho.total() - 1.0).abs() < 1e-12);
        assert!((rho.mean() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetry_is_exact() {
        let w = WeightFunction::exponential(1.2).unwrap();
        let rho = stationary_rho(&w, 1e-300).unwrap();
        let (lo, hi) = rho.support();
        assert_eq!(lo, -1 - hi);
        for x in lo..=hi {
            assert_eq!(rho.get(x), rho.get(-1 - x));
        }
    }

    #[test]
    fn invalid_weights_rejected() {
        let w = WeightFunction::exponential(1.0).unwrap();
        assert!(stationary_rho(&w, 1e-12).is_err());
        let w = WeightFunction::exponential(2.0).unwrap();
        assert!(stationary_rho(&w, 0.0).is_err());
    }

    #[test]
    fn csv_header() {
        let w = WeightFunction::exponential(10.0).unwrap();
        let rho = stationary_rho(&w, 1e-30).unwrap();
        let mut buf = Vec::new();
        rho.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,rho\n"));
    }
}
