use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Geometric time `θ` with `P(θ = n) = (1 - e^{-s/A}) e^{-s n / A}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricTime {
    pub s: f64,
    pub a: f64,
}

impl GeometricTime {
    pub fn new(s: f64, a: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("s", "must be positive"));
        }
        if !(a >= 1.0 && a.is_finite()) {
            return Err(invalid("A", "must be >= 1"));
        }
        Ok(Self { s, a })
    }

    pub fn rate(&self) -> f64 {
        self.s / self.a
    }

    pub fn pmf(&self, n: u64) -> f64 {
        -(-self.rate()).exp_m1() * (-self.rate() * n as f64).exp()
    }

    /// `e^{-s/A} / (1 - e^{-s/A})`.
    pub fn mean(&self) -> f64 {
        1.0 / self.rate().exp_m1()
    }

    /// `⌊-A ln U / s⌋` for `U` uniform on `(0, 1]`.
    pub fn from_uniform(&self, u: f64) -> u64 {
        (-u.ln() / self.rate()).floor() as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = 1.0 - rng.random::<f64>();
        self.from_uniform(u)
    }
}

/// Convenience wrapper around [`GeometricTime::sample`].
pub fn sample_geometric_time<R: Rng + ?Sized>(s: f64, a: f64, rng: &mut R) -> Result<u64> {
    Ok(GeometricTime::new(s, a)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn uniform_near_one_gives_zero() {
        let g = GeometricTime::new(1.0, 100.0).unwrap();
        assert_eq!(g.from_uniform(1.0), 0);
        assert_eq!(g.from_uniform(1.0 - 1e-12), 0);
    }

    #[test]
    fn half_mass_at_zero_for_rate_ln2() {
        let g = GeometricTime::new(std::f64::consts::LN_2, 1.0).unwrap();
        assert!((g.pmf(0) - 0.5).abs() < 1e-15);
        assert!((g.pmf(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(GeometricTime::new(0.0, 10.0).is_err());
        assert!(GeometricTime::new(1.0, 0.5).is_err());
    }

    #[test]
    fn empirical_mean() {
        let g = GeometricTime::new(1.0, 50.0).unwrap();
        let mut r = rng::stream(3, &[rng::tag::GEOMETRIC]);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| g.sample(&mut r) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - g.mean()).abs() < 4.0 * se, "{mean} vs {}", g.mean());
        // P(θ = 0) by frequency
        let zeros = xs.iter().filter(|&&x| x == 0.0).count() as f64 / n as f64;
        assert!((zeros - g.pmf(0)).abs() < 4.0 * (g.pmf(0) / n as f64).sqrt());
    }
}
