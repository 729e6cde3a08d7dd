use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::StreamRng;
use crate::weight::WeightFunction;
use crate::Sign;

/// The birth–death chain `ξ`: up with `p(x)`, down with `q(x)`.
#[derive(Debug, Clone)]
pub struct XiChain {
    pub x: i64,
    rng: StreamRng,
}

impl XiChain {
    pub fn new(rng: StreamRng) -> Self {
        Self { x: 0, rng }
    }

    pub fn up_probability(&self, w: &WeightFunction) -> f64 {
        w.p(self.x)
    }

    pub fn step(&mut self, w: &WeightFunction) -> i64 {
        self.x += if self.rng.random::<f64>() < w.p(self.x) { 1 } else { -1 };
        self.x
    }

    /// `ξ(0..=len)` starting from the current value.
    pub fn path(&mut self, w: &WeightFunction, len: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(len + 1);
        out.push(self.x);
        for _ in 0..len {
            out.push(self.step(w));
        }
        out
    }
}

fn check_path(path: &[i64]) -> Result<()> {
    if path.first() != Some(&0) {
        return Err(invalid("xi_path", "must start at 0"));
    }
    if path.windows(2).any(|s| (s[1] - s[0]).abs() != 1) {
        return Err(invalid("xi_path", "steps must be +1 or -1"));
    }
    Ok(())
}

/// All values of `η±` contained in a `ξ` path: `η±(0) = 0` and
/// `η±(m) = ∓ξ(τ±(m))` with `τ±(m)` the time of the `m`-th up (down) step.
pub fn extract_eta_all(path: &[i64], sign: Sign) -> Result<Vec<i64>> {
    check_path(path)?;
    let mut out = vec![0];
    for (l, s) in path.windows(2).enumerate() {
        if s[1] - s[0] == sign.unit() {
            out.push(-sign.unit() * path[l + 1]);
        }
    }
    Ok(out)
}

/// `η±(0..len)`, failing when the path has fewer than `len - 1` steps of the
/// requested orientation.
pub fn extract_eta(path: &[i64], sign: Sign, len: usize) -> Result<Vec<i64>> {
    let mut all = extract_eta_all(path, sign)?;
    if all.len() < len {
        return Err(Error::PathTooShort {
            what: match sign {
                Sign::Plus => "upward",
                Sign::Minus => "downward",
            },
            needed: len.saturating_sub(1),
            found: all.len() - 1,
        });
    }
    all.truncate(len);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn up_probabilities() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let mut c = XiChain::new(crate::rng::stream(0, &[]));
        assert_eq!(c.up_probability(&w), 0.5);
        c.x = 1;
        assert!((c.up_probability(&w) - 0.2).abs() < 1e-15);
        c.x = -3;
        assert!((c.up_probability(&w) - 64.0 / 65.0).abs() < 1e-15);
    }

    #[test]
    fn hand_traced_extraction() {
        assert_eq!(extract_eta(&[0, 1, 0, 1], Sign::Plus, 3).unwrap(), vec![0, -1, -1]);
        assert_eq!(extract_eta_all(&[0, 1, 2, 3], Sign::Plus).unwrap(), vec![0, -1, -2, -3]);
        assert_eq!(extract_eta_all(&[0, 1, 0, -1], Sign::Minus).unwrap(), vec![0, 0, -1]);
    }

    #[test]
    fn short_or_malformed_paths() {
        assert!(matches!(
            extract_eta(&[0, 1, 2], Sign::Minus, 2),
            Err(Error::PathTooShort { needed: 1, found: 0, .. })
        ));
        assert!(extract_eta_all(&[1, 2], Sign::Plus).is_err());
        assert!(extract_eta_all(&[0, 2], Sign::Plus).is_err());
    }
}
