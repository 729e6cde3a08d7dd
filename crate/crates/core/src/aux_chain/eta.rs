use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::weight::WeightFunction;

/// Upper bound on the number of `ξ` moves inside one `η` transition.
pub const ETA_INNER_CAP: u64 = 1 << 32;

/// Direct sampler of the `η` chain started at 0.
///
/// One transition from `x` replays the `ξ` excursion between two up-steps in
/// `η` coordinates: starting at `z = x`, continue to `z + 1` with probability
/// `p(z)`, otherwise stop and land on `z - 1`. This reproduces
/// `P(x, y) = p(x)···p(y) q(y+1)` exactly.
#[derive(Debug, Clone)]
pub struct EtaChain {
    value: i64,
    index: u64,
    rng: StreamRng,
}

impl EtaChain {
    pub fn new(rng: StreamRng) -> Self {
        Self::starting_at(0, rng)
    }

    pub fn starting_at(value: i64, rng: StreamRng) -> Self {
        Self {
            value,
            index: 0,
            rng,
        }
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    /// Number of transitions taken so far.
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn step(&mut self, w: &WeightFunction) -> Result<i64> {
        self.value = transition(w, self.value, &mut self.rng)?;
        self.index += 1;
        Ok(self.value)
    }

    /// Runs forward to transition `m` and returns `η(m)`. Asking for an index
    /// already passed is an error.
    pub fn value_at(&mut self, m: u64, w: &WeightFunction) -> Result<i64> {
        if m < self.index {
            return Err(crate::error::invalid(
                "eta index",
                format!("chain already at {} > {m}", self.index),
            ));
        }
        while self.index < m {
            self.step(w)?;
        }
        Ok(self.value)
    }
}

/// One `η` transition from `x`.
pub(crate) fn transition<R: Rng + ?Sized>(w: &WeightFunction, x: i64, rng: &mut R) -> Result<i64> {
    let mut z = x;
    let mut moves = 0u64;
    while rng.random::<f64>() < w.p(z) {
        z += 1;
        moves += 1;
        if moves >= ETA_INNER_CAP {
            return Err(Error::CapExhausted {
                cap: ETA_INNER_CAP,
                context: "eta transition".into(),
            });
        }
    }
    Ok(z - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_index_is_start() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let mut c = EtaChain::new(crate::rng::stream(3, &[]));
        assert_eq!(c.value_at(0, &w).unwrap(), 0);
        c.value_at(5, &w).unwrap();
        assert_eq!(c.index(), 5);
        assert!(c.value_at(4, &w).is_err());
    }

    #[test]
    fn left_jumps_bounded_by_one() {
        let w = WeightFunction::exponential(1.5).unwrap();
        let mut c = EtaChain::new(crate::rng::stream(4, &[]));
        let mut prev = 0;
        for _ in 0..10_000 {
            let v = c.step(&w).unwrap();
            assert!(v >= prev - 1);
            prev = v;
        }
    }
}
