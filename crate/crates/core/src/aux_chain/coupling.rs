use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eta::transition;
use super::stationary::StationaryDistribution;
use crate::error::Result;
use crate::rng::{self, tag, StreamRng};
use crate::stats::{linear_fit, LinearFit};
use crate::weight::WeightFunction;

/// Two copies of the `η` chain, one from 0 and one from `ρ`, evolving
/// independently until they first meet and identically afterwards.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub a: i64,
    pub b: i64,
    /// Coalescence time `μ`, once reached.
    pub mu: Option<u64>,
    pub steps: u64,
    rng_a: StreamRng,
    rng_b: StreamRng,
}

impl CoupledPair {
    /// The pair with index `pair` under master seed `seed`.
    pub fn new(rho: &StationaryDistribution, seed: u64, pair: u64) -> Self {
        let mut rng_b = rng::stream(seed, &[tag::COUPLING, pair, 1]);
        let b = rho.sample(&mut rng_b);
        Self::from_states(0, b, seed, pair)
    }

    pub fn from_states(a: i64, b: i64, seed: u64, pair: u64) -> Self {
        Self {
            a,
            b,
            mu: (a == b).then_some(0),
            steps: 0,
            rng_a: rng::stream(seed, &[tag::COUPLING, pair, 0]),
            rng_b: rng::stream(seed, &[tag::COUPLING, pair, 2]),
        }
    }

    pub fn coalesced(&self) -> bool {
        self.mu.is_some()
    }

    pub fn step(&mut self, w: &WeightFunction) -> Result<()> {
        self.a = transition(w, self.a, &mut self.rng_a)?;
        if self.coalesced() {
            self.b = self.a;
        } else {
            self.b = transition(w, self.b, &mut self.rng_b)?;
        }
        self.steps += 1;
        if self.mu.is_none() && self.a == self.b {
            self.mu = Some(self.steps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPairRun {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    /// `None` when the cap was reached first (censored).
    pub mu: Option<u64>,
}

/// Runs one pair until coalescence (or `cap` steps) and then `record_after`
/// further steps, returning both trajectories.
pub fn simulate_coalescing_pair(
    w: &WeightFunction,
    rho: &StationaryDistribution,
    seed: u64,
    pair: u64,
    cap: u64,
    record_after: u64,
) -> Result<CoupledPairRun> {
    let mut p = CoupledPair::new(rho, seed, pair);
    let (mut a, mut b) = (vec![p.a], vec![p.b]);
    while p.steps < cap && p.mu.is_none_or(|mu| p.steps < mu + record_after) {
        p.step(w)?;
        a.push(p.a);
        b.push(p.b);
    }
    Ok(CoupledPairRun { a, b, mu: p.mu })
}

/// Coalescence times of `pairs` independent pairs, in pair order.
pub fn coalescence_times(
    w: &WeightFunction,
    rho: &StationaryDistribution,
    seed: u64,
    pairs: u64,
    cap: u64,
) -> Result<Vec<Option<u64>>> {
    (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut p = CoupledPair::new(rho, seed, i);
            while p.mu.is_none() && p.steps < cap {
                p.step(w)?;
            }
            Ok(p.mu)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalFit {
    /// `(m, P̂(μ > m))` while at least `min_count` pairs survive.
    pub survival: Vec<(u64, f64)>,
    pub fit: Option<LinearFit>,
    pub censored: usize,
}

/// Empirical survival of `μ` and a least-squares fit of its logarithm over
/// `m >= m_lo`, restricted to `m` with at least `min_count` survivors.
pub fn survival_fit(times: &[Option<u64>], m_lo: u64, min_count: usize) -> SurvivalFit {
    let n = times.len() as f64;
    let censored = times.iter().filter(|t| t.is_none()).count();
    let last = times.iter().flatten().copied().max().unwrap_or(0);
    let mut survival = Vec::new();
    for m in 0..=last {
        let alive = times.iter().filter(|t| t.is_none_or(|mu| mu > m)).count();
        if alive < min_count.max(1) {
            break;
        }
        survival.push((m, alive as f64 / n));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = survival
        .iter()
        .filter(|(m, _)| *m >= m_lo)
        .map(|&(m, s)| (m as f64, s.ln()))
        .unzip();
    SurvivalFit {
        survival,
        fit: linear_fit(&xs, &ys),
        censored,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_chain::stationary_rho;

    #[test]
    fn equal_starts_coalesce_immediately() {
        let p = CoupledPair::from_states(3, 3, 1, 0);
        assert_eq!(p.mu, Some(0));
    }

    #[test]
    fn chains_stick_together_after_meeting() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let rho = stationary_rho(&w, 1e-300).unwrap();
        for pair in 0..50 {
            let run = simulate_coalescing_pair(&w, &rho, 11, pair, 10_000, 30).unwrap();
            let mu = run.mu.expect("coalesces") as usize;
            assert_eq!(run.a.len(), mu + 31);
            assert_eq!(&run.a[mu..], &run.b[mu..]);
            assert!(run.a[..mu].iter().zip(&run.b[..mu]).all(|(x, y)| x != y));
        }
    }

    #[test]
    fn survival_of_deterministic_times() {
        let times = vec![Some(0), Some(1), Some(1), Some(2), None];
        let s = survival_fit(&times, 0, 1);
        assert_eq!(s.censored, 1);
        assert_eq!(s.survival[0], (0, 0.8));
        assert_eq!(s.survival[1], (1, 0.4));
        assert_eq!(s.survival[2], (2, 0.2));
    }
}
