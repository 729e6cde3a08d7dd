use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::convergence::mean_after;
use super::eta::EtaChain;
use super::kernel::EtaKernel;
use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag};
use crate::stats::quantile;
use crate::weight::WeightFunction;

/// `τ₀ = min{k : L(k) <= 0}` for `L(k+1) = L(k) + η_{k+1}(L(k))`,
/// `L(0) = r`, with a fresh `η` chain from 0 for every `k`.
///
/// The chain for index `k` is keyed by `(seed, replicate, k)` only, so runs
/// with different `r` share their randomness.
pub fn hitting_time(w: &WeightFunction, r: u64, seed: u64, replicate: u64, cap: u64) -> Result<u64> {
    let mut level = r as i64;
    let mut k = 0u64;
    while level > 0 {
        if k >= cap {
            return Err(Error::CapExhausted {
                cap,
                context: format!("hitting time from r={r}"),
            });
        }
        k += 1;
        let mut eta = EtaChain::new(rng::stream(seed, &[tag::HITTING, replicate, k]));
        level += eta.value_at(level as u64, w)?;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingRow {
    pub r: u64,
    pub mean_tau: f64,
    pub q10: f64,
    pub q90: f64,
    pub replicates: u64,
}

fn summarize(r: u64, mut taus: Vec<f64>) -> HittingRow {
    taus.sort_by(f64::total_cmp);
    HittingRow {
        r,
        mean_tau: taus.iter().sum::<f64>() / taus.len() as f64,
        q10: quantile(&taus, 0.1),
        q90: quantile(&taus, 0.9),
        replicates: taus.len() as u64,
    }
}

pub fn hitting_time_experiment(
    w: &WeightFunction,
    r_list: &[u64],
    replicates: u64,
    seed: u64,
    cap: u64,
) -> Result<Vec<HittingRow>> {
    if replicates == 0 {
        return Err(invalid("replicates", "must be >= 1"));
    }
    r_list
        .iter()
        .map(|&r| {
            let taus = (0..replicates)
                .into_par_iter()
                .map(|i| hitting_time(w, r, seed, i, cap).map(|t| t as f64))
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(r, taus))
        })
        .collect()
}

/// The constant of the hitting-time bound `E τ₀ <= (2+δ) r + K_δ`:
/// `n_δ` is the first index from which the mean of `P^n(0,·)` stays below
/// `-1/(2+δ)`, and `K_δ = max_{0<=s<=n_δ} E[τ₀ | L(0) = s]` (Monte Carlo).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstant {
    pub delta: f64,
    pub n_delta: u64,
    pub k_delta: f64,
    pub means: Vec<f64>,
}

pub fn lemma_constant(
    w: &WeightFunction,
    kernel: &EtaKernel,
    delta: f64,
    replicates: u64,
    seed: u64,
    cap: u64,
) -> Result<LemmaConstant> {
    if delta <= 0.0 {
        return Err(invalid("delta", "must be positive"));
    }
    let threshold = -1.0 / (2.0 + delta);
    // the mean converges exponentially fast, so a run of 200 indices below
    // the threshold certifies n_δ
    const CONFIRM: usize = 200;
    let mut n_delta = None;
    let mut streak_start = 0usize;
    let mut streak = 0usize;
    for n in 0..10_000usize {
        if mean_after(kernel, n)? <= threshold {
            if streak == 0 {
                streak_start = n;
            }
            streak += 1;
            if streak >= CONFIRM {
                n_delta = Some(streak_start as u64);
                break;
            }
        } else {
            streak = 0;
        }
    }
    let n_delta = n_delta.ok_or_else(|| Error::Violation("mean of P^n(0,·) does not settle".into()))?;
    let rows = hitting_time_experiment(w, &(0..=n_delta).collect::<Vec<_>>(), replicates, seed, cap)?;
    let means: Vec<f64> = rows.iter().map(|r| r.mean_tau).collect();
    Ok(LemmaConstant {
        delta,
        n_delta,
        k_delta: means.iter().copied().fold(0.0, f64::max),
        means,
    })
}
