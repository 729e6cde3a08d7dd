//! Exact laws by enumerating every walk path with its probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ray_knight::InverseLocalTimeQuery;
use crate::weight::WeightFunction;
use crate::Sign;

/// Hard limit on enumeration depth (`2^22` leaves).
pub const MAX_ENUMERATION_STEPS: u64 = 22;
/// Depth limit for [`brute_force_distribution`].
pub const MAX_BRUTE_FORCE_STEPS: u64 = 14;

/// A node of the path tree: the walk after `depth` steps along one path.
pub struct PathNode<'a> {
    pub depth: u64,
    pub position: i64,
    pub probability: f64,
    /// Site and direction (`true` = right) of the last step.
    pub last_step: Option<(i64, bool)>,
    counts: &'a [[u64; 2]],
    offset: i64,
}

impl PathNode<'_> {
    pub fn ell_plus(&self, k: i64) -> u64 {
        self.count(k, 0)
    }

    pub fn ell_minus(&self, k: i64) -> u64 {
        self.count(k, 1)
    }

    pub fn unoriented_local_time(&self, k: i64) -> u64 {
        self.ell_plus(k) + self.ell_minus(k + 1)
    }

    fn count(&self, k: i64, side: usize) -> u64 {
        let i = k + self.offset;
        if i >= 0 && (i as usize) < self.counts.len() {
            self.counts[i as usize][side]
        } else {
            0
        }
    }
}

struct Enumerator<'w, F> {
    w: &'w WeightFunction,
    max_depth: u64,
    counts: Vec<[u64; 2]>,
    offset: i64,
    visit: F,
}

impl<F: FnMut(&PathNode) -> bool> Enumerator<'_, F> {
    fn descend(&mut self, depth: u64, position: i64, probability: f64, last_step: Option<(i64, bool)>) {
        let go_on = (self.visit)(&PathNode {
            depth,
            position,
            probability,
            last_step,
            counts: &self.counts,
            offset: self.offset,
        });
        if !go_on || depth == self.max_depth {
            return;
        }
        let i = (position + self.offset) as usize;
        let [plus, minus] = self.counts[i];
        let p = self.w.p(plus as i64 - minus as i64);
        for (right, prob) in [(true, p), (false, 1.0 - p)] {
            if prob == 0.0 {
                continue;
            }
            let side = usize::from(!right);
            self.counts[i][side] += 1;
            let next = position + if right { 1 } else { -1 };
            self.descend(depth + 1, next, probability * prob, Some((position, right)));
            self.counts[i][side] -= 1;
        }
    }
}

/// Depth-first walk over all paths of length at most `max_depth`.
/// `visit` sees every node, including the root; returning `false` prunes the
/// subtree below it.
pub fn enumerate_paths(
    w: &WeightFunction,
    max_depth: u64,
    visit: impl FnMut(&PathNode) -> bool,
) -> Result<()> {
    if max_depth > MAX_ENUMERATION_STEPS {
        return Err(Error::EnumerationTooLarge {
            n: max_depth,
            max: MAX_ENUMERATION_STEPS,
        });
    }
    let offset = max_depth as i64 + 1;
    let mut e = Enumerator {
        w,
        max_depth,
        counts: vec![[0, 0]; 2 * offset as usize + 1],
        offset,
        visit,
    };
    e.descend(0, 0, 1.0, None);
    Ok(())
}

/// Exact laws of `X(0), ..., X(n_max)`.
pub fn brute_force_laws(w: &WeightFunction, n_max: u64) -> Result<Vec<BTreeMap<i64, f64>>> {
    if n_max > MAX_BRUTE_FORCE_STEPS {
        return Err(Error::EnumerationTooLarge {
            n: n_max,
            max: MAX_BRUTE_FORCE_STEPS,
        });
    }
    let mut laws = vec![BTreeMap::new(); n_max as usize + 1];
    enumerate_paths(w, n_max, |node| {
        *laws[node.depth as usize].entry(node.position).or_insert(0.0) += node.probability;
        true
    })?;
    Ok(laws)
}

/// Exact law `k ↦ P(X(n) = k)`.
pub fn brute_force_distribution(w: &WeightFunction, n: u64) -> Result<BTreeMap<i64, f64>> {
    Ok(brute_force_laws(w, n)?.pop().unwrap_or_default())
}

/// Law of a functional evaluated at the stopping time of `query`, over paths
/// that stop within `max_depth` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppedLaw {
    pub law: BTreeMap<i64, f64>,
    /// Probability of not having stopped by `max_depth`.
    pub unresolved: f64,
}

pub fn stopped_law(
    w: &WeightFunction,
    query: InverseLocalTimeQuery,
    max_depth: u64,
    functional: impl Fn(&PathNode) -> i64,
) -> Result<StoppedLaw> {
    let mut law = BTreeMap::new();
    let mut unresolved = 0.0;
    let right = query.sign == Sign::Plus;
    enumerate_paths(w, max_depth, |node| {
        let counter = if right {
            node.ell_plus(query.j)
        } else {
            node.ell_minus(query.j)
        };
        if node.last_step == Some((query.j, right)) && counter == query.r {
            *law.entry(functional(node)).or_insert(0.0) += node.probability;
            return false;
        }
        if node.depth == max_depth {
            unresolved += node.probability;
        }
        true
    })?;
    Ok(StoppedLaw { law, unresolved })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartEqReport {
    pub n_max: u64,
    /// Number of `(n, k)` pairs compared.
    pub cases: usize,
    pub max_error: f64,
}

/// Checks `P(X(n) = k) = Σ_m [P(T⁺_{k-1,m} = n) + P(T⁻_{k+1,m} = n)]` for
/// `1 <= n <= n_max`, `|k| <= n`. At `n = 0` the `m = 0` terms count the
/// origin twice, so it is left out.
pub fn identity_starteq_check(w: &WeightFunction, n_max: u64) -> Result<StartEqReport> {
    if n_max > MAX_BRUTE_FORCE_STEPS {
        return Err(Error::EnumerationTooLarge {
            n: n_max,
            max: MAX_BRUTE_FORCE_STEPS,
        });
    }
    let mut position = BTreeMap::new();
    // (n, sign, j, m) -> P(T^sign_{j,m} = n)
    let mut stopping: BTreeMap<(u64, bool, i64, u64), f64> = BTreeMap::new();
    enumerate_paths(w, n_max, |node| {
        *position.entry((node.depth, node.position)).or_insert(0.0) += node.probability;
        if let Some((j, right)) = node.last_step {
            let m = if right { node.ell_plus(j) } else { node.ell_minus(j) };
            *stopping.entry((node.depth, right, j, m)).or_insert(0.0) += node.probability;
        }
        true
    })?;
    let mut cases = 0;
    let mut max_error: f64 = 0.0;
    for n in 1..=n_max {
        let ni = n as i64;
        for k in -ni..=ni {
            let lhs = position.get(&(n, k)).copied().unwrap_or(0.0);
            let rhs: f64 = stopping
                .range((n, true, k - 1, 0)..=(n, true, k - 1, u64::MAX))
                .chain(stopping.range((n, false, k + 1, 0)..=(n, false, k + 1, u64::MAX)))
                .map(|(_, p)| p)
                .sum();
            max_error = max_error.max((lhs - rhs).abs());
            cases += 1;
        }
    }
    if max_error > 1e-12 {
        return Err(Error::Violation(format!(
            "start identity off by {max_error:e} for n <= {n_max}"
        )));
    }
    Ok(StartEqReport {
        n_max,
        cases,
        max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base2() -> WeightFunction {
        WeightFunction::exponential(2.0).unwrap()
    }

    #[test]
    fn first_two_laws() {
        let w = base2();
        let l1 = brute_force_distribution(&w, 1).unwrap();
        assert_eq!(l1, BTreeMap::from([(-1, 0.5), (1, 0.5)]));
        let l2 = brute_force_distribution(&w, 2).unwrap();
        assert_eq!(l2, BTreeMap::from([(-2, 0.25), (0, 0.5), (2, 0.25)]));
    }

    #[test]
    fn laws_sum_to_one() {
        for w in [base2(), WeightFunction::exponential(10.0).unwrap()] {
            for law in brute_force_laws(&w, 12).unwrap() {
                assert!((law.values().sum::<f64>() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn third_step_uses_repulsion() {
        let w = base2();
        let l3 = brute_force_distribution(&w, 3).unwrap();
        // X(3) = 1 via 0,1,0,1 (1/4 · 0.2), 0,-1,0,1 (1/4 · 0.8) and 0,1,2,1 (1/8)
        assert!((l3[&1] - 0.375).abs() < 1e-15);
        assert!((l3[&3] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn too_deep_is_rejected() {
        assert!(matches!(
            brute_force_distribution(&base2(), 15),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert!(enumerate_paths(&base2(), 23, |_| true).is_err());
    }

    #[test]
    fn start_identity() {
        for w in [base2(), WeightFunction::exponential(10.0).unwrap()] {
            let r = identity_starteq_check(&w, 10).unwrap();
            assert!(r.max_error < 1e-15);
            assert_eq!(r.cases, (1..=10).map(|n| 2 * n + 1).sum::<usize>());
        }
    }

    #[test]
    fn first_crossing_time_law() {
        // T⁺_{0,1} = 1 iff the first step is right
        let w = base2();
        let q = InverseLocalTimeQuery::new(0, 1, Sign::Plus).unwrap();
        let s = stopped_law(&w, q, 10, |n| n.depth as i64).unwrap();
        assert_eq!(s.law[&1], 0.5);
        assert!(!s.law.contains_key(&2));
        let total: f64 = s.law.values().sum::<f64>() + s.unresolved;
        assert!((total - 1.0).abs() < 1e-14);
    }
}
