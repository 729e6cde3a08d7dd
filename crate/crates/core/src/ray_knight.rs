//! Walks stopped at inverse local times, and the η-driven construction of
//! the same stopped local-time profiles.
//!
//! For a query `(j, r, ±)` the walk runs until it has jumped `r` times from
//! `j` towards `j ± 1`. At that moment `Λ(k)` counts crossings of the edge
//! `<k, k+1>` and `L(k)` counts the jumps of the query's orientation from `k`.
//!
//! The η route rebuilds `L` site by site without running the walk. Let
//! `X = j + 1` be the stopping position and `d(k)` the right-hand side of
//! the gradient identity at `X`. For sites at or right of `X` the last
//! departure before the stopping time was leftwards, for sites left of `X`
//! it was rightwards, which gives
//!
//! ```text
//! L(j)   = r
//! L(k+1) = m + η_{k+1,-}(m),  m = L(k) - d(k)          (k >= j)
//! L(k-1) = L(k) + η_{k,+}(L(k)) + d(k-1)               (k <= j)
//! ```
//!
//! with independent η chains per site, and `Λ(k) = 2 L(k) - d(k)`. Negative
//! queries are handled by reflecting a positive one.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::aux_chain::EtaChain;
use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag};
use crate::walk::{gradient_sign, OrientedLocalTimeField, WalkState};
use crate::weight::WeightFunction;
use crate::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseLocalTimeQuery {
    pub j: i64,
    pub r: u64,
    pub sign: Sign,
}

impl InverseLocalTimeQuery {
    pub fn new(j: i64, r: u64, sign: Sign) -> Result<Self> {
        if r < 1 {
            return Err(invalid("r", "must be >= 1"));
        }
        Ok(Self { j, r, sign })
    }

    /// The query for `j = ⌊A x⌋`, `r = ⌊A h⌋`.
    pub fn scaled(a: f64, x: f64, h: f64, sign: Sign) -> Result<Self> {
        let r = (a * h).floor();
        if r < 1.0 {
            return Err(invalid("h", "A·h must be at least 1"));
        }
        Self::new((a * x).floor() as i64, r as u64, sign)
    }

    /// Position of the walk at the stopping time.
    pub fn stopping_position(&self) -> i64 {
        self.j + self.sign.unit()
    }

    /// Step budget `10·(|j| + 2r)²`, at least `10⁴`.
    pub fn default_cap(&self) -> u64 {
        let s = self.j.unsigned_abs() + 2 * self.r;
        (10 * s * s).max(10_000)
    }

    /// The mirror-image query `(-j, r, ∓)`.
    pub fn mirrored(&self) -> Self {
        Self {
            j: -self.j,
            r: self.r,
            sign: self.sign.flip(),
        }
    }
}

/// Stopped unoriented local times `Λ(k)` on the edge range `[λ, ρ]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalTimeProfile {
    /// `values[i] = Λ(lambda_edge + i)`.
    values: Vec<u64>,
    pub lambda_edge: i64,
    pub rho_edge: i64,
    /// Stopping time `T`.
    pub stopping_time: u64,
}

impl LocalTimeProfile {
    /// Builds the profile from a raw map of edge values; zero entries at the
    /// ends are trimmed.
    pub fn from_values(first: i64, values: &[u64], stopping_time: u64) -> Self {
        let lo = values.iter().position(|&v| v > 0);
        let hi = values.iter().rposition(|&v| v > 0);
        match (lo, hi) {
            (Some(lo), Some(hi)) => Self {
                values: values[lo..=hi].to_vec(),
                lambda_edge: first + lo as i64,
                rho_edge: first + hi as i64,
                stopping_time,
            },
            _ => Self {
                values: Vec::new(),
                lambda_edge: 0,
                rho_edge: -1,
                stopping_time,
            },
        }
    }

    fn from_field(field: &OrientedLocalTimeField, stopping_time: u64) -> Self {
        let (lo, hi) = field.touched_range().unwrap_or((0, 0));
        let values: Vec<u64> = (lo - 1..=hi).map(|k| field.unoriented_local_time(k)).collect();
        Self::from_values(lo - 1, &values, stopping_time)
    }

    pub fn get(&self, k: i64) -> u64 {
        let i = k - self.lambda_edge;
        if i >= 0 && (i as usize) < self.values.len() {
            self.values[i as usize]
        } else {
            0
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.lambda_edge + i as i64, v))
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    pub fn peak(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// The mirror image `k ↦ Λ(-k-1)`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            values,
            lambda_edge: -self.rho_edge - 1,
            rho_edge: -self.lambda_edge - 1,
            stopping_time: self.stopping_time,
        }
    }
}

/// Stopped oriented local times: `L(k) = ℓ⁺(T, k)` for positive queries and
/// `ℓ⁻(T, k)` for negative ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedProfile {
    pub sign: Sign,
    first: i64,
    values: Vec<u64>,
}

impl OrientedProfile {
    pub fn from_values(sign: Sign, first: i64, values: Vec<u64>) -> Self {
        Self { sign, first, values }
    }

    fn from_field(field: &OrientedLocalTimeField, sign: Sign) -> Self {
        let (lo, hi) = field.touched_range().unwrap_or((0, 0));
        let values = (lo..=hi)
            .map(|k| match sign {
                Sign::Plus => field.ell_plus(k),
                Sign::Minus => field.ell_minus(k),
            })
            .collect();
        Self { sign, first: lo, values }
    }

    pub fn get(&self, k: i64) -> u64 {
        let i = k - self.first;
        if i >= 0 && (i as usize) < self.values.len() {
            self.values[i as usize]
        } else {
            0
        }
    }

    /// Sites covered by the stored values.
    pub fn range(&self) -> (i64, i64) {
        (self.first, self.first + self.values.len() as i64 - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.first + i as i64, v))
    }

    /// `k ↦ L(-k)` with the orientation flipped.
    pub fn reflected(&self) -> Self {
        let (_, hi) = self.range();
        let mut values = self.values.clone();
        values.reverse();
        Self {
            sign: self.sign.flip(),
            first: -hi,
            values,
        }
    }

    /// The oriented counter paired with edge `<k, k+1>` in `|Λ - 2L| <= 1`.
    pub fn paired_with_edge(&self, k: i64) -> u64 {
        match self.sign {
            Sign::Plus => self.get(k),
            Sign::Minus => self.get(k + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub steps: u64,
    pub final_position: i64,
    pub min_position: i64,
    pub max_position: i64,
}

/// Output of a direct simulation to an inverse local time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppedRun {
    pub query: InverseLocalTimeQuery,
    pub profile: LocalTimeProfile,
    pub oriented: OrientedProfile,
    pub summary: TrajectorySummary,
}

/// Runs `state` until `ℓ^±(n, j)` reaches `r`, calling `visit(n, X(n))`
/// after every step.
pub fn run_state_to_inverse_local_time(
    w: &WeightFunction,
    query: InverseLocalTimeQuery,
    state: &mut WalkState,
    cap: u64,
    mut visit: impl FnMut(u64, i64),
) -> Result<TrajectorySummary> {
    let counter = |s: &WalkState| match query.sign {
        Sign::Plus => s.field().ell_plus(query.j),
        Sign::Minus => s.field().ell_minus(query.j),
    };
    let (mut lo, mut hi) = (state.position(), state.position());
    while counter(state) < query.r {
        if state.steps() >= cap {
            return Err(Error::CapExhausted {
                cap,
                context: format!("inverse local time T{}_{{{},{}}}", query.sign, query.j, query.r),
            });
        }
        let x = state.advance(w);
        lo = lo.min(x);
        hi = hi.max(x);
        visit(state.steps(), x);
    }
    Ok(TrajectorySummary {
        steps: state.steps(),
        final_position: state.position(),
        min_position: lo,
        max_position: hi,
    })
}

/// Simulates the walk with stream `(seed, replicate)` until the inverse local
/// time of `query`, returning `Λ`, `L` and a trajectory summary.
pub fn run_to_inverse_local_time(
    w: &WeightFunction,
    query: InverseLocalTimeQuery,
    seed: u64,
    replicate: u64,
    cap: u64,
) -> Result<StoppedRun> {
    let mut state = WalkState::new(seed, replicate);
    let summary = run_state_to_inverse_local_time(w, query, &mut state, cap, |_, _| {})?;
    Ok(StoppedRun {
        query,
        profile: LocalTimeProfile::from_field(state.field(), summary.steps),
        oriented: OrientedProfile::from_field(state.field(), query.sign),
        summary,
    })
}

/// Independent η chains, one per site, created on first use and advanced
/// only as far as requested.
struct SiteChains {
    seed: u64,
    replicate: u64,
    chains: HashMap<i64, EtaChain>,
    cap: u64,
    spent: u64,
}

impl SiteChains {
    fn value(&mut self, site: i64, index: u64, w: &WeightFunction) -> Result<i64> {
        let (seed, replicate) = (self.seed, self.replicate);
        let chain = self.chains.entry(site).or_insert_with(|| {
            EtaChain::new(rng::stream(seed, &[tag::ETA_SITE, replicate, site as u64]))
        });
        self.spent += index.saturating_sub(chain.index());
        if self.spent > self.cap {
            return Err(Error::CapExhausted {
                cap: self.cap,
                context: "eta-driven profile".into(),
            });
        }
        chain.value_at(index, w)
    }
}

/// `L` (and the implied `Λ`) for `query` built from independent η chains.
/// `cap` bounds the total number of η transitions.
pub fn eta_driven_profile(
    w: &WeightFunction,
    query: InverseLocalTimeQuery,
    seed: u64,
    replicate: u64,
    cap: u64,
) -> Result<(LocalTimeProfile, OrientedProfile)> {
    if query.sign == Sign::Minus {
        let (lam, l) = eta_driven_profile(w, query.mirrored(), seed, replicate, cap)?;
        return Ok((lam.reflected(), l.reflected()));
    }
    let j = query.j;
    let x_stop = query.stopping_position();
    let d = |k: i64| gradient_sign(x_stop, k);
    let mut chains = SiteChains {
        seed,
        replicate,
        chains: HashMap::new(),
        cap,
        spent: 0,
    };

    let r = query.r as i64;
    let mut up = vec![r];
    let mut k = j;
    loop {
        let m = up[up.len() - 1] - d(k);
        debug_assert!(m >= 0);
        let next = if m == 0 {
            0
        } else {
            m + chains.value(k + 1, m as u64, w)?
        };
        up.push(next);
        k += 1;
        if next == 0 && k >= x_stop.max(0) {
            break;
        }
    }

    let mut down = vec![r];
    let mut k = j;
    loop {
        let l = down[down.len() - 1];
        let left_jumps = if l == 0 { 0 } else { l + chains.value(k, l as u64, w)? };
        let next = left_jumps + d(k - 1);
        down.push(next);
        k -= 1;
        if next == 0 && k < x_stop.min(0) {
            break;
        }
    }

    // sites k_lo..=k_hi
    let k_lo = j - (down.len() as i64 - 1);
    let mut values: Vec<u64> = down.iter().rev().map(|&v| v as u64).collect();
    values.extend(up.iter().skip(1).map(|&v| v as u64));
    let oriented = OrientedProfile::from_values(Sign::Plus, k_lo, values);

    let (lo, hi) = oriented.range();
    let lam: Vec<u64> = (lo - 1..=hi)
        .map(|k| (2 * oriented.get(k) as i64 - d(k)) as u64)
        .collect();
    let total = lam.iter().sum();
    Ok((LocalTimeProfile::from_values(lo - 1, &lam, total), oriented))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsistencyViolation {
    /// `|Λ(k) - 2L| > 1`.
    Gradient { k: i64, lambda: u64, l: u64 },
    /// `T != Σ Λ`.
    Total { stopping_time: u64, sum: u64 },
    /// `Λ` vanishes inside `[λ, ρ]`.
    Gap { k: i64 },
}

/// Checks `|Λ - 2L| <= 1` pointwise, `T = Σ Λ` and positivity on `[λ, ρ]`.
pub fn profile_consistency(
    profile: &LocalTimeProfile,
    oriented: &OrientedProfile,
) -> std::result::Result<(), ConsistencyViolation> {
    if profile.total() != profile.stopping_time {
        return Err(ConsistencyViolation::Total {
            stopping_time: profile.stopping_time,
            sum: profile.total(),
        });
    }
    if let Some((k, _)) = profile.iter().find(|&(_, v)| v == 0) {
        return Err(ConsistencyViolation::Gap { k });
    }
    let (olo, ohi) = oriented.range();
    let lo = profile.lambda_edge.min(olo - 1) - 1;
    let hi = profile.rho_edge.max(ohi) + 1;
    for k in lo..=hi {
        let lambda = profile.get(k);
        let l = oriented.paired_with_edge(k);
        if (lambda as i64 - 2 * l as i64).abs() > 1 {
            return Err(ConsistencyViolation::Gradient { k, lambda, l });
        }
    }
    Ok(())
}

/// `(|x| - |y| + 2h)₊`.
pub fn tent(x: f64, y: f64, h: f64) -> f64 {
    (x.abs() - y.abs() + 2.0 * h).max(0.0)
}

/// `sup_y |A⁻¹ Λ(⌊A y⌋) - (|x| - |y| + 2h)₊|`, evaluated at the lattice points
/// `y = k/A` over the profile's support and the tent's support plus a margin.
pub fn rescaled_deviation(profile: &LocalTimeProfile, a: f64, x: f64, h: f64) -> f64 {
    let reach = (a * (x.abs() + 2.0 * h)).ceil() as i64 + 2;
    let lo = profile.lambda_edge.min(-reach);
    let hi = profile.rho_edge.max(reach);
    (lo..=hi)
        .map(|k| (profile.get(k) as f64 / a - tent(x, k as f64 / a, h)).abs())
        .fold(0.0, f64::max)
}

/// `(A⁻¹λ, A⁻¹ρ)`.
pub fn rescaled_edges(profile: &LocalTimeProfile, a: f64) -> (f64, f64) {
    (profile.lambda_edge as f64 / a, profile.rho_edge as f64 / a)
}

/// Writes `k,Lambda,L` over the union of both supports.
pub fn write_profile_csv<W: Write>(
    profile: &LocalTimeProfile,
    oriented: &OrientedProfile,
    mut out: W,
) -> Result<()> {
    writeln!(out, "k,Lambda,L")?;
    let (olo, ohi) = oriented.range();
    let lo = profile.lambda_edge.min(olo);
    let hi = profile.rho_edge.max(ohi);
    for k in lo..=hi {
        writeln!(out, "{k},{},{}", profile.get(k), oriented.get(k))?;
    }
    Ok(())
}

/// Provenance record written next to a profile dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileManifest {
    pub query: InverseLocalTimeQuery,
    pub seed: u64,
    pub a: f64,
    pub x: f64,
    pub h: f64,
    pub statistic: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base2() -> WeightFunction {
        WeightFunction::exponential(2.0).unwrap()
    }

    #[test]
    fn r_must_be_positive() {
        assert!(InverseLocalTimeQuery::new(0, 0, Sign::Plus).is_err());
    }

    #[test]
    fn first_right_step_from_origin() {
        let w = base2();
        let q = InverseLocalTimeQuery::new(0, 1, Sign::Plus).unwrap();
        for rep in 0..200 {
            let run = run_to_inverse_local_time(&w, q, 5, rep, q.default_cap()).unwrap();
            assert_eq!(run.summary.final_position, 1);
            assert!(run.profile.get(0) >= 1);
            assert_eq!(run.oriented.get(0), 1);
            // the walk never stood on site 1 before T
            assert_eq!(run.oriented.get(1), 0);
            profile_consistency(&run.profile, &run.oriented).unwrap();
        }
    }

    #[test]
    fn direct_runs_are_consistent_for_both_signs() {
        let w = base2();
        for (rep, (j, r, sign)) in [(3, 4, Sign::Plus), (-5, 2, Sign::Minus), (-2, 6, Sign::Plus), (4, 3, Sign::Minus)]
            .into_iter()
            .enumerate()
        {
            let q = InverseLocalTimeQuery::new(j, r, sign).unwrap();
            let run = run_to_inverse_local_time(&w, q, 9, rep as u64, q.default_cap()).unwrap();
            assert_eq!(run.summary.final_position, q.stopping_position());
            profile_consistency(&run.profile, &run.oriented).unwrap();
        }
    }

    #[test]
    fn eta_profiles_are_consistent() {
        let w = base2();
        for (rep, (j, r, sign)) in [(0, 1, Sign::Plus), (-7, 5, Sign::Plus), (6, 3, Sign::Plus), (-3, 4, Sign::Minus), (0, 2, Sign::Minus)]
            .into_iter()
            .enumerate()
        {
            let q = InverseLocalTimeQuery::new(j, r, sign).unwrap();
            let (lam, l) = eta_driven_profile(&w, q, 2, rep as u64, 1 << 30).unwrap();
            assert_eq!(l.get(j), r);
            profile_consistency(&lam, &l).unwrap();
        }
    }

    #[test]
    fn eta_profile_absorbs_at_zero() {
        let w = base2();
        let q = InverseLocalTimeQuery::new(-10, 8, Sign::Plus).unwrap();
        for rep in 0..50 {
            let (lam, l) = eta_driven_profile(&w, q, 3, rep, 1 << 30).unwrap();
            let (lo, hi) = l.range();
            assert_eq!(l.get(lo), 0);
            assert_eq!(l.get(hi), 0);
            // edges <j, j+1> and <-1, 0> are always crossed
            assert!(lam.lambda_edge <= -10 && lam.rho_edge >= -1);
        }
    }

    #[test]
    fn perturbed_profiles_are_rejected() {
        let w = base2();
        let q = InverseLocalTimeQuery::new(1, 3, Sign::Plus).unwrap();
        let run = run_to_inverse_local_time(&w, q, 1, 0, q.default_cap()).unwrap();
        let k = run.profile.lambda_edge + 1;
        let mut vals: Vec<u64> = run.profile.iter().map(|(_, v)| v).collect();
        vals[1] += 2;
        let bumped = LocalTimeProfile::from_values(run.profile.lambda_edge, &vals, run.profile.stopping_time + 2);
        assert!(matches!(
            profile_consistency(&bumped, &run.oriented),
            Err(ConsistencyViolation::Gradient { k: kk, .. }) if kk == k
        ));
        let wrong_t = LocalTimeProfile::from_values(run.profile.lambda_edge, &vals, run.profile.stopping_time);
        assert!(matches!(
            profile_consistency(&wrong_t, &run.oriented),
            Err(ConsistencyViolation::Total { .. })
        ));
    }

    #[test]
    fn tent_values() {
        assert_eq!(tent(-1.0, 0.0, 1.0), 3.0);
        assert_eq!(tent(-1.0, 3.0, 1.0), 0.0);
        assert_eq!(tent(-1.0, -3.0, 1.0), 0.0);
        assert_eq!(tent(0.0, 0.7, 0.0), 0.0);
    }

    #[test]
    fn exact_tent_has_zero_deviation() {
        let (a, x, h) = (10.0, 0.5, 1.0);
        let reach = 25;
        let vals: Vec<u64> = (-reach..=reach)
            .map(|k| (a * tent(x, k as f64 / a, h)).round() as u64)
            .collect();
        let total = vals.iter().sum();
        let p = LocalTimeProfile::from_values(-reach, &vals, total);
        assert!(rescaled_deviation(&p, a, x, h) < 1e-12);
        let (l, r) = rescaled_edges(&p, a);
        assert!((l + 2.4).abs() < 1e-12 && (r - 2.4).abs() < 1e-12);
    }

    #[test]
    fn reflection_round_trips() {
        let p = LocalTimeProfile::from_values(-2, &[1, 3, 2], 6);
        let r = p.reflected();
        assert_eq!((r.lambda_edge, r.rho_edge), (-1, 1));
        assert_eq!(r.get(-1), 2);
        assert_eq!(r.get(1), 1);
        assert_eq!(r.reflected(), p);
        let l = OrientedProfile::from_values(Sign::Plus, -1, vec![1, 2, 0]);
        let lr = l.reflected();
        assert_eq!(lr.sign, Sign::Minus);
        assert_eq!(lr.get(1), 1);
        assert_eq!(lr.get(-1), 0);
    }

    #[test]
    fn csv_dump() {
        let w = base2();
        let q = InverseLocalTimeQuery::new(0, 1, Sign::Plus).unwrap();
        let run = run_to_inverse_local_time(&w, q, 1, 0, q.default_cap()).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&run.profile, &run.oriented, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("k,Lambda,L\n"));
    }
}
