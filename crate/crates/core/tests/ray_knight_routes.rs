use std::collections::BTreeMap;

use selfrepel_core::aux_chain::EtaKernel;
use selfrepel_core::limit_lab::stopped_law;
use selfrepel_core::ray_knight::{
    eta_driven_profile, profile_consistency, run_to_inverse_local_time, InverseLocalTimeQuery,
};
use selfrepel_core::stats::{chi_square_homogeneity, ks_two_sample};
use selfrepel_core::{Sign, WeightFunction};

fn base2() -> WeightFunction {
    WeightFunction::exponential(2.0).unwrap()
}

/// Exact law of `L_{0,r}(1) = (r-1) + η(r-1)` with `η(m) ~ P^m(0, ·)`.
fn eta_law_of_l1(w: &WeightFunction, r: u64) -> BTreeMap<i64, f64> {
    let k = EtaKernel::build(w).unwrap();
    let mut v = k.delta(0).unwrap();
    for _ in 0..r - 1 {
        v = k.apply(&v);
    }
    let (lo, _) = k.window();
    v.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (r as i64 - 1 + lo + i as i64, p))
        .collect()
}

#[test]
fn enumeration_reproduces_eta_law_of_first_site() {
    for w in [base2(), WeightFunction::exponential(10.0).unwrap()] {
        for r in [1u64, 2, 3] {
            let q = InverseLocalTimeQuery::new(0, r, Sign::Plus).unwrap();
            let exact = stopped_law(&w, q, 20, |n| n.ell_plus(1) as i64).unwrap();
            let eta = eta_law_of_l1(&w, r);
            // enumeration only misses the paths that have not stopped yet
            for (v, p) in &eta {
                let e = exact.law.get(v).copied().unwrap_or(0.0);
                assert!(
                    e <= p + 1e-12 && p - e <= exact.unresolved + 1e-12,
                    "{} r={r} L(1)={v}: enumeration {e}, eta {p}, unresolved {}",
                    w.label(),
                    exact.unresolved
                );
            }
            assert!(exact.law.keys().all(|v| eta.contains_key(v)));
        }
    }
}

#[test]
fn crossing_count_is_not_shifted() {
    // with r = 2 site 1 is left downwards exactly once before T, so
    // L(1) = 1 + η(1); the shifted form 2 + η(2) has a visibly different law
    let w = base2();
    let q = InverseLocalTimeQuery::new(0, 2, Sign::Plus).unwrap();
    let exact = stopped_law(&w, q, 20, |n| n.ell_plus(1) as i64).unwrap();
    let k = EtaKernel::build(&w).unwrap();
    let v = k.apply(&k.apply(&k.delta(0).unwrap()));
    let (lo, _) = k.window();
    let shifted: BTreeMap<i64, f64> = v
        .iter()
        .enumerate()
        .map(|(i, &p)| (2 + lo + i as i64, p))
        .collect();
    let tv: f64 = shifted
        .iter()
        .map(|(x, p)| (p - exact.law.get(x).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv > 0.1 + exact.unresolved, "tv {tv}, unresolved {}", exact.unresolved);
}

#[test]
fn first_crossing_time_matches_enumeration() {
    let w = base2();
    let q = InverseLocalTimeQuery::new(0, 1, Sign::Plus).unwrap();
    let exact = stopped_law(&w, q, 10, |n| n.depth as i64).unwrap();
    let n = 200_000u64;
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for i in 0..n {
        let run = run_to_inverse_local_time(&w, q, 77, i, q.default_cap()).unwrap();
        *counts.entry(run.summary.steps as i64).or_insert(0) += 1;
    }
    for (t, p) in &exact.law {
        let f = counts.get(t).copied().unwrap_or(0) as f64 / n as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((f - p).abs() < 5.0 * sd + 1e-9, "T={t}: {f} vs {p}");
    }
}

#[test]
fn two_routes_agree_away_from_origin() {
    let w = base2();
    let n = 20_000u64;
    for (j, r, sign) in [(-3, 2, Sign::Plus), (2, 3, Sign::Minus), (4, 2, Sign::Plus)] {
        let q = InverseLocalTimeQuery::new(j, r, sign).unwrap();
        for site in [j - 2, j + 1, 0] {
            let mut direct = BTreeMap::new();
            let mut eta = BTreeMap::new();
            for i in 0..n {
                let run = run_to_inverse_local_time(&w, q, 5, i, q.default_cap()).unwrap();
                *direct.entry(run.profile.get(site) as i64).or_insert(0u64) += 1;
                let (lam, _) = eta_driven_profile(&w, q, 6, i, 1 << 24).unwrap();
                *eta.entry(lam.get(site) as i64).or_insert(0u64) += 1;
            }
            let chi = chi_square_homogeneity(&direct, &eta, 10);
            assert!(chi.p_value > 1e-4, "query ({j},{r},{sign}) Λ({site}): p = {}", chi.p_value);
        }
    }
}

#[test]
fn mirror_queries_have_reflected_profiles() {
    let w = base2();
    let n = 5_000u64;
    let (j, r) = (3i64, 4u64);
    let plus = InverseLocalTimeQuery::new(j, r, Sign::Plus).unwrap();
    let minus = InverseLocalTimeQuery::new(-j, r, Sign::Minus).unwrap();
    let a: Vec<f64> = (0..n)
        .map(|i| run_to_inverse_local_time(&w, plus, 8, i, plus.default_cap()).unwrap().profile.get(0) as f64)
        .collect();
    let b: Vec<f64> = (0..n)
        .map(|i| run_to_inverse_local_time(&w, minus, 9, i, minus.default_cap()).unwrap().profile.get(-1) as f64)
        .collect();
    assert!(ks_two_sample(&a, &b).p_value > 0.001);
}

#[test]
fn random_queries_are_consistent() {
    let w = WeightFunction::exponential(3.0).unwrap();
    for i in 0..100u64 {
        let j = (i as i64 % 21) - 10;
        let r = 1 + i % 9;
        let sign = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let q = InverseLocalTimeQuery::new(j, r, sign).unwrap();
        let run = run_to_inverse_local_time(&w, q, 3, i, q.default_cap()).unwrap();
        profile_consistency(&run.profile, &run.oriented).unwrap();
        assert_eq!(run.profile.total(), run.summary.steps);
        let (lam, l) = eta_driven_profile(&w, q, 3, i, 1 << 24).unwrap();
        profile_consistency(&lam, &l).unwrap();
        assert_eq!(l.get(j), r);
    }
}

#[test]
fn cap_exhaustion_is_an_error() {
    let w = base2();
    let q = InverseLocalTimeQuery::new(50, 50, Sign::Plus).unwrap();
    assert!(run_to_inverse_local_time(&w, q, 1, 0, 100).is_err());
}
