//! The acceptance matrix: one runner per criterion, each a deterministic
//! function of the master seed.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use selfrepel_core::aux_chain::{
    coalescence_times, exponential_tail_check, fixed_point_residual, hitting_time_experiment, lemma_constant,
    stationary_rho, survival_fit, tv_decay_curve, tv_decay_fit, EtaKernel, DEFAULT_TRUNCATION,
};
use selfrepel_core::{Error, Result};
use selfrepel_core::limit_lab::{
    fixed_time_uniform_experiment, identity_starteq_check, oracle_comparison, position_law_experiment,
    tent_scaling_experiment, FixedTimeConfig, PositionLawConfig, TentScalingConfig,
};
use selfrepel_core::presets::{fixed_trajectory, profile_figure, stopped_trajectory};
use selfrepel_core::ray_knight::{
    eta_driven_profile, profile_consistency, run_to_inverse_local_time, InverseLocalTimeQuery,
};
use selfrepel_core::rng::{self, tag};
use selfrepel_core::stats::chi_square_homogeneity;
use selfrepel_core::weight::WeightFunction;
use selfrepel_core::Sign;

pub const DEFAULT_SEED: u64 = 20_240_917;

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "exact-oracle equivalence"),
    (2, "stationarity of rho"),
    (3, "exponential convergence"),
    (4, "two-route profile equivalence"),
    (5, "tent convergence"),
    (6, "stopping-time scaling"),
    (7, "position law at geometric time"),
    (8, "uniform law at fixed time (conditional)"),
    (9, "hitting-time bound"),
    (10, "coalescence tail"),
    (11, "figure reproduction"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub summary: String,
    pub statistics: BTreeMap<String, f64>,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary
        )
    }
}

struct Builder {
    id: u8,
    pass: bool,
    notes: Vec<String>,
    statistics: BTreeMap<String, f64>,
}

impl Builder {
    fn new(id: u8) -> Self {
        Self {
            id,
            pass: true,
            notes: Vec::new(),
            statistics: BTreeMap::new(),
        }
    }

    fn check(&mut self, ok: bool, note: impl Into<String>) {
        self.pass &= ok;
        let note = note.into();
        self.notes.push(if ok { note } else { format!("{note} [x]") });
    }

    fn stat(&mut self, key: impl Into<String>, value: f64) {
        self.statistics.insert(key.into(), value);
    }

    fn finish(self) -> CriterionOutcome {
        CriterionOutcome {
            id: self.id,
            title: title(self.id).to_string(),
            pass: self.pass,
            summary: self.notes.join("; "),
            statistics: self.statistics,
        }
    }
}

fn title(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

fn builtin() -> [WeightFunction; 2] {
    [
        WeightFunction::exponential(2.0).expect("valid"),
        WeightFunction::exponential(10.0).expect("valid"),
    ]
}

fn base2() -> WeightFunction {
    WeightFunction::exponential(2.0).expect("valid")
}

/// Runs criterion `id` with master seed `seed`.
pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionOutcome> {
    match id {
        1 => exact_oracle(seed),
        2 => stationarity(seed),
        3 => convergence(),
        4 => two_routes(seed),
        5 => tent(seed),
        6 => stopping_time(seed),
        7 => position_law(seed),
        8 => fixed_time(seed),
        9 => hitting(seed),
        10 => coalescence(seed),
        11 => figures(seed),
        _ => Err(Error::InvalidParameter {
            name: "criterion",
            reason: format!("no criterion {id} (1..=11)"),
        }),
    }
}

/// Every criterion in order. Errors are reported as failures.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|&(id, t)| {
            run_criterion(id, seed).unwrap_or_else(|e| CriterionOutcome {
                id,
                title: t.to_string(),
                pass: false,
                summary: format!("error: {e}"),
                statistics: BTreeMap::new(),
            })
        })
        .collect()
}

fn exact_oracle(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(1);
    for w in builtin() {
        let r = oracle_comparison(&w, 12, 1_000_000, seed, 5e-3)?;
        let err = r.stat("max_abs_error");
        b.stat(format!("max_abs_error[{}]", w.label()), err);
        b.check(r.pass, format!("{} max |MC - exact| = {err:.2e} (< 5e-3)", w.label()));
        let s = identity_starteq_check(&w, 10)?;
        b.stat(format!("starteq_error[{}]", w.label()), s.max_error);
        b.check(s.max_error < 1e-12, format!("start identity err {:.1e}", s.max_error));
    }
    Ok(b.finish())
}

fn stationarity(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(2);
    let mut weights: Vec<WeightFunction> = builtin().into();
    let mut r = rng::stream(seed, &[tag::QUERY, 2]);
    for _ in 0..20 {
        weights.push(WeightFunction::random_valid_table(&mut r, 6));
    }
    let (mut worst_res, mut worst_mean, mut asym) = (0.0f64, 0.0f64, 0usize);
    for w in &weights {
        let rho = stationary_rho(w, 1e-300)?;
        let (lo, hi) = rho.support();
        let k = EtaKernel::build_covering(w, lo, hi, DEFAULT_TRUNCATION)?;
        worst_res = worst_res.max(fixed_point_residual(&k, &rho)?);
        worst_mean = worst_mean.max((rho.mean() + 0.5).abs());
        asym += (lo..=hi).filter(|&x| rho.get(x) != rho.get(-1 - x)).count();
    }
    b.stat("max_residual", worst_res);
    b.stat("max_mean_error", worst_mean);
    b.stat("asymmetric_sites", asym as f64);
    b.check(worst_res < 1e-12, format!("max |ρP - ρ|₁ = {worst_res:.1e}"));
    b.check(worst_mean < 1e-9, format!("max |Σxρ + 1/2| = {worst_mean:.1e}"));
    b.check(asym == 0, format!("{asym} asymmetric sites over {} weights", weights.len()));
    Ok(b.finish())
}

fn convergence() -> Result<CriterionOutcome> {
    let mut b = Builder::new(3);
    for w in builtin() {
        let rho = stationary_rho(&w, 1e-300)?;
        let (lo, hi) = rho.support();
        let k = EtaKernel::build_covering(&w, lo, hi, DEFAULT_TRUNCATION)?;
        let curve = tv_decay_curve(&k, &rho, 40)?;
        let monotone = curve.windows(2).all(|p| p[1].tv <= p[0].tv);
        let fit = tv_decay_fit(&curve, 5, 40).ok_or_else(|| Error::Violation("TV fit failed".into()))?;
        let tail = exponential_tail_check(&k, &rho, &[1, 2, 5, 10, 25, 40])?;
        let l = w.label();
        b.stat(format!("r2[{l}]"), fit.r2);
        b.stat(format!("slope[{l}]"), fit.slope);
        b.check(monotone, format!("{l} TV monotone"));
        b.check(
            fit.r2 > 0.98 && fit.slope < 0.0,
            format!("slope {:.3}, R² {:.4}", fit.slope, fit.r2),
        );
        b.check(tail.holds(), format!("bound at {} points", tail.checked));
    }
    Ok(b.finish())
}

fn law_of_l1(samples: Vec<u64>) -> BTreeMap<i64, u64> {
    let mut m = BTreeMap::new();
    for v in samples {
        *m.entry(v as i64).or_insert(0) += 1;
    }
    m
}

fn two_routes(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(4);
    let w = base2();
    let n = 100_000u64;
    for r in [1u64, 2] {
        let q = InverseLocalTimeQuery::new(0, r, Sign::Plus)?;
        let direct: Vec<u64> = (0..n)
            .into_par_iter()
            .map(|i| Ok(run_to_inverse_local_time(&w, q, seed, i, q.default_cap())?.oriented.get(1)))
            .collect::<Result<_>>()?;
        let eta: Vec<u64> = (0..n)
            .into_par_iter()
            .map(|i| Ok(eta_driven_profile(&w, q, seed, i, 1 << 24)?.1.get(1)))
            .collect::<Result<_>>()?;
        let chi = chi_square_homogeneity(&law_of_l1(direct), &law_of_l1(eta), 10);
        b.stat(format!("chi2_p[r={r}]"), chi.p_value);
        b.check(
            chi.p_value > 0.001,
            format!("L_(0,{r})(1): p = {:.3} (df {})", chi.p_value, chi.df),
        );
    }

    let runs = 10_000u64;
    let bad = (0..runs)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut qr = rng::stream(seed, &[tag::QUERY, 4, i]);
            let j = qr.random_range(-20i64..=20);
            let r = qr.random_range(1u64..=20);
            let sign = if qr.random::<bool>() { Sign::Plus } else { Sign::Minus };
            let q = InverseLocalTimeQuery::new(j, r, sign)?;
            let run = run_to_inverse_local_time(&w, q, seed ^ 0x4, i, q.default_cap())?;
            let (lam, l) = eta_driven_profile(&w, q, seed ^ 0x4, i, 1 << 26)?;
            Ok(u64::from(profile_consistency(&run.profile, &run.oriented).is_err())
                + u64::from(profile_consistency(&lam, &l).is_err()))
        })
        .try_reduce(|| 0, |a, c| Ok(a + c))?;
    b.stat("inconsistent_profiles", bad as f64);
    b.check(bad == 0, format!("{bad} inconsistent of {} profiles", 2 * runs));
    Ok(b.finish())
}

fn tent(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(5);
    let cfg = TentScalingConfig::default();
    let out = tent_scaling_experiment(&base2(), &cfg, seed)?;
    let medians: Vec<String> = out.rows.iter().map(|r| format!("A={}: {:.3}", r.a, r.median_sup)).collect();
    let decreasing = out.rows.windows(2).all(|p| p[1].median_sup < p[0].median_sup);
    let last = out.rows.last().expect("rows");
    b.check(decreasing, format!("median sup {}", medians.join(", ")));
    b.check(
        last.median_sup < cfg.sup_threshold,
        format!("A={} median {:.3} (< {})", last.a, last.median_sup, cfg.sup_threshold),
    );
    let edge = cfg.x.abs() + 2.0 * cfg.h;
    let worst_edge = out
        .rows
        .iter()
        .flat_map(|r| [(-r.median_left_edge / edge - 1.0).abs(), (r.median_right_edge / edge - 1.0).abs()])
        .fold(0.0f64, f64::max);
    b.check(worst_edge <= cfg.edge_tolerance, format!("edges off by at most {:.1}%", 100.0 * worst_edge));
    for r in &out.rows {
        b.stat(format!("median_sup[A={}]", r.a), r.median_sup);
        b.stat(format!("left_edge[A={}]", r.a), r.median_left_edge);
        b.stat(format!("right_edge[A={}]", r.a), r.median_right_edge);
    }
    Ok(b.finish())
}

fn stopping_time(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(6);
    let cfg = TentScalingConfig {
        a_values: vec![400.0],
        replicates: 100,
        ..TentScalingConfig::default()
    };
    let out = tent_scaling_experiment(&base2(), &cfg, seed)?;
    let row = &out.rows[0];
    b.stat("fraction_in_band", row.t_in_band);
    b.stat("median_t_scaled", row.median_t_scaled);
    b.check(
        row.t_in_band >= cfg.t_fraction,
        format!(
            "{:.0}% of A⁻²T within ±10% of {} (median {:.3})",
            100.0 * row.t_in_band,
            selfrepel_core::limit_lab::t_limit(cfg.x, cfg.h),
            row.median_t_scaled
        ),
    );
    Ok(b.finish())
}

fn position_law(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(7);
    let cfg = PositionLawConfig::default();
    let out = position_law_experiment(&base2(), cfg, seed, (60.0 * cfg.a / cfg.s) as u64)?;
    let ks = out.report.stat("ks");
    b.stat("ks", ks);
    b.stat("mirror_ks_p", out.report.stat("mirror_ks_p"));
    b.check(ks < cfg.ks_threshold, format!("KS {ks:.4} (< {})", cfg.ks_threshold));
    Ok(b.finish())
}

fn fixed_time(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(8);
    let cfg = FixedTimeConfig::default();
    let out = fixed_time_uniform_experiment(&base2(), cfg, seed)?;
    let ks = out.report.stat("ks");
    let exceed = out.report.stat("hull_exceedances");
    b.stat("ks", ks);
    b.stat("hull_exceedances", exceed);
    b.stat("max_abs", out.report.stat("max_abs"));
    b.check(ks < cfg.ks_threshold, format!("KS {ks:.4} (< {})", cfg.ks_threshold));
    b.check(
        exceed == 0.0,
        format!("{exceed} samples beyond 1.1 (max |x| {:.3})", out.report.stat("max_abs")),
    );
    Ok(b.finish())
}

fn hitting(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(9);
    let w = base2();
    let kernel = EtaKernel::build(&w)?;
    let lemma = lemma_constant(&w, &kernel, 1.0, 1000, seed, 1 << 24)?;
    let r_list: Vec<u64> = (1..=10).map(|i| 10 * i).collect();
    let rows = hitting_time_experiment(&w, &r_list, 1000, seed, 1 << 24)?;
    b.stat("K", lemma.k_delta);
    b.stat("n_delta", lemma.n_delta as f64);
    let worst = rows
        .iter()
        .map(|r| r.mean_tau - 3.0 * r.r as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    for r in &rows {
        b.stat(format!("mean_tau[r={}]", r.r), r.mean_tau);
    }
    b.check(
        worst <= lemma.k_delta,
        format!(
            "max(mean τ₀ - 3r) = {worst:.2} <= K = {:.2} (n_δ = {})",
            lemma.k_delta, lemma.n_delta
        ),
    );
    Ok(b.finish())
}

fn coalescence(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(10);
    let w = base2();
    let rho = stationary_rho(&w, 1e-300)?;
    let times = coalescence_times(&w, &rho, seed, 100_000, 100_000)?;
    let s = survival_fit(&times, 5, 50);
    let fit = s.fit.ok_or_else(|| Error::Violation("too few survivors to fit".into()))?;
    b.stat("r2", fit.r2);
    b.stat("slope", fit.slope);
    b.stat("censored", s.censored as f64);
    b.check(
        fit.r2 > 0.95 && fit.slope < 0.0,
        format!("log-survival slope {:.3}, R² {:.4} over {} points", fit.slope, fit.r2, fit.n),
    );
    Ok(b.finish())
}

fn figures(seed: u64) -> Result<CriterionOutcome> {
    let mut b = Builder::new(11);
    let q = InverseLocalTimeQuery::new(100, 800, Sign::Plus)?;
    for w in builtin() {
        let l = w.label();
        let fig = profile_figure(&w, q, seed, 0)?;
        let err = fig.peak_relative_error();
        b.stat(format!("peak[{l}]"), fig.peak as f64);
        b.stat(format!("sup_deviation[{l}]"), fig.sup_deviation);
        b.check(err <= 0.1, format!("{l} peak {} vs {}", fig.peak, fig.theory_peak));
        let fixed = fixed_trajectory(&w, 1_000_000, seed, 1000);
        let stopped = stopped_trajectory(&w, q, seed, 1000)?;
        for t in [&fixed, &stopped] {
            b.stat(format!("hull_ratio[{l}, {}]", t.label), t.hull.max_ratio);
            b.check(t.hull.confined, format!("{} hull ratio {:.3}", t.label, t.hull.max_ratio));
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(0, 1).is_err());
        assert!(run_criterion(12, 1).is_err());
    }

    #[test]
    fn outcome_line() {
        let o = CriterionOutcome {
            id: 3,
            title: "x".into(),
            pass: false,
            summary: "s".into(),
            statistics: BTreeMap::new(),
        };
        assert_eq!(o.to_string(), "[FAIL] criterion  3 x: s");
    }
}
