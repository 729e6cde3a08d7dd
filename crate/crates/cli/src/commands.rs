//! One function per subcommand. Each resolves its parameters from the
//! config, runs the core routine and writes its files.

use std::path::Path;

use serde_json::{json, Value};

use selfrepel_core::aux_chain::{
    coalescence_times, exponential_tail_check, fixed_point_residual, hitting_time_experiment, lemma_constant,
    stationary_rho, survival_fit, tv_decay_curve, tv_decay_fit, EtaKernel, StationaryDistribution,
    DEFAULT_TRUNCATION,
};
use selfrepel_core::limit_lab::{
    fixed_time_uniform_experiment, identity_starteq_check, oracle_comparison, position_law_experiment,
    tent_scaling_experiment, ExperimentReport, FixedTimeConfig, PositionLawConfig, TentScalingConfig,
};
use selfrepel_core::presets::{self, fixed_trajectory, stopped_trajectory, tent_overlay, PresetKind, Trajectory};
use selfrepel_core::ray_knight::{
    eta_driven_profile, rescaled_deviation, run_to_inverse_local_time, InverseLocalTimeQuery, LocalTimeProfile,
    OrientedProfile, ProfileManifest,
};
use selfrepel_core::rng::{self, tag};
use selfrepel_suite::{self as suite, CRITERIA};
use selfrepel_core::{WalkState, WeightFunction};

use crate::config::{Check, Route, RunConfig};
use crate::output::{OutputDir, Table};
use crate::CliError;

const STATIONARY_TOLERANCE: f64 = 1e-300;

/// Config layer implied by a preset, checked against the command.
pub fn preset_config(name: &str, command: &str) -> Result<RunConfig, CliError> {
    let p = presets::preset(name)?;
    let d = RunConfig::default();
    let (owner, cfg) = match p.kind {
        PresetKind::Profile { base, j, r, sign } => (
            "profile",
            RunConfig {
                base: Some(base),
                j: Some(j),
                r: Some(r),
                sign: Some(sign.to_string()),
                ..d
            },
        ),
        PresetKind::Trajectory { base, steps, stopped } => (
            "simulate",
            RunConfig {
                base: Some(base),
                steps: Some(steps),
                stride: Some(100),
                j: Some(stopped.j),
                r: Some(stopped.r),
                sign: Some(stopped.sign.to_string()),
                ..d
            },
        ),
        PresetKind::Acceptance => (
            "limits",
            RunConfig {
                suite: Some("acceptance".into()),
                ..d
            },
        ),
    };
    if owner != command {
        return Err(CliError::Usage(format!("preset {name} belongs to `{owner}`, not `{command}`")));
    }
    Ok(cfg)
}

fn read_weight_table(path: &Path, tail_ratio: f64) -> Result<WeightFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read weight table {}: {e}", path.display())))?;
    let mut rows: Vec<(i64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with('z')) {
            continue;
        }
        let bad = || CliError::Usage(format!("{}:{}: expected `z,w`, got `{line}`", path.display(), i + 1));
        let (z, w) = line.split_once(',').ok_or_else(bad)?;
        let z: i64 = z.trim().parse().map_err(|_| bad())?;
        let w: f64 = w.trim().parse().map_err(|_| bad())?;
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Usage(format!("{}:{}: weight must be positive", path.display(), i + 1)));
        }
        rows.push((z, w));
    }
    let first = rows
        .first()
        .ok_or_else(|| CliError::Usage(format!("weight table {} is empty", path.display())))?
        .0;
    if rows.iter().enumerate().any(|(i, &(z, _))| z != first + i as i64) {
        return Err(CliError::Usage("weight table must list consecutive increasing z".into()));
    }
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(WeightFunction::table(first, &values, tail_ratio)?)
}

fn weight(cfg: &RunConfig) -> Result<WeightFunction, CliError> {
    let w = match &cfg.weight_table {
        Some(p) => read_weight_table(p, cfg.tail_ratio.unwrap_or(2.0))?,
        None => WeightFunction::exponential(cfg.base.unwrap_or(2.0))?,
    };
    w.ensure_valid(WeightFunction::DEFAULT_RANGE)?;
    Ok(w)
}

fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(suite::DEFAULT_SEED)
}

fn query(cfg: &RunConfig) -> Result<InverseLocalTimeQuery, CliError> {
    Ok(InverseLocalTimeQuery::new(cfg.j.unwrap_or(0), cfg.r.unwrap_or(1), cfg.sign())?)
}

fn finish(out: OutputDir, summary: Value) -> Result<(), CliError> {
    let dir = out.finish(summary)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn report_outcome(out: OutputDir, report: &ExperimentReport) -> Result<(), CliError> {
    let pass = report.pass;
    println!("{}: {}", report.experiment, if pass { "pass" } else { "FAIL" });
    for (k, v) in &report.statistics {
        println!("  {k} = {v}");
    }
    finish(out, json!({ "experiment": report.experiment, "pass": pass }))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} did not meet its thresholds", report.experiment)))
    }
}

fn trajectory_tables(t: &Trajectory) -> (Table, Table) {
    let mut path = Table::new(&["n", "position"]);
    let mut hull = Table::new(&["n", "upper", "lower"]);
    for &(n, x) in &t.points {
        path.push(vec![json!(n), json!(x)]);
        let s = (n as f64).sqrt();
        hull.push(vec![json!(n), json!(s), json!(-s)]);
    }
    (path, hull)
}

const TRAJECTORY_PLOT: &str = r#"for label in LABELS:
    path = load(f"trajectory{label}.__EXT__")
    hull = load(f"hull{label}.__EXT__")
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(path["n"], path["position"], lw=0.5, label="X(n)")
    ax.plot(hull["n"], hull["upper"], "k--", lw=0.8, label="±√n")
    ax.plot(hull["n"], hull["lower"], "k--", lw=0.8)
    ax.set_xlabel("n")
    ax.legend()
    fig.savefig(os.path.join(HERE, f"trajectory{label}.png"), dpi=150)"#;

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let seed = seed(cfg);
    let steps = cfg.steps.unwrap_or(100_000);
    let stride = cfg.stride.unwrap_or((steps / 10_000).max(1));
    let mut runs = vec![("", fixed_trajectory(&w, steps, seed, stride))];
    if cfg.r.is_some() {
        let stopped = stopped_trajectory(&w, query(cfg)?, seed, stride)?;
        runs[0].0 = "-fixed";
        runs.push(("-stopped", stopped));
    }
    let mut out = OutputDir::create("simulate", cfg, seed)?;
    let mut summary = Vec::new();
    for (suffix, t) in &runs {
        let (path, hull) = trajectory_tables(t);
        out.table(&format!("trajectory{suffix}"), &path)?;
        out.table(&format!("hull{suffix}"), &hull)?;
        let (n, x) = *t.points.last().expect("origin is always present");
        println!(
            "{}: X({n}) = {x}, max running |X|/√n = {:.3} ({})",
            t.label,
            t.hull.max_ratio,
            if t.hull.confined { "within hull" } else { "outside hull" }
        );
        summary.push(json!({ "label": t.label, "suffix": suffix, "final_position": x, "hull": t.hull }));
    }
    if cfg.field == Some(true) {
        let mut state = WalkState::with_rng(rng::stream(seed, &[tag::WALK, steps]));
        state.run_with(&w, steps, |_, _| {});
        let mut field = Table::new(&["k", "ell_plus", "ell_minus"]);
        for (k, p, m) in state.field().rows() {
            field.push(vec![json!(k), json!(p), json!(m)]);
        }
        out.table("field", &field)?;
    }
    let labels: Vec<String> = runs.iter().map(|(s, _)| format!("{s:?}")).collect();
    let ext = cfg.format.unwrap_or(crate::config::Format::Csv).extension();
    out.plot_stub(
        "plot_trajectory.py",
        &format!("LABELS = [{}]\n{}", labels.join(", "), TRAJECTORY_PLOT.replace("__EXT__", ext)),
    )?;
    finish(out, json!({ "weight": w.label(), "trajectories": summary }))
}

fn profile_table(q: InverseLocalTimeQuery, lam: &LocalTimeProfile, l: &OrientedProfile) -> Table {
    let mut t = Table::new(&["k", "Lambda", "L", "tent"]);
    let (olo, ohi) = l.range();
    let reach = q.j.abs() + 2 * q.r as i64;
    let lo = lam.lambda_edge.min(olo).min(-reach);
    let hi = lam.rho_edge.max(ohi).max(reach);
    for k in lo..=hi {
        t.push(vec![json!(k), json!(lam.get(k)), json!(l.get(k)), json!(tent_overlay(q.j, q.r, k))]);
    }
    t
}

const PROFILE_PLOT: &str = r#"p = load("profile.__EXT__")
fig, ax = plt.subplots(figsize=(8, 4))
ax.plot(p["k"], p["Lambda"], lw=0.6, label="Λ")
ax.plot(p["k"], p["tent"], "k--", lw=0.8, label="tent")
ax.set_xlabel("k")
ax.legend()
fig.savefig(os.path.join(HERE, "profile.png"), dpi=150)"#;

pub fn profile(cfg: &RunConfig) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let seed = seed(cfg);
    let q = query(cfg)?;
    let replicate = cfg.replicate.unwrap_or(0);
    let route = cfg.route.unwrap_or(Route::Direct);
    let (lam, l) = match route {
        Route::Direct => {
            let run = run_to_inverse_local_time(&w, q, seed, replicate, cfg.cap.unwrap_or(q.default_cap()))?;
            (run.profile, run.oriented)
        }
        Route::Eta => eta_driven_profile(&w, q, seed, replicate, cfg.cap.unwrap_or(1 << 32))?,
    };
    let a = q.r as f64;
    let manifest = ProfileManifest {
        query: q,
        seed,
        a,
        x: q.j as f64 / a,
        h: 1.0,
        statistic: rescaled_deviation(&lam, a, q.j as f64 / a, 1.0),
    };
    let theory_peak = tent_overlay(q.j, q.r, 0);
    let peak = lam.peak();
    println!(
        "{}: T = {}, peak {peak} vs tent {theory_peak}, sup-deviation {:.4}",
        w.label(),
        lam.stopping_time,
        manifest.statistic
    );
    let mut out = OutputDir::create("profile", cfg, seed)?;
    out.table("profile", &profile_table(q, &lam, &l))?;
    out.json("profile_manifest.json", &manifest)?;
    let ext = cfg.format.unwrap_or(crate::config::Format::Csv).extension();
    out.plot_stub("plot_profile.py", &PROFILE_PLOT.replace("__EXT__", ext))?;
    finish(
        out,
        json!({
            "weight": w.label(),
            "route": route,
            "stopping_time": lam.stopping_time,
            "peak": peak,
            "theory_peak": theory_peak,
            "peak_relative_error": (peak as f64 / theory_peak - 1.0).abs(),
            "sup_deviation": manifest.statistic,
            "edges": [lam.lambda_edge, lam.rho_edge],
        }),
    )
}

fn rho_and_kernel(w: &WeightFunction, tolerance: f64) -> Result<(StationaryDistribution, EtaKernel), CliError> {
    let rho = stationary_rho(w, tolerance)?;
    let (lo, hi) = rho.support();
    let k = EtaKernel::build_covering(w, lo, hi, DEFAULT_TRUNCATION)?;
    Ok((rho, k))
}

pub fn stationary(cfg: &RunConfig) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let (rho, k) = rho_and_kernel(&w, cfg.tolerance.unwrap_or(STATIONARY_TOLERANCE))?;
    let residual = fixed_point_residual(&k, &rho)?;
    let mut t = Table::new(&["x", "rho"]);
    for (x, p) in rho.iter() {
        t.push(vec![json!(x), json!(p)]);
    }
    println!(
        "{}: Z = {:.10}, ρ(0) = {:.10}, mean = {:.3e}, |ρP - ρ|₁ = {residual:.1e}",
        w.label(),
        rho.normalizer(),
        rho.get(0),
        rho.mean()
    );
    let mut out = OutputDir::create("stationary", cfg, seed(cfg))?;
    out.table("rho", &t)?;
    finish(
        out,
        json!({
            "weight": w.label(),
            "normalizer": rho.normalizer(),
            "mean": rho.mean(),
            "support": rho.support(),
            "fixed_point_residual": residual,
        }),
    )
}

const TV_PLOT: &str = r#"tv = load("tv.__EXT__")
fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(tv["m"], tv["tv"], "o-", ms=3)
ax.set_xlabel("m")
ax.set_ylabel("TV(P^m(0,·), ρ)")
fig.savefig(os.path.join(HERE, "tv.png"), dpi=150)"#;

pub fn converge(cfg: &RunConfig) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let m_max = cfg.m_max.unwrap_or(40);
    let m_lo = cfg.m_lo.unwrap_or(5) as usize;
    let (rho, k) = rho_and_kernel(&w, STATIONARY_TOLERANCE)?;
    let curve = tv_decay_curve(&k, &rho, m_max)?;
    let fit = tv_decay_fit(&curve, m_lo, m_max);
    let tail = exponential_tail_check(&k, &rho, &(0..=m_max).collect::<Vec<_>>())?;
    let mut t = Table::new(&["m", "tv", "lost_mass"]);
    for p in &curve {
        t.push(vec![json!(p.m), json!(p.tv), json!(p.lost_mass)]);
    }
    let monotone = curve.windows(2).all(|p| p[1].tv <= p[0].tv);
    match &fit {
        Some(f) => println!("{}: ln TV slope {:.4}, R² {:.4}, monotone {monotone}", w.label(), f.slope, f.r2),
        None => println!("{}: fit window [{m_lo}, {m_max}] has too few points", w.label()),
    }
    let mut out = OutputDir::create("converge", cfg, seed(cfg))?;
    out.table("tv", &t)?;
    let ext = cfg.format.unwrap_or(crate::config::Format::Csv).extension();
    out.plot_stub("plot_tv.py", &TV_PLOT.replace("__EXT__", ext))?;
    finish(
        out,
        json!({
            "weight": w.label(),
            "monotone": monotone,
            "fit": fit,
            "tail_bound_holds": tail.holds(),
            "tail_points": tail.checked,
            "tail_max_ratio": tail.max_ratio,
        }),
    )
}

pub fn couple(cfg: &RunConfig) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let seed = seed(cfg);
    let pairs = cfg.pairs.unwrap_or(10_000);
    let cap = cfg.cap.unwrap_or(100_000);
    let rho = stationary_rho(&w, STATIONARY_TOLERANCE)?;
    let times = coalescence_times(&w, &rho, seed, pairs, cap)?;
    let fit = survival_fit(&times, cfg.m_lo.unwrap_or(5), cfg.min_count.unwrap_or(50));
    let mut mu = Table::new(&["pair", "mu"]);
    for (i, t) in times.iter().enumerate() {
        mu.push(vec![json!(i), t.map_or(Value::Null, |t| json!(t))]);
    }
    let mut surv = Table::new(&["m", "survival"]);
    for &(m, s) in &fit.survival {
        surv.push(vec![json!(m), json!(s)]);
    }
    if let Some(f) = &fit.fit {
        println!("{}: ln P(μ > m) slope {:.4}, R² {:.4}, censored {}", w.label(), f.slope, f.r2, fit.censored);
    }
    let mut out = OutputDir::create("couple", cfg, seed)?;
    out.table("coalescence", &mu)?;
    out.table("survival", &surv)?;
    finish(out, json!({ "weight": w.label(), "fit": fit.fit, "censored": fit.censored }))
}

pub fn hitting(cfg: &RunConfig) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let seed = seed(cfg);
    let r_values = cfg.r_values.clone().unwrap_or_else(|| (1..=10).map(|i| 10 * i).collect());
    let replicates = cfg.replicates.unwrap_or(1000);
    let cap = cfg.cap.unwrap_or(1 << 24);
    let rows = hitting_time_experiment(&w, &r_values, replicates, seed, cap)?;
    let lemma = match cfg.delta {
        Some(d) => {
            let k = EtaKernel::build(&w)?;
            Some(lemma_constant(&w, &k, d, replicates, seed, cap)?)
        }
        None => None,
    };
    let mut t = Table::new(&["r", "mean_tau", "q10", "q90", "replicates"]);
    for r in &rows {
        t.push(vec![json!(r.r), json!(r.mean_tau), json!(r.q10), json!(r.q90), json!(r.replicates)]);
        println!("r = {:>4}: mean τ₀ = {:.2}", r.r, r.mean_tau);
    }
    let mut summary = json!({ "weight": w.label() });
    if let Some(l) = &lemma {
        let worst = rows
            .iter()
            .map(|r| r.mean_tau - (2.0 + l.delta) * r.r as f64 - l.k_delta)
            .fold(f64::NEG_INFINITY, f64::max);
        println!("δ = {}: n_δ = {}, K_δ = {:.3}, max excess {worst:.3}", l.delta, l.n_delta, l.k_delta);
        summary["lemma"] = json!(l);
        summary["bound_holds"] = json!(worst <= 0.0);
    }
    let mut out = OutputDir::create("hitting", cfg, seed)?;
    out.table("hitting", &t)?;
    finish(out, summary)
}

const DENSITY_PLOT: &str = r#"d = load("density.__EXT__")
fig, ax = plt.subplots(figsize=(6, 4))
ax.bar(d["x"], d["empirical"], width=(d["x"].iloc[1] - d["x"].iloc[0]) if len(d) > 1 else 0.1, alpha=0.5, label="empirical")
ax.plot(d["x"], d["theory"], "k-", label="limit density")
ax.set_xlabel("x")
ax.legend()
fig.savefig(os.path.join(HERE, "density.png"), dpi=150)"#;

pub fn limits(cfg: &RunConfig) -> Result<(), CliError> {
    match (&cfg.suite, cfg.check) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --suite or --check, not both".into())),
        (None, None) => Err(CliError::Usage("limits needs --suite acceptance or --check <name>".into())),
        (Some(name), None) if name != "acceptance" => {
            Err(CliError::Usage(format!("unknown suite `{name}` (known: acceptance)")))
        }
        (Some(_), None) => acceptance(cfg),
        (None, Some(check)) => limit_check(cfg, check),
    }
}

fn acceptance(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = seed(cfg);
    let ids: Vec<u8> = cfg
        .criteria
        .clone()
        .unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    let mut outcomes = Vec::new();
    for id in ids {
        let o = suite::run_criterion(id, seed).unwrap_or_else(|e| suite::CriterionOutcome {
            id,
            title: CRITERIA.iter().find(|c| c.0 == id).map_or("", |c| c.1).to_string(),
            pass: false,
            summary: format!("error: {e}"),
            statistics: Default::default(),
        });
        println!("{o}");
        outcomes.push(o);
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let mut out = OutputDir::create("limits", cfg, seed)?;
    out.json("acceptance.json", &outcomes)?;
    let mut t = Table::new(&["criterion", "pass"]);
    for o in &outcomes {
        t.push(vec![json!(o.id), json!(o.pass)]);
    }
    out.table("acceptance", &t)?;
    finish(out, json!({ "passed": outcomes.len() - failed.len(), "failed": failed }))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria {failed:?} failed")))
    }
}

fn limit_check(cfg: &RunConfig, check: Check) -> Result<(), CliError> {
    let w = weight(cfg)?;
    let seed = seed(cfg);
    let ext = cfg.format.unwrap_or(crate::config::Format::Csv).extension();
    let mut out;
    let report = match check {
        Check::Starteq => {
            let n = cfg.n.unwrap_or(10);
            let (pass, value) = match identity_starteq_check(&w, n) {
                Ok(r) => (true, json!(r)),
                Err(e @ selfrepel_core::Error::Violation(_)) => (false, json!({ "error": e.to_string() })),
                Err(e) => return Err(e.into()),
            };
            let max_error = value.get("max_error").and_then(Value::as_f64).unwrap_or(f64::NAN);
            out = OutputDir::create("limits", cfg, seed)?;
            ExperimentReport {
                experiment: "identity_starteq_check".into(),
                config: json!({ "weight": w.label(), "n_max": n, "result": value }),
                seed,
                n_samples: 0,
                statistics: [("max_abs_error".to_string(), max_error)].into(),
                thresholds: [("max_abs_error".to_string(), 1e-12)].into(),
                pass,
                conditional: false,
            }
        }
        Check::Oracle => {
            let r = oracle_comparison(&w, cfg.n.unwrap_or(12), cfg.samples.unwrap_or(1_000_000), seed, 5e-3)?;
            out = OutputDir::create("limits", cfg, seed)?;
            r
        }
        Check::Tent => {
            let d = TentScalingConfig::default();
            let tc = TentScalingConfig {
                x: cfg.x.unwrap_or(d.x),
                h: cfg.h.unwrap_or(d.h),
                a_values: cfg.a_values.clone().unwrap_or(d.a_values.clone()),
                replicates: cfg.replicates.unwrap_or(d.replicates),
                ..d
            };
            let o = tent_scaling_experiment(&w, &tc, seed)?;
            let mut t = Table::new(&[
                "A", "j", "r", "median_sup", "q10_sup", "q90_sup", "left_edge", "right_edge", "median_T_scaled",
                "T_in_band",
            ]);
            for r in &o.rows {
                t.push(vec![
                    json!(r.a),
                    json!(r.j),
                    json!(r.r),
                    json!(r.median_sup),
                    json!(r.q10_sup),
                    json!(r.q90_sup),
                    json!(r.median_left_edge),
                    json!(r.median_right_edge),
                    json!(r.median_t_scaled),
                    json!(r.t_in_band),
                ]);
            }
            out = OutputDir::create("limits", cfg, seed)?;
            out.table("tent", &t)?;
            o.report
        }
        Check::Position => {
            let d = PositionLawConfig::default();
            let pc = PositionLawConfig {
                s: cfg.s.unwrap_or(d.s),
                a: cfg.a.unwrap_or(d.a),
                samples: cfg.samples.unwrap_or(d.samples),
                ..d
            };
            let cap = cfg.cap.unwrap_or((60.0 * pc.a / pc.s) as u64);
            let o = position_law_experiment(&w, pc, seed, cap)?;
            let mut t = Table::new(&["x", "empirical", "theory"]);
            for b in &o.density {
                t.push(vec![json!(b.x), json!(b.empirical), json!(b.theory)]);
            }
            out = OutputDir::create("limits", cfg, seed)?;
            out.table("density", &t)?;
            out.plot_stub("plot_density.py", &DENSITY_PLOT.replace("__EXT__", ext))?;
            o.report
        }
        Check::FixedTime => {
            let d = FixedTimeConfig::default();
            let fc = FixedTimeConfig {
                t: cfg.t.unwrap_or(d.t),
                a: cfg.a.unwrap_or(d.a),
                samples: cfg.samples.unwrap_or(d.samples),
                ..d
            };
            let o = fixed_time_uniform_experiment(&w, fc, seed)?;
            let mut t = Table::new(&["x"]);
            for x in &o.rescaled {
                t.push(vec![json!(x)]);
            }
            out = OutputDir::create("limits", cfg, seed)?;
            out.table("samples", &t)?;
            o.report
        }
    };
    out.json("report.json", &report)?;
    report_outcome(out, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_belong_to_one_command() {
        assert!(preset_config("fig1-base2", "profile").is_ok());
        assert!(preset_config("fig1-base2", "simulate").is_err());
        assert_eq!(preset_config("fig2-base10", "simulate").unwrap().steps, Some(1_000_000));
        assert_eq!(preset_config("acceptance", "limits").unwrap().suite.as_deref(), Some("acceptance"));
        assert!(preset_config("fig9", "limits").is_err());
    }

    #[test]
    fn weight_table_parsing() {
        let dir = std::env::temp_dir().join(format!("selfrepel-wt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("w.csv");
        std::fs::write(&p, "z,w\n-1,0.5\n0,1\n1,2\n").unwrap();
        let w = read_weight_table(&p, 2.0).unwrap();
        assert!((w.w(3) - 8.0).abs() < 1e-12);
        std::fs::write(&p, "-1,0.5\n1,2\n").unwrap();
        assert!(read_weight_table(&p, 2.0).is_err());
        std::fs::write(&p, "0,-1\n").unwrap();
        assert!(read_weight_table(&p, 2.0).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn base_one_is_rejected() {
        let cfg = RunConfig {
            base: Some(1.0),
            ..RunConfig::default()
        };
        assert!(matches!(weight(&cfg), Err(CliError::Usage(_))));
    }
}
