use selfrepel_core::limit_lab::{
    identity_starteq_check, phi_hat, position_law_experiment, scaled_profile, tent_scaling_experiment,
    write_density_csv, PositionLawConfig, TentScalingConfig,
};
use selfrepel_core::ray_knight::rescaled_deviation;
use selfrepel_core::WeightFunction;

fn base2() -> WeightFunction {
    WeightFunction::exponential(2.0).unwrap()
}

#[test]
fn start_identity_for_table_weight() {
    let w = WeightFunction::table(-2, &[0.5, 1.0, 1.0, 3.0, 3.5], 1.7).unwrap();
    let r = identity_starteq_check(&w, 11).unwrap();
    assert!(r.max_error < 1e-14);
}

#[test]
fn experiments_are_deterministic() {
    let cfg = PositionLawConfig {
        a: 200.0,
        samples: 300,
        ..PositionLawConfig::default()
    };
    let a = position_law_experiment(&base2(), cfg, 42, 1 << 20).unwrap();
    let b = position_law_experiment(&base2(), cfg, 42, 1 << 20).unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
    let c = position_law_experiment(&base2(), cfg, 43, 1 << 20).unwrap();
    assert_ne!(a.rescaled, c.rescaled);
}

#[test]
fn density_csv_has_theory_column() {
    let cfg = PositionLawConfig {
        a: 400.0,
        samples: 1000,
        ..PositionLawConfig::default()
    };
    let out = position_law_experiment(&base2(), cfg, 1, 1 << 20).unwrap();
    let mut buf = Vec::new();
    write_density_csv(&out.density, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,empirical,theory\n"));
    for b in &out.density {
        assert!((b.theory - phi_hat(1.0, b.x)).abs() < 1e-15);
    }
}

#[test]
fn small_tent_sweep_shrinks() {
    let cfg = TentScalingConfig {
        a_values: vec![10.0, 80.0],
        replicates: 30,
        ..TentScalingConfig::default()
    };
    let out = tent_scaling_experiment(&base2(), &cfg, 5).unwrap();
    assert!(out.rows[1].median_sup < out.rows[0].median_sup);
    for r in &out.rows {
        assert!((r.median_right_edge - 4.5).abs() < 1.0);
    }
}

#[test]
fn scaled_profile_statistic_is_finite() {
    let p = scaled_profile(&base2(), 20.0, 0.5, 2.0, 3, 0).unwrap();
    let d = rescaled_deviation(&p, 20.0, 0.5, 2.0);
    assert!(d.is_finite() && d >= 0.0);
    assert_eq!(p.total(), p.stopping_time);
}
