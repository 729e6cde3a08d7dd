//! Limit objects of the rescaled walk and the experiments that test them.

mod enumerate;
mod experiments;
mod formulas;
mod geometric;

pub use enumerate::{
    brute_force_distribution, brute_force_laws, enumerate_paths, identity_starteq_check, stopped_law,
    PathNode, StartEqReport, StoppedLaw, MAX_BRUTE_FORCE_STEPS, MAX_ENUMERATION_STEPS,
};
pub use experiments::{
    fixed_time_uniform_experiment, monte_carlo_position_laws, oracle_comparison, position_law_experiment,
    scaled_profile, tent_scaling_experiment, write_density_csv, DensityBin, ExperimentReport, FixedTimeConfig,
    FixedTimeOutcome, PositionLawConfig, PositionLawOutcome, TentScalingConfig, TentScalingOutcome,
    TentScalingRow,
};
pub use formulas::{phi_density, phi_hat, phi_hat_cdf, phi_scaling_residual, rho_hat, t_limit, tent, uniform_hull_cdf};
pub use geometric::{sample_geometric_time, GeometricTime};
