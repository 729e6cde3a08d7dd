//! The auxiliary chains behind the Ray–Knight picture.
//!
//! `ξ` is the local-time difference `ℓ⁺ - ℓ⁻` at a fixed site, observed at
//! the site's departure times; it is a birth–death chain with up-probability
//! `p(x)`. `η±` is `ξ` observed at consecutive up (down) steps. It jumps left
//! by at most one, has an explicit kernel and a product-form stationary law.

mod convergence;
mod coupling;
mod eta;
mod hitting;
mod kernel;
mod stationary;
mod xi;

pub use convergence::{
    exponential_tail_check, fixed_point_residual, mean_after, tv_decay_curve, tv_decay_fit,
    TailCheckReport, TailViolation, TvPoint,
};
pub use coupling::{
    coalescence_times, simulate_coalescing_pair, survival_fit, CoupledPair, CoupledPairRun,
    SurvivalFit,
};
pub use eta::{EtaChain, ETA_INNER_CAP};
pub use hitting::{
    hitting_time, hitting_time_experiment, lemma_constant, HittingRow, LemmaConstant,
};
pub use kernel::{eta_kernel_row, EtaKernel, KernelRow, DEFAULT_TRUNCATION};
pub use stationary::{stationary_rho, StationaryDistribution};
pub use xi::{extract_eta, extract_eta_all, XiChain};
