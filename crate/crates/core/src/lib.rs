//! Self-repelling random walk on the integer lattice with repulsion driven by
//! oriented-edge local times.
//!
//! The crate is organised around five layers:
//!
//! * [`weight`] and [`walk`]: the weight function and the exact walk dynamics
//!   with oriented local-time bookkeeping.
//! * [`aux_chain`]: the auxiliary ξ and η chains, their exact kernel,
//!   stationary law, convergence, coupling and hitting times.
//! * [`ray_knight`]: walks stopped at inverse local times and the η-driven
//!   generator of the same stopped local-time profiles.
//! * [`limit_lab`]: closed-form limit objects, the exact path-enumeration
//!   oracle and the Monte Carlo experiments confronting both.
//! * [`presets`]: the figure presets used by the command-line front end.

pub mod aux_chain;
pub mod error;
pub mod limit_lab;
pub mod presets;
pub mod ray_knight;
pub mod rng;
pub mod stats;
pub mod walk;
pub mod weight;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Orientation of a jump, an inverse local time or an η chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `+1` or `-1`.
    pub fn unit(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "p" => Ok(Sign::Plus),
            "-" | "minus" | "m" => Ok(Sign::Minus),
            other => Err(error::invalid("sign", format!("expected + or -, got `{other}`"))),
        }
    }
}
pub use walk::{OrientedLocalTimeField, WalkState};
pub use weight::WeightFunction;

/// Crate version embedded in every manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
