//! Flat key/value run configuration.
//!
//! Every command reads the same [`RunConfig`]. Values are layered: preset,
//! then the `--config` file, then explicit flags. The resolved config is
//! written next to the outputs and can be fed back with `--config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Run the walk until the inverse local time.
    Direct,
    /// Build the profile from the auxiliary chains.
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Starteq,
    Oracle,
    Tent,
    Position,
    FixedTime,
}

macro_rules! run_config {
    ($( $(#[$doc:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct RunConfig {
            pub schema_version: u32,
            $(
                $(#[$doc])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                Self { schema_version: SCHEMA_VERSION, $( $field: None, )* }
            }
        }

        impl RunConfig {
            /// Field-wise: values set in `over` win.
            pub fn overlay(self, over: RunConfig) -> RunConfig {
                RunConfig {
                    schema_version: self.schema_version.max(over.schema_version),
                    $( $field: over.$field.or(self.$field), )*
                }
            }
        }
    };
}

run_config! {
    preset: String,
    /// `w(k) = base^k`.
    base: f64,
    /// File of `z,w(z)` lines on consecutive integers.
    weight_table: PathBuf,
    /// Geometric ratio used beyond the table.
    tail_ratio: f64,
    seed: u64,
    threads: usize,
    out: PathBuf,
    format: Format,
    steps: u64,
    stride: u64,
    field: bool,
    j: i64,
    r: u64,
    /// `+` or `-`.
    sign: String,
    replicate: u64,
    route: Route,
    a: f64,
    a_values: Vec<f64>,
    x: f64,
    h: f64,
    s: f64,
    t: f64,
    samples: u64,
    replicates: u64,
    cap: u64,
    pairs: u64,
    m_max: usize,
    m_lo: u64,
    min_count: usize,
    r_values: Vec<u64>,
    delta: f64,
    tolerance: f64,
    n: u64,
    suite: String,
    check: Check,
    criteria: Vec<u8>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form with `out` and `threads` removed, since
    /// neither changes any result.
    pub fn hash(&self, command: &str) -> String {
        let mut c = self.clone();
        c.out = None;
        c.threads = None;
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(c.to_toml().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Range checks shared by all commands.
    pub fn validate(&self) -> Result<(), CliError> {
        fn positive(name: &str, v: Option<f64>) -> Result<(), CliError> {
            match v {
                Some(v) if !(v.is_finite() && v > 0.0) => {
                    Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
                }
                _ => Ok(()),
            }
        }
        fn nonzero(name: &str, v: Option<u64>) -> Result<(), CliError> {
            match v {
                Some(0) => Err(CliError::Usage(format!("{name} must be >= 1"))),
                _ => Ok(()),
            }
        }
        if self.base.is_some() && self.weight_table.is_some() {
            return Err(CliError::Usage("base and weight_table are mutually exclusive".into()));
        }
        for (name, v) in [
            ("base", self.base),
            ("tail_ratio", self.tail_ratio),
            ("a", self.a),
            ("h", self.h),
            ("s", self.s),
            ("t", self.t),
            ("delta", self.delta),
            ("tolerance", self.tolerance),
        ] {
            positive(name, v)?;
        }
        if let Some(x) = self.x {
            if !x.is_finite() {
                return Err(CliError::Usage("x must be finite".into()));
            }
        }
        for v in self.a_values.iter().flatten() {
            positive("a_values", Some(*v))?;
        }
        for (name, v) in [
            ("r", self.r),
            ("samples", self.samples),
            ("replicates", self.replicates),
            ("cap", self.cap),
            ("pairs", self.pairs),
            ("stride", self.stride),
        ] {
            nonzero(name, v)?;
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be >= 1".into()));
        }
        if let Some(t) = self.tolerance {
            if t >= 1.0 {
                return Err(CliError::Usage("tolerance must lie in (0, 1)".into()));
            }
        }
        if let Some(s) = &self.sign {
            s.parse::<selfrepel_core::Sign>().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if let Some(c) = &self.criteria {
            if let Some(bad) = c.iter().find(|&&id| !(1..=11).contains(&id)) {
                return Err(CliError::Usage(format!("criterion {bad} does not exist (1..=11)")));
            }
        }
        Ok(())
    }

    pub fn sign(&self) -> selfrepel_core::Sign {
        self.sign
            .as_deref()
            .and_then(|s| s.parse().ok())
            .unwrap_or(selfrepel_core::Sign::Plus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        RunConfig {
            base: Some(2.0),
            seed: Some(7),
            a_values: Some(vec![50.0, 100.0]),
            sign: Some("-".into()),
            check: Some(Check::FixedTime),
            format: Some(Format::Json),
            x: Some(-0.25),
            ..RunConfig::default()
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = sample();
        let text = c.to_toml();
        assert!(text.starts_with("schema_version = 1"));
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn overlay_prefers_the_top_layer() {
        let base = sample();
        let top = RunConfig {
            seed: Some(9),
            ..RunConfig::default()
        };
        let c = base.clone().overlay(top);
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.base, Some(2.0));
    }

    #[test]
    fn hash_ignores_out_and_threads() {
        let a = sample();
        let mut b = sample();
        b.out = Some("elsewhere".into());
        b.threads = Some(3);
        assert_eq!(a.hash("simulate"), b.hash("simulate"));
        assert_ne!(a.hash("simulate"), a.hash("profile"));
        b.seed = Some(8);
        assert_ne!(a.hash("simulate"), b.hash("simulate"));
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(RunConfig::from_toml("schema_version = 1\nbogus = 3\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 2\n").is_err());
        assert!(RunConfig::from_toml("base = 2.0\n").is_err());
    }

    #[test]
    fn validation() {
        assert!(sample().validate().is_ok());
        let bad = RunConfig {
            a: Some(-1.0),
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let both = RunConfig {
            base: Some(2.0),
            weight_table: Some("w.csv".into()),
            ..RunConfig::default()
        };
        assert!(both.validate().is_err());
        let sign = RunConfig {
            sign: Some("up".into()),
            ..RunConfig::default()
        };
        assert!(sign.validate().is_err());
    }
}
