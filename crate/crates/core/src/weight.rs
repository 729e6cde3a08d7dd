//! Weight functions governing the strength of self-repulsion.
//!
//! A weight `w: Z -> R+` must be non-decreasing with `w(z) - w(-z)` bounded
//! away from zero at infinity. All arithmetic is done on `ln w`, so fast
//! growing weights such as `10^k` never overflow.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of local-time differences on each side of zero whose step
/// probabilities are tabulated at construction.
const PROB_CACHE_HALF_WIDTH: i64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `w(z) = base^z`.
    Exponential { base: f64 },
    /// Explicit values on `[min_arg, min_arg + len)`, extended geometrically
    /// with ratio `exp(tail_log_ratio)` on both sides.
    Table {
        min_arg: i64,
        log_values: Vec<f64>,
        tail_log_ratio: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightFunction {
    kind: WeightKind,
    #[serde(skip)]
    p_cache: Vec<f64>,
}

impl PartialEq for WeightFunction {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Outcome of [`WeightFunction::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub range: i64,
    /// First `z` in `[-range, range)` with `w(z+1) < w(z)`.
    pub monotone_violation: Option<i64>,
    /// `w(range) > w(-range)`.
    pub limit_condition: bool,
    /// `w(-1) < w(1)`; when false the weight sits in the borderline regime
    /// that growth allows but the short-cut exponential estimates exclude.
    pub strict_at_one: bool,
}

impl WeightReport {
    pub fn is_valid(&self) -> bool {
        self.monotone_violation.is_none() && self.limit_condition
    }
}

fn logistic_neg(d: f64) -> f64 {
    // 1 / (1 + e^d) without overflow on either side.
    if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

impl WeightFunction {
    /// `w(z) = base^z`.
    pub fn exponential(base: f64) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "exponential base must be positive and finite, got {base}"
            )));
        }
        Ok(Self::from_kind(WeightKind::Exponential { base }))
    }

    /// A table of weights `values[i] = w(min_arg + i)` with geometric tails of
    /// ratio `tail_ratio >= 1` on both sides.
    pub fn table(min_arg: i64, values: &[f64], tail_ratio: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeight("empty weight table".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeight(format!(
                "table entries must be positive and finite, got {v}"
            )));
        }
        if !(tail_ratio.is_finite() && tail_ratio >= 1.0) {
            return Err(Error::InvalidWeight(format!(
                "tail ratio must be finite and >= 1, got {tail_ratio}"
            )));
        }
        Self::log_table(
            min_arg,
            values.iter().map(|v| v.ln()).collect(),
            tail_ratio.ln(),
        )
    }

    /// Same as [`WeightFunction::table`] with the values given as `ln w`.
    pub fn log_table(min_arg: i64, log_values: Vec<f64>, tail_log_ratio: f64) -> Result<Self> {
        if log_values.is_empty() {
            return Err(Error::InvalidWeight("empty weight table".into()));
        }
        if log_values.iter().any(|v| !v.is_finite()) || !tail_log_ratio.is_finite() {
            return Err(Error::InvalidWeight("degenerate weight table".into()));
        }
        if tail_log_ratio < 0.0 {
            return Err(Error::InvalidWeight("tail ratio must be >= 1".into()));
        }
        Ok(Self::from_kind(WeightKind::Table {
            min_arg,
            log_values,
            tail_log_ratio,
        }))
    }

    fn from_kind(kind: WeightKind) -> Self {
        let mut w = Self {
            kind,
            p_cache: Vec::new(),
        };
        w.p_cache = (-PROB_CACHE_HALF_WIDTH..=PROB_CACHE_HALF_WIDTH)
            .map(|d| w.p_uncached(d))
            .collect();
        w
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Short human-readable label, e.g. `exp(2)` or `table[-3..=3;tail=1.5]`.
    pub fn label(&self) -> String {
        match &self.kind {
            WeightKind::Exponential { base } => format!("exp({base})"),
            WeightKind::Table {
                min_arg,
                log_values,
                tail_log_ratio,
            } => format!(
                "table[{}..={};tail={}]",
                min_arg,
                min_arg + log_values.len() as i64 - 1,
                tail_log_ratio.exp()
            ),
        }
    }

    /// `ln w(z)`.
    pub fn log_w(&self, z: i64) -> f64 {
        match &self.kind {
            WeightKind::Exponential { base } => z as f64 * base.ln(),
            WeightKind::Table {
                min_arg,
                log_values,
                tail_log_ratio,
            } => {
                let max_arg = min_arg + log_values.len() as i64 - 1;
                if z < *min_arg {
                    log_values[0] - (min_arg - z) as f64 * tail_log_ratio
                } else if z > max_arg {
                    log_values[log_values.len() - 1] + (z - max_arg) as f64 * tail_log_ratio
                } else {
                    log_values[(z - min_arg) as usize]
                }
            }
        }
    }

    /// `w(z)`; may overflow to infinity, prefer [`Self::log_w`].
    pub fn w(&self, z: i64) -> f64 {
        self.log_w(z).exp()
    }

    /// `ln (w(-z) / w(z))`, the log of one factor of the stationary weights.
    pub fn log_ratio(&self, z: i64) -> f64 {
        self.log_w(-z) - self.log_w(z)
    }

    fn p_uncached(&self, x: i64) -> f64 {
        logistic_neg(self.log_w(x) - self.log_w(-x))
    }

    /// `p(x) = w(-x) / (w(x) + w(-x))`.
    ///
    /// This is both the up-probability of the ξ chain at `x` and the walk's
    /// probability of stepping right when `ℓ⁺ - ℓ⁻ = x` at its current site.
    #[inline]
    pub fn p(&self, x: i64) -> f64 {
        let idx = x + PROB_CACHE_HALF_WIDTH;
        if (0..self.p_cache.len() as i64).contains(&idx) {
            self.p_cache[idx as usize]
        } else {
            self.p_uncached(x)
        }
    }

    /// `q(x) = 1 - p(x) = w(x) / (w(x) + w(-x))`.
    #[inline]
    pub fn q(&self, x: i64) -> f64 {
        self.p(-x)
    }

    /// Probability that the walk steps right when the oriented local-time
    /// difference at its current site is `delta = ℓ⁺ - ℓ⁻`.
    #[inline]
    pub fn step_probability_right(&self, delta: i64) -> f64 {
        self.p(delta)
    }

    /// Checks both growth conditions on `[-range, range]`.
    pub fn validate(&self, range: i64) -> Result<WeightReport> {
        if range < 1 {
            return Err(crate::error::invalid("range", "must be >= 1"));
        }
        let monotone_violation =
            (-range..range).find(|&z| self.log_w(z + 1) < self.log_w(z));
        Ok(WeightReport {
            range,
            monotone_violation,
            limit_condition: self.log_w(range) > self.log_w(-range),
            strict_at_one: self.log_w(-1) < self.log_w(1),
        })
    }

    /// Like [`Self::validate`] but turns a violation into an error.
    pub fn ensure_valid(&self, range: i64) -> Result<WeightReport> {
        let report = self.validate(range)?;
        if let Some(z) = report.monotone_violation {
            return Err(Error::InvalidWeight(format!(
                "{}: w({}) < w({z}), weight must be non-decreasing",
                self.label(),
                z + 1
            )));
        }
        if !report.limit_condition {
            return Err(Error::InvalidWeight(format!(
                "{}: w({range}) <= w(-{range}), weight must be non-constant at infinity",
                self.label()
            )));
        }
        Ok(report)
    }

    /// Default validation range used by constructors elsewhere in the crate.
    pub const DEFAULT_RANGE: i64 = 64;

    /// A random weight table satisfying both growth conditions strictly,
    /// useful for property tests: non-negative log-increments on
    /// `[-half_width, half_width]` and a tail ratio in `[1.5, 3]`.
    pub fn random_valid_table<R: Rng + ?Sized>(rng: &mut R, half_width: i64) -> Self {
        let len = (2 * half_width + 1) as usize;
        let mut log_values = Vec::with_capacity(len);
        let mut acc = rng.random_range(-1.0..1.0);
        for i in 0..len {
            log_values.push(acc);
            // zero increments are allowed, except across the centre so that
            // w(-1) < w(1) is not guaranteed either way
            let inc = if rng.random_bool(0.3) && i + 1 != len / 2 {
                0.0
            } else {
                rng.random_range(0.05..1.5)
            };
            acc += inc;
        }
        let tail = rng.random_range(1.5f64..3.0).ln();
        Self::log_table(-half_width, log_values, tail).expect("finite table")
    }
}
