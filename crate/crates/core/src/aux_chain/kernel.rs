use crate::error::{invalid, Error, Result};
use crate::weight::WeightFunction;

/// Largest probability mass a kernel row may lose to the finite window.
pub const DEFAULT_TRUNCATION: f64 = 1e-14;

const DEFAULT_WINDOW: (i64, i64) = (-40, 80);
const MAX_WINDOW_WIDTH: i64 = 1 << 16;

/// `ln p(z)` and `ln q(z)` without forming the weights.
fn ln_p(w: &WeightFunction, z: i64) -> f64 {
    -softplus(w.log_w(z) - w.log_w(-z))
}

fn ln_q(w: &WeightFunction, z: i64) -> f64 {
    -softplus(w.log_w(-z) - w.log_w(z))
}

fn softplus(d: f64) -> f64 {
    if d > 0.0 {
        d + (-d).exp().ln_1p()
    } else {
        d.exp().ln_1p()
    }
}

/// Row `x` of the `η` kernel restricted to a window.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub x: i64,
    /// Target of `probs[0]`.
    pub first: i64,
    pub probs: Vec<f64>,
    /// Mass of targets outside the window (left of `x_min` or right of
    /// `x_max`).
    pub truncation_mass: f64,
}

impl KernelRow {
    pub fn get(&self, y: i64) -> f64 {
        let i = y - self.first;
        if i >= 0 && (i as usize) < self.probs.len() {
            self.probs[i as usize]
        } else {
            0.0
        }
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn raw_row(w: &WeightFunction, x: i64, x_min: i64, x_max: i64) -> KernelRow {
    let first = (x - 1).max(x_min);
    let mut probs = Vec::with_capacity((x_max - first + 1).max(0) as usize);
    let mut left_mass = 0.0;
    // ln of p(x)···p(y); empty at y = x - 1
    let mut ln_prod = 0.0;
    for y in (x - 1)..=x_max {
        if y >= x {
            ln_prod += ln_p(w, y);
        }
        let v = (ln_prod + ln_q(w, y + 1)).exp();
        if y < x_min {
            left_mass += v;
        } else {
            probs.push(v);
        }
    }
    let right_mass = (ln_prod + ln_p(w, x_max + 1)).exp();
    KernelRow {
        x,
        first,
        probs,
        truncation_mass: left_mass + right_mass,
    }
}

/// `P(x, ·)` for `y` in `[max(x-1, x_min), x_max]`, unnormalised:
/// `P(x, y) = p(x) p(x+1) ··· p(y) q(y+1)` for `y >= x - 1` and zero below.
pub fn eta_kernel_row(
    w: &WeightFunction,
    x: i64,
    window: (i64, i64),
    tolerance: f64,
) -> Result<KernelRow> {
    let (x_min, x_max) = window;
    if x_min > x_max || x < x_min || x > x_max {
        return Err(invalid("window", format!("row {x} outside [{x_min}, {x_max}]")));
    }
    let row = raw_row(w, x, x_min, x_max);
    if row.truncation_mass > tolerance {
        return Err(Error::Truncation {
            mass: row.truncation_mass,
            tolerance,
        });
    }
    Ok(row)
}

/// The `η` kernel on a finite window `[x_min, x_max]`, each row renormalised
/// after dropping the mass that leaves the window.
#[derive(Debug, Clone)]
pub struct EtaKernel {
    weight: WeightFunction,
    x_min: i64,
    x_max: i64,
    /// Row-major `n × n`.
    matrix: Vec<f64>,
    row_truncation: Vec<f64>,
    truncation_mass: f64,
}

impl EtaKernel {
    /// Kernel on the default window `[-40, 80]`, widened until no row loses
    /// more than [`DEFAULT_TRUNCATION`].
    pub fn build(w: &WeightFunction) -> Result<Self> {
        Self::build_covering(w, DEFAULT_WINDOW.0, DEFAULT_WINDOW.1, DEFAULT_TRUNCATION)
    }

    /// Auto-widened kernel whose window contains at least `[lo, hi]`.
    pub fn build_covering(w: &WeightFunction, lo: i64, hi: i64, tolerance: f64) -> Result<Self> {
        w.ensure_valid(WeightFunction::DEFAULT_RANGE)?;
        let (mut x_min, mut x_max) = (lo.min(DEFAULT_WINDOW.0), hi.max(DEFAULT_WINDOW.1));
        loop {
            let (left, right) = Self::edge_losses(w, x_min, x_max);
            if left <= tolerance && right <= tolerance {
                return Self::with_window(w, x_min, x_max, tolerance);
            }
            let width = x_max - x_min;
            if width > MAX_WINDOW_WIDTH {
                return Err(Error::Truncation {
                    mass: left.max(right),
                    tolerance,
                });
            }
            if left > tolerance {
                x_min -= (width / 2).max(40);
            }
            if right > tolerance {
                x_max += (width / 2).max(40);
            }
        }
    }

    /// Worst left and right truncation over all rows. Left loss only occurs
    /// in the first row; right loss is largest in the last row.
    fn edge_losses(w: &WeightFunction, x_min: i64, x_max: i64) -> (f64, f64) {
        let left = ln_q(w, x_min).exp();
        let right = (x_min..=x_max)
            .rev()
            .take(4)
            .map(|x| {
                let s: f64 = (x..=x_max + 1).map(|z| ln_p(w, z)).sum();
                s.exp()
            })
            .fold(0.0, f64::max);
        (left, right)
    }

    /// Kernel on exactly `[x_min, x_max]`; fails if a row loses more than
    /// `tolerance`.
    pub fn with_window(w: &WeightFunction, x_min: i64, x_max: i64, tolerance: f64) -> Result<Self> {
        if x_min > x_max {
            return Err(invalid("window", "x_min > x_max"));
        }
        let n = (x_max - x_min + 1) as usize;
        let mut matrix = vec![0.0; n * n];
        let mut row_truncation = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for (i, x) in (x_min..=x_max).enumerate() {
            let row = raw_row(w, x, x_min, x_max);
            if row.truncation_mass > tolerance {
                return Err(Error::Truncation {
                    mass: row.truncation_mass,
                    tolerance,
                });
            }
            let total = row.sum();
            let start = (row.first - x_min) as usize;
            for (j, p) in row.probs.iter().enumerate() {
                matrix[i * n + start + j] = p / total;
            }
            worst = worst.max(row.truncation_mass);
            row_truncation.push(row.truncation_mass);
        }
        Ok(Self {
            weight: w.clone(),
            x_min,
            x_max,
            matrix,
            row_truncation,
            truncation_mass: worst,
        })
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn window(&self) -> (i64, i64) {
        (self.x_min, self.x_max)
    }

    pub fn len(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of state `x` in window vectors.
    pub fn index_of(&self, x: i64) -> Option<usize> {
        (self.x_min..=self.x_max)
            .contains(&x)
            .then(|| (x - self.x_min) as usize)
    }

    /// Largest mass any row lost before renormalisation.
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn row_truncation(&self) -> &[f64] {
        &self.row_truncation
    }

    /// Renormalised row `x` over the whole window.
    pub fn row(&self, x: i64) -> Option<&[f64]> {
        let n = self.len();
        self.index_of(x).map(|i| &self.matrix[i * n..(i + 1) * n])
    }

    pub fn get(&self, x: i64, y: i64) -> f64 {
        match (self.index_of(x), self.index_of(y)) {
            (Some(i), Some(j)) => self.matrix[i * self.len() + j],
            _ => 0.0,
        }
    }

    /// Row vector times kernel: `(vP)(y) = Σ_x v(x) P(x, y)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            // rows are zero left of x - 1
            let start = i.saturating_sub(1);
            let row = &self.matrix[i * n..(i + 1) * n];
            for j in start..n {
                out[j] += vi * row[j];
            }
        }
        out
    }

    /// The point mass at `x` as a window vector.
    pub fn delta(&self, x: i64) -> Result<Vec<f64>> {
        let i = self
            .index_of(x)
            .ok_or_else(|| invalid("x", format!("{x} outside kernel window")))?;
        let mut v = vec![0.0; self.len()];
        v[i] = 1.0;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base2() -> WeightFunction {
        WeightFunction::exponential(2.0).unwrap()
    }

    #[test]
    fn base2_row_zero() {
        let row = eta_kernel_row(&base2(), 0, (-40, 80), DEFAULT_TRUNCATION).unwrap();
        assert_eq!(row.first, -1);
        assert!((row.get(-1) - 0.5).abs() < 1e-15);
        assert!((row.get(0) - 0.4).abs() < 1e-15);
        assert_eq!(row.get(-2), 0.0);
        assert!((row.sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_window_is_a_truncation_error() {
        let err = eta_kernel_row(&base2(), 0, (-1, 1), DEFAULT_TRUNCATION).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        assert!(eta_kernel_row(&base2(), 5, (-1, 1), 1.0).is_err());
    }

    #[test]
    fn kernel_rows_are_stochastic_and_skip_free_to_the_left() {
        let w = WeightFunction::exponential(1.3).unwrap();
        let k = EtaKernel::build(&w).unwrap();
        assert!(k.truncation_mass() <= DEFAULT_TRUNCATION);
        let (lo, hi) = k.window();
        for x in lo..=hi {
            let row = k.row(x).unwrap();
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for y in lo..x - 1 {
                assert_eq!(k.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn slow_weights_widen_the_window() {
        let w = WeightFunction::exponential(1.05).unwrap();
        let k = EtaKernel::build(&w).unwrap();
        let (lo, hi) = k.window();
        assert!(hi > 80 || lo < -40);
        assert!(k.truncation_mass() <= DEFAULT_TRUNCATION);
    }

    #[test]
    fn invalid_weight_rejected() {
        let w = WeightFunction::exponential(1.0).unwrap();
        assert!(EtaKernel::build(&w).is_err());
    }
}
