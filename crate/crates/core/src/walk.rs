//! Exact simulation of the walk with oriented-edge local-time bookkeeping.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::weight::WeightFunction;

/// Oriented local times `ℓ±(n, k)`: the number of jumps `k -> k±1` made
/// before time `n`.
///
/// Sites are stored in a contiguous two-sided buffer that grows on demand;
/// reading a site that was never touched returns zero, so nothing assumes
/// where the walk goes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrientedLocalTimeField {
    /// Site stored at `counts[0]`.
    offset: i64,
    counts: Vec<[u64; 2]>,
    total_steps: u64,
}

const PLUS: usize = 0;
const MINUS: usize = 1;

impl OrientedLocalTimeField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a field from explicit `(k, ℓ⁺, ℓ⁻)` rows; the step total is the
    /// sum of all counters. Intended for hand-built test fixtures.
    pub fn from_counts(rows: impl IntoIterator<Item = (i64, u64, u64)>) -> Self {
        let mut f = Self::new();
        for (k, plus, minus) in rows {
            let slot = f.slot_mut(k);
            slot[PLUS] += plus;
            slot[MINUS] += minus;
            f.total_steps += plus + minus;
        }
        f
    }

    fn slot_mut(&mut self, k: i64) -> &mut [u64; 2] {
        if self.counts.is_empty() {
            self.offset = k - 8;
            self.counts = vec![[0; 2]; 17];
        }
        if k < self.offset {
            let extra = ((self.offset - k) as usize).max(self.counts.len());
            let mut grown = vec![[0; 2]; extra];
            grown.extend_from_slice(&self.counts);
            self.counts = grown;
            self.offset -= extra as i64;
        } else if k >= self.offset + self.counts.len() as i64 {
            let need = (k - self.offset) as usize + 1;
            let new_len = need.max(2 * self.counts.len());
            self.counts.resize(new_len, [0; 2]);
        }
        &mut self.counts[(k - self.offset) as usize]
    }

    #[inline]
    fn get(&self, k: i64) -> [u64; 2] {
        let idx = k - self.offset;
        if idx >= 0 && (idx as usize) < self.counts.len() {
            self.counts[idx as usize]
        } else {
            [0; 2]
        }
    }

    #[inline]
    pub fn ell_plus(&self, k: i64) -> u64 {
        self.get(k)[PLUS]
    }

    #[inline]
    pub fn ell_minus(&self, k: i64) -> u64 {
        self.get(k)[MINUS]
    }

    /// `ℓ⁺(k) - ℓ⁻(k)`.
    #[inline]
    pub fn delta(&self, k: i64) -> i64 {
        let [p, m] = self.get(k);
        p as i64 - m as i64
    }

    /// Local time on the unoriented edge `<k, k+1>`: `ℓ⁺(k) + ℓ⁻(k+1)`.
    pub fn unoriented_local_time(&self, k: i64) -> u64 {
        self.ell_plus(k) + self.ell_minus(k + 1)
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    /// Records one jump from `k`, rightwards when `right` is true.
    #[inline]
    pub fn record(&mut self, k: i64, right: bool) {
        let slot = self.slot_mut(k);
        slot[if right { PLUS } else { MINUS }] += 1;
        self.total_steps += 1;
    }

    /// Smallest and largest site with a non-zero counter.
    pub fn touched_range(&self) -> Option<(i64, i64)> {
        let first = self.counts.iter().position(|c| c[0] + c[1] > 0)?;
        let last = self.counts.iter().rposition(|c| c[0] + c[1] > 0)?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// `(k, ℓ⁺, ℓ⁻)` for every site in the touched range.
    pub fn rows(&self) -> Vec<(i64, u64, u64)> {
        match self.touched_range() {
            None => Vec::new(),
            Some((lo, hi)) => (lo..=hi)
                .map(|k| (k, self.ell_plus(k), self.ell_minus(k)))
                .collect(),
        }
    }

    /// Writes `k,ell_plus,ell_minus`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,ell_plus,ell_minus")?;
        for (k, p, m) in self.rows() {
            writeln!(out, "{k},{p},{m}")?;
        }
        Ok(())
    }
}

/// Right-hand side of the gradient identity at `k` for a walk at `position`:
/// `ℓ⁺(n,k) - ℓ⁻(n,k+1)` equals `+1` on `0 <= k < X(n)`, `-1` on
/// `X(n) <= k < 0` and `0` elsewhere.
#[inline]
pub fn gradient_sign(position: i64, k: i64) -> i64 {
    if 0 <= k && k < position {
        1
    } else if position <= k && k < 0 {
        -1
    } else {
        0
    }
}

/// A failed gradient identity at site `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientViolation {
    pub k: i64,
    pub lhs: i64,
    pub expected: i64,
}

/// Checks `ℓ⁺(n,k) - ℓ⁻(n,k+1) = gradient_sign(X(n), k)` at every site that
/// could possibly be non-zero.
pub fn check_gradient_identity(
    field: &OrientedLocalTimeField,
    position: i64,
) -> std::result::Result<(), GradientViolation> {
    let (lo, hi) = field.touched_range().unwrap_or((0, 0));
    let lo = lo.min(position).min(0) - 1;
    let hi = hi.max(position).max(0) + 1;
    for k in lo..=hi {
        let lhs = field.ell_plus(k) as i64 - field.ell_minus(k + 1) as i64;
        let expected = gradient_sign(position, k);
        if lhs != expected {
            return Err(GradientViolation { k, lhs, expected });
        }
    }
    Ok(())
}

/// The walk: position, oriented local times and its private random stream.
#[derive(Debug, Clone)]
pub struct WalkState {
    position: i64,
    field: OrientedLocalTimeField,
    rng: StreamRng,
}

impl WalkState {
    /// A walk at the origin with the stream derived from `(seed, replicate)`.
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self::with_rng(rng::stream(seed, &[rng::tag::WALK, replicate]))
    }

    pub fn with_rng(rng: StreamRng) -> Self {
        Self {
            position: 0,
            field: OrientedLocalTimeField::new(),
            rng,
        }
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn steps(&self) -> u64 {
        self.field.total_steps()
    }

    pub fn field(&self) -> &OrientedLocalTimeField {
        &self.field
    }

    pub fn into_field(self) -> OrientedLocalTimeField {
        self.field
    }

    /// Probability that the next step goes right.
    pub fn right_probability(&self, w: &WeightFunction) -> f64 {
        w.step_probability_right(self.field.delta(self.position))
    }

    /// Takes one step and returns the new position.
    #[inline]
    pub fn advance(&mut self, w: &WeightFunction) -> i64 {
        let p = w.p(self.field.delta(self.position));
        let right = self.rng.random::<f64>() < p;
        self.apply(right)
    }

    /// Moves deterministically; used by enumeration and replay.
    #[inline]
    pub fn apply(&mut self, right: bool) -> i64 {
        self.field.record(self.position, right);
        self.position += if right { 1 } else { -1 };
        self.position
    }

    /// One step, refusing to go beyond `cap` total steps.
    pub fn advance_capped(&mut self, w: &WeightFunction, cap: u64) -> Result<i64> {
        if self.steps() >= cap {
            return Err(Error::CapExhausted {
                cap,
                context: "walk".into(),
            });
        }
        Ok(self.advance(w))
    }

    /// Runs `steps` steps, calling `visit(n, X(n))` after each one.
    pub fn run_with(&mut self, w: &WeightFunction, steps: u64, mut visit: impl FnMut(u64, i64)) {
        for _ in 0..steps {
            let x = self.advance(w);
            visit(self.steps(), x);
        }
    }

    pub fn check_gradient_identity(&self) -> std::result::Result<(), GradientViolation> {
        check_gradient_identity(&self.field, self.position)
    }
}

/// Runs `steps` steps and writes the trajectory as `n,position`, keeping every
/// `stride`-th time (always including `n = 0`).
pub fn write_trajectory_csv<W: Write>(
    w: &WeightFunction,
    state: &mut WalkState,
    steps: u64,
    stride: u64,
    mut out: W,
) -> Result<()> {
    let stride = stride.max(1);
    writeln!(out, "n,position")?;
    writeln!(out, "{},{}", state.steps(), state.position())?;
    let mut err = None;
    state.run_with(w, steps, |n, x| {
        if n % stride == 0 && err.is_none() {
            if let Err(e) = writeln!(out, "{n},{x}") {
                err = Some(e);
            }
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base2() -> WeightFunction {
        WeightFunction::exponential(2.0).unwrap()
    }

    #[test]
    fn fresh_walk_is_symmetric() {
        let s = WalkState::new(1, 0);
        assert_eq!(s.right_probability(&base2()), 0.5);
        assert_eq!(s.position(), 0);
        assert_eq!(s.steps(), 0);
    }

    #[test]
    fn bookkeeping_after_out_and_back() {
        let w = base2();
        let mut s = WalkState::new(1, 0);
        s.apply(true);
        s.apply(false);
        let f = s.field();
        assert_eq!(f.ell_plus(0), 1);
        assert_eq!(f.ell_minus(1), 1);
        assert_eq!(f.ell_minus(0), 0);
        assert_eq!(f.ell_plus(1), 0);
        assert_eq!(f.total_steps(), 2);
        // delta at the origin is now 1
        assert!((s.right_probability(&w) - 0.2).abs() < 1e-15);
        assert_eq!(f.unoriented_local_time(0), 2);
    }

    #[test]
    fn unoriented_local_time_on_a_straight_run() {
        let mut s = WalkState::new(1, 0);
        assert_eq!(s.field().unoriented_local_time(5), 0);
        s.apply(true);
        s.apply(true);
        s.apply(true);
        assert_eq!(s.field().unoriented_local_time(0), 1);
        assert_eq!(s.field().unoriented_local_time(1), 1);
        assert_eq!(s.field().unoriented_local_time(2), 1);
        assert_eq!(s.field().unoriented_local_time(-1), 0);
    }

    #[test]
    fn inconsistent_field_is_caught() {
        let f = OrientedLocalTimeField::from_counts([(0, 2, 0), (1, 0, 0)]);
        let err = check_gradient_identity(&f, 0).unwrap_err();
        assert_eq!(err, GradientViolation { k: 0, lhs: 2, expected: 0 });
    }

    #[test]
    fn field_grows_on_both_sides() {
        let mut f = OrientedLocalTimeField::new();
        f.record(0, true);
        f.record(-1000, false);
        f.record(5000, true);
        assert_eq!(f.ell_plus(0), 1);
        assert_eq!(f.ell_minus(-1000), 1);
        assert_eq!(f.ell_plus(5000), 1);
        assert_eq!(f.touched_range(), Some((-1000, 5000)));
        assert_eq!(f.total_steps(), 3);
    }

    #[test]
    fn long_run_keeps_identity_and_conservation() {
        let w = base2();
        let mut s = WalkState::new(99, 3);
        for _ in 0..10_000 {
            s.advance(&w);
            s.check_gradient_identity().unwrap();
        }
        let rows = s.field().rows();
        let total: u64 = rows.iter().map(|(_, p, m)| p + m).sum();
        assert_eq!(total, 10_000);
        let (lo, hi) = s.field().touched_range().unwrap();
        let unoriented: u64 = (lo - 1..=hi).map(|k| s.field().unoriented_local_time(k)).sum();
        assert_eq!(unoriented, 10_000);
    }

    #[test]
    fn cap_is_an_error() {
        let w = base2();
        let mut s = WalkState::new(1, 0);
        for _ in 0..5 {
            s.advance_capped(&w, 5).unwrap();
        }
        assert!(matches!(
            s.advance_capped(&w, 5),
            Err(Error::CapExhausted { cap: 5, .. })
        ));
    }

    #[test]
    fn trajectory_csv_with_stride() {
        let w = base2();
        let mut s = WalkState::new(5, 0);
        let mut buf = Vec::new();
        write_trajectory_csv(&w, &mut s, 10, 5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,position");
        assert_eq!(lines[1], "0,0");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("5,"));
        assert!(lines[3].starts_with("10,"));

        let mut buf = Vec::new();
        write_trajectory_csv(&w, &mut WalkState::new(5, 0), 0, 1, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,position\n0,0\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn identity_parity_and_conservation(seed in any::<u64>(), base in 1.05f64..12.0, steps in 0u64..600) {
                let w = WeightFunction::exponential(base).unwrap();
                let mut s = WalkState::new(seed, 0);
                for n in 1..=steps {
                    let x = s.advance(&w);
                    prop_assert!(s.check_gradient_identity().is_ok());
                    prop_assert_eq!(x.rem_euclid(2), (n as i64).rem_euclid(2));
                    prop_assert!(x.unsigned_abs() <= n);
                }
                let total: u64 = s.field().rows().iter().map(|(_, p, m)| p + m).sum();
                prop_assert_eq!(total, steps);
            }

            #[test]
            fn identity_holds_for_random_tables(seed in any::<u64>()) {
                let mut rng = crate::rng::stream(seed, &[1]);
                let w = WeightFunction::random_valid_table(&mut rng, 4);
                let mut s = WalkState::new(seed, 1);
                for _ in 0..400 {
                    s.advance(&w);
                }
                prop_assert!(s.check_gradient_identity().is_ok());
            }

            #[test]
            fn same_seed_same_trajectory(seed in any::<u64>(), rep in 0u64..100) {
                let w = WeightFunction::exponential(2.0).unwrap();
                let mut a = WalkState::new(seed, rep);
                let mut b = WalkState::new(seed, rep);
                for _ in 0..300 {
                    prop_assert_eq!(a.advance(&w), b.advance(&w));
                }
                prop_assert_eq!(a.field(), b.field());
            }
        }
    }
}
