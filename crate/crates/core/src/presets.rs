//! Named experiment setups reproducing the two figures, plus the data they
//! produce.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ray_knight::{rescaled_deviation, run_state_to_inverse_local_time, InverseLocalTimeQuery, StoppedRun};
use crate::rng::{self, tag};
use crate::walk::WalkState;
use crate::weight::WeightFunction;
use crate::Sign;

pub const PRESET_NAMES: [&str; 5] = ["fig1-base2", "fig1-base10", "fig2-base2", "fig2-base10", "acceptance"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetKind {
    /// Stopped local-time profile `Λ^±_{j,r}`.
    Profile { base: f64, j: i64, r: u64, sign: Sign },
    /// Trajectories under both readings of the second figure: a fixed number
    /// of steps, and the run stopped at the first figure's inverse local time.
    Trajectory {
        base: f64,
        steps: u64,
        stopped: InverseLocalTimeQuery,
    },
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: PresetKind,
}

const FIG_QUERY: InverseLocalTimeQuery = InverseLocalTimeQuery {
    j: 100,
    r: 800,
    sign: Sign::Plus,
};

pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        "fig1-base2" => Preset {
            name: "fig1-base2",
            description: "stopped profile Λ⁺_{100,800}, w(k) = 2^k",
            kind: PresetKind::Profile { base: 2.0, j: 100, r: 800, sign: Sign::Plus },
        },
        "fig1-base10" => Preset {
            name: "fig1-base10",
            description: "stopped profile Λ⁺_{100,800}, w(k) = 10^k",
            kind: PresetKind::Profile { base: 10.0, j: 100, r: 800, sign: Sign::Plus },
        },
        "fig2-base2" => Preset {
            name: "fig2-base2",
            description: "trajectories with ±√n hulls, w(k) = 2^k",
            kind: PresetKind::Trajectory { base: 2.0, steps: 1_000_000, stopped: FIG_QUERY },
        },
        "fig2-base10" => Preset {
            name: "fig2-base10",
            description: "trajectories with ±√n hulls, w(k) = 10^k",
            kind: PresetKind::Trajectory { base: 10.0, steps: 1_000_000, stopped: FIG_QUERY },
        },
        "acceptance" => Preset {
            name: "acceptance",
            description: "full acceptance matrix",
            kind: PresetKind::Acceptance,
        },
        other => {
            return Err(Error::InvalidParameter {
                name: "preset",
                reason: format!("unknown preset '{other}' (known: {})", PRESET_NAMES.join(", ")),
            })
        }
    };
    Ok(p)
}

/// Theoretical profile in lattice units: `(|j| - |k| + 2r)₊`.
pub fn tent_overlay(j: i64, r: u64, k: i64) -> f64 {
    (j.abs() - k.abs() + 2 * r as i64).max(0) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFigure {
    pub run: StoppedRun,
    pub peak: u64,
    pub theory_peak: f64,
    /// Sup-deviation from the tent with `A = r`.
    pub sup_deviation: f64,
}

impl ProfileFigure {
    pub fn peak_relative_error(&self) -> f64 {
        (self.peak as f64 / self.theory_peak - 1.0).abs()
    }

    /// `k,Lambda,L,tent`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let q = self.run.query;
        writeln!(out, "k,Lambda,L,tent")?;
        let (olo, ohi) = self.run.oriented.range();
        let reach = q.j.abs() + 2 * q.r as i64;
        let lo = self.run.profile.lambda_edge.min(olo).min(-reach);
        let hi = self.run.profile.rho_edge.max(ohi).max(reach);
        for k in lo..=hi {
            writeln!(
                out,
                "{k},{},{},{}",
                self.run.profile.get(k),
                self.run.oriented.get(k),
                tent_overlay(q.j, q.r, k)
            )?;
        }
        Ok(())
    }
}

/// Runs one stopped profile with stream `(seed, replicate)`.
pub fn profile_figure(w: &WeightFunction, query: InverseLocalTimeQuery, seed: u64, replicate: u64) -> Result<ProfileFigure> {
    let run = crate::ray_knight::run_to_inverse_local_time(w, query, seed, replicate, query.default_cap())?;
    let a = query.r as f64;
    let sup_deviation = rescaled_deviation(&run.profile, a, query.j as f64 / a, 1.0);
    Ok(ProfileFigure {
        peak: run.profile.peak(),
        theory_peak: tent_overlay(query.j, query.r, 0),
        sup_deviation,
        run,
    })
}

/// Running extremes against `±√n · (1 + slack)` after a burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullCheck {
    pub steps: u64,
    pub burn_in: u64,
    pub slack: f64,
    /// `max_{n >= burn_in} max(M⁺(n), -M⁻(n)) / √n` for the running max/min.
    pub max_ratio: f64,
    pub confined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub label: String,
    /// Thinned `(n, X(n))`, always including `n = 0` and the last step.
    pub points: Vec<(u64, i64)>,
    pub hull: HullCheck,
}

impl Trajectory {
    /// `n,position`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,position")?;
        for &(n, x) in &self.points {
            writeln!(out, "{n},{x}")?;
        }
        Ok(())
    }

    /// `n,upper,lower` with the `±√n` hull at the same times.
    pub fn write_hull_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,upper,lower")?;
        for &(n, _) in &self.points {
            let s = (n as f64).sqrt();
            writeln!(out, "{n},{s},{}", -s)?;
        }
        Ok(())
    }
}

struct HullTracker {
    burn_in: u64,
    hi: i64,
    lo: i64,
    max_ratio: f64,
}

impl HullTracker {
    fn new(burn_in: u64) -> Self {
        Self { burn_in, hi: 0, lo: 0, max_ratio: 0.0 }
    }

    fn push(&mut self, n: u64, x: i64) {
        self.hi = self.hi.max(x);
        self.lo = self.lo.min(x);
        if n >= self.burn_in.max(1) {
            let r = self.hi.max(-self.lo) as f64 / (n as f64).sqrt();
            self.max_ratio = self.max_ratio.max(r);
        }
    }

    fn finish(self, steps: u64, slack: f64) -> HullCheck {
        HullCheck {
            steps,
            burn_in: self.burn_in,
            slack,
            max_ratio: self.max_ratio,
            confined: self.max_ratio <= 1.0 + slack,
        }
    }
}

pub const HULL_BURN_IN: f64 = 0.01;
pub const HULL_SLACK: f64 = 0.1;

/// A fixed-length trajectory, thinned to every `stride`-th point.
pub fn fixed_trajectory(w: &WeightFunction, steps: u64, seed: u64, stride: u64) -> Trajectory {
    let stride = stride.max(1);
    let mut state = WalkState::with_rng(rng::stream(seed, &[tag::WALK, steps]));
    let mut tracker = HullTracker::new((HULL_BURN_IN * steps as f64).ceil() as u64);
    let mut points = vec![(0, 0)];
    state.run_with(w, steps, |n, x| {
        tracker.push(n, x);
        if n.is_multiple_of(stride) || n == steps {
            points.push((n, x));
        }
    });
    Trajectory {
        label: format!("fixed-N {steps}"),
        points,
        hull: tracker.finish(steps, HULL_SLACK),
    }
}

/// The trajectory up to `T^±_{j,r}`. The burn-in is a fraction of `T`, which
/// is only known at the end, so the path is kept in full.
pub fn stopped_trajectory(w: &WeightFunction, query: InverseLocalTimeQuery, seed: u64, stride: u64) -> Result<Trajectory> {
    let stride = stride.max(1);
    let mut state = WalkState::with_rng(rng::stream(seed, &[tag::WALK, tag::QUERY, query.j as u64, query.r]));
    let mut path = Vec::new();
    let summary = run_state_to_inverse_local_time(w, query, &mut state, query.default_cap(), |_, x| {
        path.push(x as i32)
    })?;
    let steps = summary.steps;
    let mut tracker = HullTracker::new((HULL_BURN_IN * steps as f64).ceil() as u64);
    let mut points = vec![(0, 0)];
    for (i, &x) in path.iter().enumerate() {
        let n = i as u64 + 1;
        tracker.push(n, x as i64);
        if n.is_multiple_of(stride) || n == steps {
            points.push((n, x as i64));
        }
    }
    Ok(Trajectory {
        label: format!("T-stopped {}{} r={}", query.sign, query.j, query.r),
        points,
        hull: tracker.finish(steps, HULL_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_resolve() {
        for name in PRESET_NAMES {
            assert_eq!(preset(name).unwrap().name, name);
        }
        assert!(preset("fig3").is_err());
    }

    #[test]
    fn overlay_peak() {
        assert_eq!(tent_overlay(100, 800, 0), 1700.0);
        assert_eq!(tent_overlay(100, 800, 1700), 0.0);
        assert_eq!(tent_overlay(-100, 800, -1699), 1.0);
    }

    #[test]
    fn zero_step_trajectory_is_origin() {
        let w = WeightFunction::exponential(2.0).unwrap();
        let t = fixed_trajectory(&w, 0, 1, 10);
        assert_eq!(t.points, vec![(0, 0)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let w = WeightFunction::exponential(2.0).unwrap();
        assert_eq!(fixed_trajectory(&w, 5000, 3, 7), fixed_trajectory(&w, 5000, 3, 7));
        let q = InverseLocalTimeQuery::new(3, 5, Sign::Plus).unwrap();
        let t = stopped_trajectory(&w, q, 3, 1).unwrap();
        assert_eq!(t.points.last().unwrap().1, 4);
    }

    #[test]
    fn hull_tracker_uses_running_extremes() {
        let mut h = HullTracker::new(4);
        for (n, x) in [(1, 1), (2, 2), (3, 3), (4, 2)] {
            h.push(n, x);
        }
        // running max 3 at n = 4
        assert!((h.max_ratio - 1.5).abs() < 1e-15);
    }
}
