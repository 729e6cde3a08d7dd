//! Closed-form limit objects.

use std::f64::consts::PI;

use crate::stats::{normal_pdf, normal_sf};

pub use crate::ray_knight::tent;

/// Limit of `A⁻² T`: `(|x| + 2h)²`.
pub fn t_limit(x: f64, h: f64) -> f64 {
    let a = x.abs() + 2.0 * h;
    a * a
}

/// Limit density of the rescaled position at fixed time,
/// `φ(t, x) = 1/(2√t)` on `|x| <= √t`.
pub fn phi_density(t: f64, x: f64) -> f64 {
    let st = t.sqrt();
    if x.abs() <= st {
        0.5 / st
    } else {
        0.0
    }
}

/// `|A^ν φ(A t, A^ν x) - φ(t, x)|` with the diffusive exponent `ν = 1/2`.
pub fn phi_scaling_residual(a: f64, t: f64, x: f64) -> f64 {
    let s = a.sqrt();
    (s * phi_density(a * t, s * x) - phi_density(t, x)).abs()
}

/// Laplace transform in time of `φ`:
/// `φ̂(s, x) = √(sπ) (1 - F(√(2s) |x|))`.
pub fn phi_hat(s: f64, x: f64) -> f64 {
    (s * PI).sqrt() * normal_sf((2.0 * s).sqrt() * x.abs())
}

/// `∫_{-∞}^x φ̂(s, u) du`.
///
/// With `c = √(2s)`, `∫_0^a (1 - F(c u)) du = a (1 - F(c a)) + (f(0) - f(c a)) / c`.
pub fn phi_hat_cdf(s: f64, x: f64) -> f64 {
    let c = (2.0 * s).sqrt();
    let a = x.abs();
    let half = (s * PI).sqrt() * (a * normal_sf(c * a) + (normal_pdf(0.0) - normal_pdf(c * a)) / c);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// `ρ̂(s, x, h) = s exp(-s (|x| + 2h)²)`.
pub fn rho_hat(s: f64, x: f64, h: f64) -> f64 {
    s * (-s * t_limit(x, h)).exp()
}

/// CDF of Uniform(-√t, √t).
pub fn uniform_hull_cdf(t: f64, x: f64) -> f64 {
    let st = t.sqrt();
    ((x + st) / (2.0 * st)).clamp(0.0, 1.0)
}
