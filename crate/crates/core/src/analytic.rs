//! Closed-form reference functions.
//!
//! Three families of explicit solutions anchor everything else in the crate:
//!
//! * `psi_c(x)`, the one-alternative value with the outside option at zero,
//!   which pastes smoothly onto `max{x, 0}` at `x = ±1/(4c)`;
//! * `eta_theta(t, s)`, the two-alternative value without an outside option,
//!   written in the rotated coordinates `t = (x1+x2)/√2`, `s = (x1-x2)/√2`,
//!   which pastes onto `(t+|s|)/√2` at `|s| = 1/(2√2 θ)`;
//! * `phi_eps(t, s)`, an upper barrier for the two-alternative value in the
//!   half plane `t ≥ 0`.
//!
//! They serve as truncation data for the grid solvers, as exact oracles in
//! tests, and as the two sides of the sandwich that pins the diagonal free
//! boundary.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{positive, Error, Result};

/// Search cost per unit time. Always finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Cost(f64);

impl Cost {
    pub fn new(c: f64) -> Result<Self> {
        positive("c", c).map(Cost)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Cost {
    type Error = Error;

    fn try_from(c: f64) -> Result<Self> {
        Cost::new(c)
    }
}

impl From<Cost> for f64 {
    fn from(c: Cost) -> f64 {
        c.0
    }
}

/// A point of the plane in coordinates aligned with the diagonal `x1 = x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedPoint {
    /// Position along the diagonal, `(x1 + x2)/√2`.
    pub t: f64,
    /// Signed offset across the diagonal, `(x1 - x2)/√2`.
    pub s: f64,
}

impl RotatedPoint {
    pub fn new(t: f64, s: f64) -> Self {
        Self { t, s }
    }

    pub fn from_cartesian(x1: f64, x2: f64) -> Self {
        Self {
            t: (x1 + x2) / SQRT_2,
            s: (x1 - x2) / SQRT_2,
        }
    }

    pub fn to_cartesian(self) -> (f64, f64) {
        ((self.t + self.s) / SQRT_2, (self.t - self.s) / SQRT_2)
    }
}

/// One-alternative value `psi_c(x)`.
pub fn psi_value(x: f64, c: Cost) -> f64 {
    let c = c.value();
    let edge = 0.25 / c;
    if x.abs() <= edge {
        let y = x + edge;
        c * y * y
    } else if x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Half-width in `s` of the region where `eta_theta` exceeds its obstacle.
pub fn eta_half_width(theta: f64) -> f64 {
    1.0 / (2.0 * SQRT_2 * theta)
}

/// Two-alternative value `eta_theta(t, s)`; C¹ across `|s| = 1/(2√2 θ)`.
pub fn eta_value(p: RotatedPoint, theta: f64) -> Result<f64> {
    let theta = positive("theta", theta)?;
    Ok(eta_unchecked(p.t, p.s, theta))
}

#[inline]
pub(crate) fn eta_unchecked(t: f64, s: f64, theta: f64) -> f64 {
    if s.abs() <= eta_half_width(theta) {
        t / SQRT_2 + theta * s * s + 0.125 / theta
    } else {
        (t + s.abs()) / SQRT_2
    }
}

/// `eta_theta` evaluated at Cartesian coordinates `(a, b)` of two alternatives.
#[inline]
pub fn eta_pair(a: f64, b: f64, theta: f64) -> f64 {
    eta_unchecked((a + b) / SQRT_2, (a - b) / SQRT_2, theta)
}

/// Upper barrier `phi_eps(t, s) = h(α t)/(4c) + eta_{c-eps}(t, s)` with
/// `h(t) = max{1-t, 0}²` and `α = 2√(c·eps)`. Valid for `t ≥ 0`.
///
/// `eps` must lie strictly inside `(0, c)`: at `eps = c` the inner
/// `eta_{c-eps}` has zero curvature parameter and blows up.
pub fn phi_upper(p: RotatedPoint, c: Cost, eps: f64) -> Result<f64> {
    let cv = c.value();
    if !(eps > 0.0 && eps < cv) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: format!("must lie in the open interval (0, {cv})"),
        });
    }
    let alpha = 2.0 * (cv * eps).sqrt();
    let ramp = (1.0 - alpha * p.t).max(0.0);
    Ok(0.25 / cv * ramp * ramp + eta_unchecked(p.t, p.s, cv - eps))
}

/// Leading term `1/(8√2 c³ T²)` of the bound on the distance between the
/// diagonal free boundary beyond `T` and its asymptote. The neglected
/// remainder is `O(1/(c⁵ T⁴))`.
pub fn dfb_upper_bound(t: f64, c: Cost) -> Result<f64> {
    let cv = c.value();
    if !(t.is_finite() && t >= 0.5 / cv) {
        return Err(Error::InvalidParameter {
            name: "T",
            value: t,
            reason: format!("bound holds only for T >= 1/(2c) = {}", 0.5 / cv),
        });
    }
    Ok(1.0 / (8.0 * SQRT_2 * cv.powi(3) * t * t))
}

/// Explicit two-dimensional growth bound `max{x1,0} + max{x2,0} + 1/(4c) ≥ u`.
pub fn value_upper_bound_2d(x1: f64, x2: f64, c: Cost) -> f64 {
    x1.max(0.0) + x2.max(0.0) + 0.25 / c.value()
}

/// Generic linear growth envelope `Σ|x_i| + constant`. The constant is not
/// known in closed form beyond two dimensions, so the caller supplies it.
pub fn linear_growth_bound(x: &[f64], constant: f64) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() + constant
}
