//! Regge-Wheeler tortoise coordinate on the Schwarzschild exterior.
//!
//! The forward map is explicit,
//! `r_* = r + 2M log((r - 2M)/2M) - 3M + 2M log 2`, normalised so that the
//! photon sphere `r = 3M` sits at `r_* = 0`. The inverse is computed by a
//! safeguarded Newton iteration.
//!
//! Near the horizon `r - 2M` shrinks like `exp(r_*/2M)`, so for
//! `r_* < -70M` an `f64` area radius rounds to exactly `2M`. The
//! `horizon_distance` variants carry `delta = r - 2M` directly and keep
//! full relative accuracy all the way down.

use crate::error::{Error, Result};

const MAX_NEWTON_ITERATIONS: usize = 200;

fn check_mass(mass: f64) -> Result<()> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive and finite, got {mass}")));
    }
    Ok(())
}

/// `r_*` for an area radius `r > 2M`.
pub fn tortoise_from_area_radius(r: f64, mass: f64) -> Result<f64> {
    check_mass(mass)?;
    if !(r > 2.0 * mass) || !r.is_finite() {
        return Err(Error::Domain(format!("area radius {r} is not in the exterior region r > 2M = {}", 2.0 * mass)));
    }
    tortoise_from_horizon_distance(r - 2.0 * mass, mass)
}

/// `r_*` as a function of `delta = r - 2M > 0`.
pub fn tortoise_from_horizon_distance(delta: f64, mass: f64) -> Result<f64> {
    check_mass(mass)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("horizon distance must be positive and finite, got {delta}")));
    }
    Ok(delta - mass + 2.0 * mass * (delta / mass).ln())
}

/// Inverse of [`tortoise_from_horizon_distance`]: `delta = r - 2M` at tortoise coordinate `r_star`.
pub fn horizon_distance_from_tortoise(r_star: f64, mass: f64) -> Result<f64> {
    check_mass(mass)?;
    if !r_star.is_finite() {
        return Err(Error::Domain(format!("tortoise coordinate must be finite, got {r_star}")));
    }
    // With u = delta/2M and y = ln u the map reads e^y + y = s.
    let s = (r_star + mass - 2.0 * mass * std::f64::consts::LN_2) / (2.0 * mass);
    let residual = |y: f64| y.exp() + y - s;

    let (mut lo, mut hi) = if s > 1.0 { ((0.5 * s).ln(), s.ln()) } else { (s - 1.0, s) };
    let mut y = if r_star < 0.0 {
        (r_star - 2.0 * mass) / (2.0 * mass)
    } else if r_star > 4.0 * mass {
        ((r_star + mass) / (2.0 * mass)).ln()
    } else {
        0.0
    };
    if !(y > lo && y < hi) {
        y = 0.5 * (lo + hi);
    }

    for _ in 0..MAX_NEWTON_ITERATIONS {
        let f = residual(y);
        if f == 0.0 {
            return Ok(2.0 * mass * y.exp());
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let newton = y - f / (y.exp() + 1.0);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let settled = (next - y).abs() <= 2.0 * f64::EPSILON * y.abs().max(1.0)
            || hi - lo <= 2.0 * f64::EPSILON * y.abs().max(1.0);
        y = next;
        if settled {
            return Ok(2.0 * mass * y.exp());
        }
    }
    Err(Error::Convergence(format!(
        "tortoise inversion at r_* = {r_star} did not converge in {MAX_NEWTON_ITERATIONS} iterations"
    )))
}

/// Area radius `r` at tortoise coordinate `r_star`.
///
/// Strictly increasing in `r_star`; saturates at `2M` in `f64` for very
/// negative `r_star` (see the module docs).
pub fn area_radius_from_tortoise(r_star: f64, mass: f64) -> Result<f64> {
    Ok(2.0 * mass + horizon_distance_from_tortoise(r_star, mass)?)
}
