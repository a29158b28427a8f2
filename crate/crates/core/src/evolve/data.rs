//! Compactly supported initial data. Every profile is built from the bump
//! `exp(1 - 1/(1 - x^2))` on `|x| < 1`, which is exactly zero outside its
//! support and satisfies the Schwartz-class requirement trivially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FieldState, RadialGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Launch {
    /// `phidot = 0`.
    #[default]
    TimeSymmetric,
    /// `phidot = -phi'`, moving towards larger `r_*`.
    Outgoing,
    /// `phidot = phi'`.
    Ingoing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpData {
    pub center: f64,
    /// Support is `[center - 4 width, center + 4 width]`.
    pub width: f64,
    pub amplitude: f64,
    /// One weight per mode; the profile on mode `l` is scaled by it.
    pub mode_weights: Vec<f64>,
    #[serde(default)]
    pub launch: Launch,
}

/// Bump value and `x`-derivative at `x`.
fn bump(x: f64) -> (f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - x * x;
    let v = (1.0 - 1.0 / q).exp();
    (v, -2.0 * x / (q * q) * v)
}

/// Peak value `amplitude * weight` at `center`.
pub fn initial_data_bump(grid: &RadialGrid, data: &BumpData) -> Result<FieldState> {
    if !(data.width > 0.0) {
        return Err(Error::Config(format!("bump width must be positive, got {}", data.width)));
    }
    let half = 4.0 * data.width;
    if !(data.center - half > grid.r_min && data.center + half < grid.r_max) {
        return Err(Error::Config(format!(
            "bump support [{}, {}] is not strictly inside the grid [{}, {}]",
            data.center - half,
            data.center + half,
            grid.r_min,
            grid.r_max
        )));
    }
    let mut state = FieldState::zeros(grid, data.mode_weights.len());
    for (m, w) in data.mode_weights.iter().enumerate() {
        let a = data.amplitude * w;
        for i in 0..grid.n {
            let (v, d) = bump((grid.node(i) - data.center) / half);
            state.phi[m][i] = a * v;
            let slope = a * d / half;
            state.phidot[m][i] = match data.launch {
                Launch::TimeSymmetric => 0.0,
                Launch::Outgoing => -slope,
                Launch::Ingoing => slope,
            };
        }
    }
    Ok(state)
}

/// Parameters of the random smooth state family used by the sampled-ratio checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomStateSpec {
    /// Region that contains every bump's support.
    pub region: (f64, f64),
    pub bumps_per_mode: usize,
    pub width_range: (f64, f64),
    /// Draw a random `phidot` as well.
    pub moving: bool,
}

impl Default for RandomStateSpec {
    fn default() -> Self {
        RandomStateSpec { region: (-20.0, 20.0), bumps_per_mode: 3, width_range: (0.3, 2.0), moving: true }
    }
}

/// A random superposition of bumps on every mode; deterministic in `seed`.
pub fn random_state(grid: &RadialGrid, modes: usize, spec: &RandomStateSpec, seed: u64) -> Result<FieldState> {
    let (a, b) = spec.region;
    if !(a > grid.r_min && b < grid.r_max && b > a) {
        return Err(Error::Config(format!(
            "random-state region [{a}, {b}] must lie inside the grid [{}, {}]",
            grid.r_min, grid.r_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = FieldState::zeros(grid, modes);
    let max_half = 0.5 * (b - a);
    for m in 0..modes {
        for target in 0..if spec.moving { 2 } else { 1 } {
            for _ in 0..spec.bumps_per_mode {
                let w = rng.gen_range(spec.width_range.0..=spec.width_range.1);
                let half = (4.0 * w).min(max_half * 0.99);
                let c = rng.gen_range(a + half..=b - half);
                let amp: f64 = rng.gen_range(-1.0..=1.0);
                let arr = if target == 0 { &mut state.phi[m] } else { &mut state.phidot[m] };
                for (i, v) in arr.iter_mut().enumerate() {
                    *v += amp * bump((grid.node(i) - c) / half).0;
                }
            }
        }
    }
    Ok(state)
}
