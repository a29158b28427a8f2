//! Time-domain evolution of the per-harmonic 1+1 wave equations
//! `phi_l,tt = phi_l'' - (V + lt2 V_L) phi_l - N_l` on a shared uniform
//! `r_*` grid with Dirichlet truncation.
//!
//! Internal time `tau` starts at 0; time-weighted functionals use the
//! shifted time `t = 1 + tau`.

mod checkpoint;
mod data;
mod run;
mod stepper;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use data::{initial_data_bump, random_state, BumpData, Launch, RandomStateSpec};
pub use run::{evolve_run, Observer, Snapshots};
pub use stepper::{rhs, step, Stepper};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::background::{Background, Profile};
use crate::error::{Error, Result};
use crate::harmonics::ModeSet;

pub const MAX_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if n < 16 || !(r_max > r_min) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(Error::Config(format!(
                "grid needs r_min < r_max and n >= 16 (got [{r_min}, {r_max}], n = {n})"
            )));
        }
        Ok(RadialGrid { r_min, r_max, n })
    }

    /// Grid over `[r_min, r_max]` with spacing as close to `h` as possible.
    pub fn with_spacing(r_min: f64, r_max: f64, h: f64) -> Result<Self> {
        let n = ((r_max - r_min) / h).round() as usize + 1;
        Self::new(r_min, r_max, n)
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.r_max - self.r_min
    }
}

/// Per-mode radial arrays at internal time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub tau: f64,
    pub phi: Vec<Vec<f64>>,
    pub phidot: Vec<Vec<f64>>,
}

impl FieldState {
    pub fn zeros(grid: &RadialGrid, modes: usize) -> Self {
        FieldState { tau: 0.0, phi: vec![vec![0.0; grid.n]; modes], phidot: vec![vec![0.0; grid.n]; modes] }
    }

    /// Time label used by the weighted functionals.
    pub fn t(&self) -> f64 {
        1.0 + self.tau
    }

    pub fn mode_count(&self) -> usize {
        self.phi.len()
    }

    pub fn check_shape(&self, grid: &RadialGrid, modes: usize) -> Result<()> {
        if self.phi.len() != modes || self.phidot.len() != modes {
            return Err(Error::Shape(format!("state carries {} modes, expected {modes}", self.phi.len())));
        }
        if self.phi.iter().chain(&self.phidot).any(|a| a.len() != grid.n) {
            return Err(Error::Shape(format!("state arrays do not have grid length {}", grid.n)));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<Vec<f64>>| v.iter().map(|a| a.iter().map(|x| c * x).collect()).collect();
        FieldState { tau: self.tau, phi: s(&self.phi), phidot: s(&self.phidot) }
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().chain(&self.phidot).flat_map(|a| a.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    DirichletTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    /// Radial semilinear coupling on the `l = 0` mode.
    pub semilinear: bool,
}

impl SolverConfig {
    pub fn cfl(&self, grid: &RadialGrid) -> f64 {
        self.dt.abs() / grid.h()
    }

    /// Number of steps to reach `t_end`; `t_end` must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        if self.t_end == 0.0 {
            return Ok(0);
        }
        let k = (self.t_end / self.dt).round();
        if !(k >= 1.0) || ((k * self.dt - self.t_end).abs() > 1e-9 * self.t_end.abs().max(1.0)) {
            return Err(Error::Config(format!(
                "t_end = {} is not a whole number of steps dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(k as usize)
    }

    pub fn validate(&self, grid: &RadialGrid, modes: &ModeSet, bg: &Background) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive and t_end nonnegative (dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        let cfl = self.cfl(grid);
        if cfl > MAX_CFL {
            return Err(Error::Config(format!("cfl = dt/h = {cfl:.4} exceeds {MAX_CFL}")));
        }
        if self.semilinear {
            if !modes.is_radial() {
                return Err(Error::Config("semilinear coupling is radial only and requires l_max = 0".into()));
            }
            if !bg.is_semilinear() {
                return Err(Error::Config("semilinear coupling needs a nonlinearity exponent p".into()));
            }
        }
        self.steps().map(|_| ())
    }
}

/// Everything the stepper and the functionals read: grid, modes, and the
/// background sampled on the nodes.
#[derive(Debug, Clone)]
pub struct WaveSystem {
    pub grid: RadialGrid,
    pub modes: ModeSet,
    pub background: Background,
    pub nodes: Vec<f64>,
    pub profile: Profile,
    /// `V + lt2 V_L` per mode.
    pub effective: Vec<Vec<f64>>,
    pub v: Vec<f64>,
    pub v_l: Vec<f64>,
    pub f: Vec<f64>,
    /// `Some(p)` when the radial semilinear term is active.
    pub semilinear: Option<f64>,
}

/// Pointwise value of a radial field with `l = 0` coefficient `phi0`.
pub const fn radial_normalisation() -> f64 {
    // 1/sqrt(4 pi); const fn sqrt is unavailable.
    0.282_094_791_773_878_14
}

impl WaveSystem {
    pub fn new(bg: &Background, modes: &ModeSet, grid: RadialGrid, semilinear: bool) -> Result<Self> {
        if semilinear && !modes.is_radial() {
            return Err(Error::Config("semilinear coupling is radial only and requires l_max = 0".into()));
        }
        let semilinear = if semilinear {
            Some(bg.p().ok_or_else(|| Error::Config("semilinear coupling needs a nonlinearity exponent p".into()))?)
        } else {
            None
        };
        let nodes = grid.nodes();
        let profile = bg.profile(&nodes)?;
        let v = profile.map(|s| s.v);
        let v_l = profile.map(|s| s.v_l);
        let f = profile.map(|s| s.f);
        let effective =
            modes.modes().iter().map(|m| v.iter().zip(&v_l).map(|(a, b)| a + m.lt2 * b).collect()).collect();
        Ok(WaveSystem {
            grid,
            modes: modes.clone(),
            background: bg.clone(),
            nodes,
            profile,
            effective,
            v,
            v_l,
            f,
            semilinear,
        })
    }

    /// Force density `f F'(phi_pt^2) phi_pt sqrt(4 pi)` on the `l = 0`
    /// coefficient, with `phi_pt = phi0 / sqrt(4 pi)`.
    pub fn nonlinear_force(&self, i: usize, phi0: f64) -> f64 {
        match self.semilinear {
            Some(p) => {
                let pt = phi0 * radial_normalisation();
                0.5 * self.f[i] * pt.abs().powf(p - 1.0) * phi0
            }
            None => 0.0,
        }
    }

    /// `4 pi * f F(phi_pt^2) / 2`, the nonlinear energy density after
    /// angular integration.
    pub fn nonlinear_energy_density(&self, i: usize, phi0: f64) -> f64 {
        match self.semilinear {
            Some(p) => {
                let pt = phi0 * radial_normalisation();
                2.0 * PI * self.f[i] * pt.abs().powf(p + 1.0) / (p + 1.0)
            }
            None => 0.0,
        }
    }

    /// `4 pi * F(phi_pt^2)` without the coefficient `f`.
    pub fn big_f_integrated(&self, phi0: f64) -> f64 {
        match self.semilinear {
            Some(p) => {
                let pt = phi0 * radial_normalisation();
                4.0 * PI * pt.abs().powf(p + 1.0) / (p + 1.0)
            }
            None => 0.0,
        }
    }

    pub fn zero_state(&self) -> FieldState {
        FieldState::zeros(&self.grid, self.modes.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_are_exact() {
        let g = RadialGrid::new(-10.0, 10.0, 401).unwrap();
        assert_eq!(g.h(), 0.05);
        assert_eq!(g.node(0), -10.0);
        assert_eq!(g.node(400), 10.0);
        assert!(RadialGrid::new(0.0, 1.0, 8).is_err());
        assert_eq!(RadialGrid::with_spacing(-150.0, 150.0, 0.05).unwrap().n, 6001);
    }

    #[test]
    fn normalisation_constant() {
        assert!((radial_normalisation() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-17);
    }

    #[test]
    fn solver_validation() {
        let g = RadialGrid::new(-10.0, 10.0, 401).unwrap();
        let bg = Background::schwarzschild(1.0).unwrap();
        let modes = ModeSet::new(2, None).unwrap();
        let ok = SolverConfig { dt: 0.025, t_end: 1.0, boundary: Boundary::DirichletTruncation, semilinear: false };
        ok.validate(&g, &modes, &bg).unwrap();
        assert_eq!(ok.steps().unwrap(), 40);
        let fast = SolverConfig { dt: 0.075, ..ok };
        assert!(fast.validate(&g, &modes, &bg).is_err());
        let nl = SolverConfig { semilinear: true, ..ok };
        assert!(nl.validate(&g, &modes, &bg.clone().with_nonlinearity(2.9).unwrap()).is_err());
        let radial = ModeSet::new(0, None).unwrap();
        assert!(nl.validate(&g, &radial, &bg).is_err());
        nl.validate(&g, &radial, &bg.with_nonlinearity(2.9).unwrap()).unwrap();
        let ragged = SolverConfig { t_end: 1.01, ..ok };
        assert!(ragged.steps().is_err());
    }

    #[test]
    fn nonlinear_force_is_energy_gradient() {
        let bg = Background::warped(crate::background::Warp::unit_quadratic()).unwrap().with_nonlinearity(2.9).unwrap();
        let g = RadialGrid::new(-5.0, 5.0, 101).unwrap();
        let sys = WaveSystem::new(&bg, &ModeSet::new(0, None).unwrap(), g, true).unwrap();
        for &phi in &[-0.7, 0.1, 1.3] {
            let h = 1e-6;
            let fd =
                (sys.nonlinear_energy_density(50, phi + h) - sys.nonlinear_energy_density(50, phi - h)) / (2.0 * h);
            assert!((fd - sys.nonlinear_force(50, phi)).abs() < 1e-8);
        }
    }
}
