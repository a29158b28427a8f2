use rayon::prelude::*;

use super::{FieldState, SolverConfig, WaveSystem};
use crate::error::{Error, Result};

/// Below this many unknowns the per-mode work is not worth a thread hop.
const PARALLEL_THRESHOLD: usize = 1 << 14;

fn accel_mode(sys: &WaveSystem, mode: usize, phi: &[f64], out: &mut [f64]) {
    let n = phi.len();
    let inv_h2 = 1.0 / (sys.grid.h() * sys.grid.h());
    let pot = &sys.effective[mode];
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        out[i] = (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) * inv_h2 - pot[i] * phi[i];
    }
    if sys.semilinear.is_some() && mode == 0 {
        for i in 1..n - 1 {
            out[i] -= sys.nonlinear_force(i, phi[i]);
        }
    }
}

fn accel_into(sys: &WaveSystem, phi: &[Vec<f64>], out: &mut [Vec<f64>]) {
    if phi.len() > 1 && phi.len() * sys.grid.n >= PARALLEL_THRESHOLD {
        out.par_iter_mut().zip(phi.par_iter()).enumerate().for_each(|(m, (o, p))| accel_mode(sys, m, p, o));
    } else {
        for (m, (o, p)) in out.iter_mut().zip(phi).enumerate() {
            accel_mode(sys, m, p, o);
        }
    }
}

/// Acceleration `D2 phi_l - V_l phi_l - N_l` per mode; zero on the boundary.
pub fn rhs(state: &FieldState, sys: &WaveSystem) -> Result<Vec<Vec<f64>>> {
    state.check_shape(&sys.grid, sys.modes.len())?;
    let mut out = vec![vec![0.0; sys.grid.n]; state.mode_count()];
    accel_into(sys, &state.phi, &mut out);
    Ok(out)
}

/// One kick-drift-kick leapfrog step of size `config.dt` (negative steps
/// run backwards).
pub fn step(state: &FieldState, config: &SolverConfig, sys: &WaveSystem) -> Result<FieldState> {
    let mut next = state.clone();
    let mut stepper = Stepper::new(sys);
    stepper.advance(&mut next, config.dt)?;
    Ok(next)
}

/// Leapfrog integrator that reuses the end-of-step acceleration as the
/// next step's opening kick.
#[derive(Debug)]
pub struct Stepper<'a> {
    sys: &'a WaveSystem,
    accel: Vec<Vec<f64>>,
    /// `tau` at which `accel` was evaluated.
    valid_for: Option<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a WaveSystem) -> Self {
        Stepper { sys, accel: vec![vec![0.0; sys.grid.n]; sys.modes.len()], valid_for: None }
    }

    pub fn system(&self) -> &WaveSystem {
        self.sys
    }

    /// Declares the cached acceleration current for a relabelled clock.
    pub(crate) fn mark_current(&mut self, tau: f64) {
        if self.valid_for.is_some() {
            self.valid_for = Some(tau);
        }
    }

    pub fn advance(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        state.check_shape(&self.sys.grid, self.sys.modes.len())?;
        if self.valid_for != Some(state.tau) {
            accel_into(self.sys, &state.phi, &mut self.accel);
        }
        let half = 0.5 * dt;
        let n = self.sys.grid.n;
        for m in 0..state.mode_count() {
            let (phi, phidot, a) = (&mut state.phi[m], &mut state.phidot[m], &self.accel[m]);
            for i in 1..n - 1 {
                phidot[i] += half * a[i];
                phi[i] += dt * phidot[i];
            }
        }
        accel_into(self.sys, &state.phi, &mut self.accel);
        for m in 0..state.mode_count() {
            let (phi, phidot, a) = (&mut state.phi[m], &mut state.phidot[m], &self.accel[m]);
            for i in 1..n - 1 {
                phidot[i] += half * a[i];
            }
            phi[0] = 0.0;
            phi[n - 1] = 0.0;
            phidot[0] = 0.0;
            phidot[n - 1] = 0.0;
        }
        state.tau += dt;
        self.valid_for = Some(state.tau);
        if state.phi.iter().chain(&state.phidot).any(|a| a.iter().any(|v| !v.is_finite())) {
            return Err(Error::Blowup { t: state.t() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{Background, Warp};
    use crate::evolve::{Boundary, RadialGrid};
    use crate::harmonics::ModeSet;

    fn flat() -> Background {
        // r = 1 gives V = 0 and V_L = 1; with the l = 0 mode only, V_l = 0.
        Background::warped(Warp::Polynomial { coeffs: vec![1.0] }).unwrap()
    }

    fn config(dt: f64) -> SolverConfig {
        SolverConfig { dt, t_end: 0.0, boundary: Boundary::DirichletTruncation, semilinear: false }
    }

    #[test]
    fn zero_in_zero_out() {
        let sys = WaveSystem::new(
            &Background::schwarzschild(1.0).unwrap(),
            &ModeSet::new(2, None).unwrap(),
            RadialGrid::new(-20.0, 20.0, 401).unwrap(),
            false,
        )
        .unwrap();
        let z = sys.zero_state();
        assert!(rhs(&z, &sys).unwrap().iter().flatten().all(|&v| v == 0.0));
        let next = step(&z, &config(0.05), &sys).unwrap();
        assert_eq!(next.phi, z.phi);
        assert!((next.tau - 0.05).abs() < 1e-16);
    }

    #[test]
    fn stencil_on_sine_is_second_order() {
        let modes = ModeSet::new(0, None).unwrap();
        let k = 1.3;
        let mut errs = Vec::new();
        for n in [201, 401, 801] {
            let grid = RadialGrid::new(0.0, 10.0, n).unwrap();
            let sys = WaveSystem::new(&flat(), &modes, grid, false).unwrap();
            let mut s = sys.zero_state();
            s.phi[0] = sys.nodes.iter().map(|x| (k * x).sin()).collect();
            let a = rhs(&s, &sys).unwrap();
            let err = (1..n - 1).map(|i| (a[0][i] + k * k * s.phi[0][i]).abs()).fold(0.0, f64::max);
            errs.push(err);
        }
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.05 && (errs[1] / errs[2] - 4.0).abs() < 0.05);
    }

    #[test]
    fn static_gaussian_pointwise() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let modes = ModeSet::single(2);
        let grid = RadialGrid::new(-20.0, 20.0, 801).unwrap();
        let sys = WaveSystem::new(&bg, &modes, grid, false).unwrap();
        let mut s = sys.zero_state();
        s.phi[0] = sys.nodes.iter().map(|x| (-x * x).exp()).collect();
        let a = rhs(&s, &sys).unwrap();
        let i = 400;
        let x = sys.nodes[i];
        let p = bg.potentials(x).unwrap();
        let h = grid.h();
        let curvature = (s.phi[0][i - 1] - 2.0 * s.phi[0][i] + s.phi[0][i + 1]) / (h * h);
        assert!((a[0][i] - (curvature - p.effective(6.0) * s.phi[0][i])).abs() < 1e-14);
        assert!((curvature + 2.0).abs() < 1e-2);
    }

    #[test]
    fn reversible() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let modes = ModeSet::new(2, None).unwrap();
        let grid = RadialGrid::new(-30.0, 30.0, 601).unwrap();
        let sys = WaveSystem::new(&bg, &modes, grid, false).unwrap();
        let mut s = sys.zero_state();
        for m in 0..3 {
            s.phi[m] = sys.nodes.iter().map(|x| (-(x - 2.0) * (x - 2.0)).exp() * (m + 1) as f64).collect();
        }
        s.phi.iter_mut().for_each(|a| {
            a[0] = 0.0;
            *a.last_mut().unwrap() = 0.0;
        });
        let fwd = step(&s, &config(0.05), &sys).unwrap();
        let back = step(&fwd, &config(-0.05), &sys).unwrap();
        let scale = s.max_abs();
        for (a, b) in back.phi.iter().flatten().zip(s.phi.iter().flatten()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
        for (a, b) in back.phidot.iter().flatten().zip(s.phidot.iter().flatten()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn blowup_is_reported() {
        let grid = RadialGrid::new(-5.0, 5.0, 101).unwrap();
        let sys = WaveSystem::new(&flat(), &ModeSet::new(0, None).unwrap(), grid, false).unwrap();
        let mut s = sys.zero_state();
        s.phi[0][50] = f64::NAN;
        assert!(matches!(step(&s, &config(0.05), &sys), Err(Error::Blowup { .. })));
    }
}
