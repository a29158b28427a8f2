//! The Heisenberg relation as a numerical identity along a run.
//!
//! For an operator family `A(t)` per mode, `theta = <phi, A phidot> -
//! <phidot, A phi>` obeys
//!
//! `theta' = <phi, [H, A] phi> + <phi, A' phidot> - <phidot, A' phi>
//!           - <phi, A N> + <N, A phi>`
//!
//! exactly for the semi-discrete system, so the residual of a centred time
//! difference of `theta` measures only time-stepping and `A'` errors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::phase::PhaseWorkbench;
use super::{build_hamiltonian, interior_nodes, lightcone_cutoff, DiscreteOperator, SymmetryTag};
use crate::error::{Error, Result};
use crate::evolve::{evolve_run, FieldState, Observer, SolverConfig, WaveSystem};
use crate::functionals::energy;
use crate::harmonics::Mode;

/// `A(t)` for every mode of a run; `mode_index` follows the run's mode set.
pub trait ObservableFamily: Sync {
    fn operator(&self, mode_index: usize, t: f64) -> Result<DiscreteOperator>;
    fn time_dependent(&self) -> bool;
}

/// The same operator at every time.
#[derive(Debug, Clone)]
pub struct StaticFamily {
    pub operators: Vec<DiscreteOperator>,
}

impl ObservableFamily for StaticFamily {
    fn operator(&self, mode_index: usize, _t: f64) -> Result<DiscreteOperator> {
        self.operators
            .get(mode_index)
            .cloned()
            .ok_or_else(|| Error::Shape(format!("no operator for mode index {mode_index}")))
    }

    fn time_dependent(&self) -> bool {
        false
    }
}

/// `(1 + t) Gamma + C_Gamma (1 + t) chi_check gamma chi_check`.
#[derive(Debug, Clone)]
pub struct TemporalPhaseFamily {
    pub phase: Vec<DiscreteOperator>,
    pub gamma: Vec<DiscreteOperator>,
    pub c_gamma: Vec<f64>,
    nodes: Vec<f64>,
}

impl TemporalPhaseFamily {
    /// Builds `Gamma` and the uniformly centred `gamma` for each mode.
    pub fn new(wb: &PhaseWorkbench, modes: &[Mode], c_gamma: &[f64]) -> Result<Self> {
        if c_gamma.len() != modes.len() {
            return Err(Error::Shape(format!("{} constants for {} modes", c_gamma.len(), modes.len())));
        }
        let phase = modes.iter().map(|m| wb.full(m)).collect::<Result<Vec<_>>>()?;
        let gamma = modes.iter().map(|m| wb.modulated_gamma(m, 0.0)).collect();
        Ok(TemporalPhaseFamily { phase, gamma, c_gamma: c_gamma.to_vec(), nodes: interior_nodes(&wb.grid) })
    }
}

impl ObservableFamily for TemporalPhaseFamily {
    fn operator(&self, mode_index: usize, t: f64) -> Result<DiscreteOperator> {
        let (phase, gamma) = match (self.phase.get(mode_index), self.gamma.get(mode_index)) {
            (Some(p), Some(g)) => (p, g),
            _ => return Err(Error::Shape(format!("no operator for mode index {mode_index}"))),
        };
        let cut: Vec<f64> = self.nodes.iter().map(|&x| lightcone_cutoff(x, t)).collect();
        let g = gamma.as_real()?;
        let localized = DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| cut[i] * g[(i, j)] * cut[j]);
        let mut m = phase.as_real()? * (1.0 + t);
        m += localized * (self.c_gamma[mode_index] * (1.0 + t));
        Ok(DiscreteOperator::real_projected(phase.mode, m, SymmetryTag::Skew))
    }

    fn time_dependent(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergReport {
    /// `max_k |theta'_k - rhs_k| / max(max |theta|, E)`.
    pub max_residual: f64,
    pub max_abs_residual: f64,
    pub normalisation: f64,
    pub fd_step: f64,
    pub samples: usize,
    pub times: Vec<f64>,
    pub theta: Vec<f64>,
    pub rhs: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `<u, A v> - <v, A u>` with the grid measure.
fn skew_pairing(a: &DiscreteOperator, u: &[f64], v: &[f64], h: f64) -> Result<f64> {
    Ok(h * (dot(u, &a.apply(v)?) - dot(v, &a.apply(u)?)))
}

struct Recorder<'a> {
    family: &'a dyn ObservableFamily,
    hamiltonians: Vec<DiscreteOperator>,
    fd_step: f64,
    times: Vec<f64>,
    theta: Vec<f64>,
    rhs: Vec<f64>,
    energy0: Option<f64>,
}

impl Recorder<'_> {
    fn sample(&self, state: &FieldState, sys: &WaveSystem) -> Result<(f64, f64)> {
        let n = sys.grid.n;
        let h = sys.grid.h();
        let t = state.t();
        let mut theta = 0.0;
        let mut rhs = 0.0;
        for (m, ham) in self.hamiltonians.iter().enumerate() {
            let phi = &state.phi[m][1..n - 1];
            let phidot = &state.phidot[m][1..n - 1];
            let a = self.family.operator(m, t)?;
            theta += skew_pairing(&a, phi, phidot, h)?;
            // <phi, [H, A] phi> = <H phi, A phi> - <A^T phi, H phi>
            let hphi = ham.apply(phi)?;
            rhs += h * (dot(&hphi, &a.apply(phi)?) - dot(&a.apply_transpose(phi)?, &hphi));
            if m == 0 && sys.semilinear.is_some() {
                let force: Vec<f64> = (1..n - 1).map(|i| sys.nonlinear_force(i, state.phi[0][i])).collect();
                rhs -= skew_pairing(&a, phi, &force, h)?;
            }
            if self.family.time_dependent() {
                let plus = self.family.operator(m, t + self.fd_step)?;
                let minus = self.family.operator(m, t - self.fd_step)?;
                let dot_a = plus.add_scaled(&minus, -1.0)?.scaled(0.5 / self.fd_step);
                rhs += skew_pairing(&dot_a, phi, phidot, h)?;
            }
        }
        Ok((theta, rhs))
    }
}

impl Observer for Recorder<'_> {
    fn name(&self) -> &str {
        "heisenberg"
    }

    fn cadence(&self) -> usize {
        1
    }

    fn observe(&mut self, state: &FieldState, sys: &WaveSystem) -> Result<()> {
        if self.energy0.is_none() {
            self.energy0 = Some(energy(state, sys));
        }
        let (theta, rhs) = self.sample(state, sys)?;
        self.times.push(state.t());
        self.theta.push(theta);
        self.rhs.push(rhs);
        Ok(())
    }
}

/// Runs `initial` under `config` and compares a centred difference of
/// `theta` with the Heisenberg right-hand side at every interior step.
/// `fd_step` is the step of the centred difference for `A'`, defaulting to
/// `config.dt`.
pub fn heisenberg_identity_check(
    config: &SolverConfig,
    sys: &WaveSystem,
    initial: FieldState,
    family: &dyn ObservableFamily,
    fd_step: Option<f64>,
) -> Result<HeisenbergReport> {
    let fd_step = fd_step.unwrap_or(config.dt.abs());
    if !(fd_step > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {fd_step}")));
    }
    let hamiltonians = sys
        .modes
        .modes()
        .iter()
        .map(|m| build_hamiltonian(m, &sys.background, &sys.grid))
        .collect::<Result<Vec<_>>>()?;
    let mut rec = Recorder {
        family,
        hamiltonians,
        fd_step,
        times: Vec::new(),
        theta: Vec::new(),
        rhs: Vec::new(),
        energy0: None,
    };
    evolve_run(config, sys, initial, &mut [&mut rec])?;
    let k = rec.theta.len();
    if k < 3 {
        return Err(Error::Config("the identity check needs at least two time steps".into()));
    }
    let scale = rec.theta.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(rec.energy0.unwrap_or(0.0));
    let mut max_abs = 0.0f64;
    for i in 1..k - 1 {
        let fd = (rec.theta[i + 1] - rec.theta[i - 1]) / (2.0 * config.dt);
        max_abs = max_abs.max((fd - rec.rhs[i]).abs());
    }
    Ok(HeisenbergReport {
        max_residual: if scale > 0.0 { max_abs / scale } else { 0.0 },
        max_abs_residual: max_abs,
        normalisation: scale,
        fd_step,
        samples: k - 2,
        times: rec.times,
        theta: rec.theta,
        rhs: rec.rhs,
    })
}

/// Convenience: the same static operator builder applied to every mode.
pub fn static_family(sys: &WaveSystem, build: impl Fn(&Mode) -> Result<DiscreteOperator>) -> Result<StaticFamily> {
    let operators = sys.modes.modes().iter().map(build).collect::<Result<Vec<_>>>()?;
    Ok(StaticFamily { operators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::Background;
    use crate::evolve::{initial_data_bump, Boundary, BumpData, Launch, RadialGrid};
    use crate::harmonics::ModeSet;
    use crate::observables::{build_gamma, Centering};

    fn run_gamma(n: usize) -> f64 {
        let bg = Background::schwarzschild(1.0).unwrap();
        let modes = ModeSet::new(1, None).unwrap();
        let grid = RadialGrid::new(-30.0, 30.0, n).unwrap();
        let sys = WaveSystem::new(&bg, &modes, grid, false).unwrap();
        let data = BumpData {
            center: 3.0,
            width: 1.5,
            amplitude: 1.0,
            mode_weights: vec![1.0, 0.5],
            launch: Launch::Outgoing,
        };
        let s0 = initial_data_bump(&grid, &data).unwrap();
        let fam = static_family(&sys, |m| build_gamma(m, &bg, &grid, 2.0, 1.0, Centering::PerMode)).unwrap();
        let cfg =
            SolverConfig { dt: 0.5 * grid.h(), t_end: 4.0, boundary: Boundary::DirichletTruncation, semilinear: false };
        heisenberg_identity_check(&cfg, &sys, s0, &fam, None).unwrap().max_residual
    }

    #[test]
    fn identity_operator_gives_zero() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let grid = RadialGrid::new(-20.0, 20.0, 201).unwrap();
        let sys = WaveSystem::new(&bg, &ModeSet::single(2), grid, false).unwrap();
        let data =
            BumpData { center: 0.0, width: 2.0, amplitude: 1.0, mode_weights: vec![1.0], launch: Launch::Outgoing };
        let s0 = initial_data_bump(&grid, &data).unwrap();
        let id = DiscreteOperator::real(Mode::sphere(2), DMatrix::identity(199, 199), SymmetryTag::Symmetric).unwrap();
        let fam = StaticFamily { operators: vec![id] };
        let cfg = SolverConfig { dt: 0.1, t_end: 1.0, boundary: Boundary::DirichletTruncation, semilinear: false };
        let r = heisenberg_identity_check(&cfg, &sys, s0, &fam, None).unwrap();
        assert!(r.theta.iter().all(|v| v.abs() < 1e-14));
        assert!(r.max_residual < 1e-14);
    }

    #[test]
    fn static_gamma_converges_at_second_order() {
        let (a, b) = (run_gamma(301), run_gamma(601));
        let order = (a / b).log2();
        assert!(order > 1.8, "residuals {a:e} {b:e}, order {order}");
    }
}
