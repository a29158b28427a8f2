//! Phase space observables `Gamma_{n,m}` and their sum `Gamma`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::calculus::MomentumSpectrum;
use super::multiplier::g_weight;
use super::{
    banded_product, build_hamiltonian, check_sigma_b, gamma_center, gamma_from_weight, interior_nodes, Centering,
    DiscreteOperator, MultiplierSpec, SymmetryTag,
};
use crate::background::Background;
use crate::error::{Error, Result};
use crate::evolve::RadialGrid;
use crate::functionals::default_chi;
use crate::harmonics::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub sigma: f64,
    pub b: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl PhaseParams {
    pub fn validate(&self) -> Result<()> {
        check_sigma_b(self.sigma, self.b)?;
        if !(self.delta > 0.0) || !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!(
                "need delta > 0 and epsilon in (0, 1), got {} and {}",
                self.delta, self.epsilon
            )));
        }
        Ok(())
    }
}

/// `(n, m)` pairs of `Gamma = Gamma_{1/2 - 2 delta, 1/2} + sum_j Gamma_{j delta, j delta}`.
pub fn full_phase_indices(delta: f64) -> Result<Vec<(f64, f64)>> {
    let k = 1.0 / (2.0 * delta);
    let kr = k.round();
    if !(delta > 0.0) || (k - kr).abs() > 1e-9 * k.max(1.0) || kr < 2.0 {
        return Err(Error::Parameter(format!("delta must be the inverse of an even integer >= 4, got {delta}")));
    }
    let k = kr as usize;
    let mut out = vec![(0.5 - 2.0 * delta, 0.5)];
    out.extend((0..=k - 2).map(|j| (j as f64 * delta, j as f64 * delta)));
    Ok(out)
}

/// Grid-level data shared by every phase observable: the momentum
/// spectrum, `chi_alpha` on the interior and the uniform centre.
#[derive(Debug, Clone)]
pub struct PhaseWorkbench {
    pub grid: RadialGrid,
    pub params: PhaseParams,
    pub nodes: Vec<f64>,
    pub chi: Vec<f64>,
    /// `(alpha_inf)_*`.
    pub center: f64,
    spectrum: MomentumSpectrum,
}

impl PhaseWorkbench {
    pub fn new(bg: &Background, grid: RadialGrid, params: PhaseParams) -> Result<Self> {
        params.validate()?;
        let chi_alpha = default_chi(bg, &grid)?;
        let nodes = interior_nodes(&grid);
        let chi = chi_alpha.sample(&nodes);
        let center = gamma_center(bg, &Mode::sphere(0), &grid, Centering::Uniform)?;
        Ok(PhaseWorkbench { spectrum: MomentumSpectrum::new(&grid)?, grid, params, nodes, chi, center })
    }

    /// The uniformly centred multiplier of the modulated family at scale
    /// `lambda^m`.
    pub fn modulated_gamma(&self, mode: &Mode, m: f64) -> DiscreteOperator {
        let s = mode.lambda.powf(m);
        let (sigma, b, c) = (self.params.sigma, self.params.b, self.center);
        gamma_from_weight(mode, &self.grid, |x| g_weight(s * (x - c), sigma, b))
    }

    /// `Phi_{a,eps}(xi_n)` for `mode`.
    pub fn localizer(&self, mode: &Mode, n: f64) -> DMatrix<f64> {
        let phi = MultiplierSpec::PhiA { eps: self.params.epsilon };
        self.spectrum.even_function(mode.lambda.powf(n - 1.0), |x| phi.eval(x))
    }

    /// `Gamma_{n,m} = chi Phi lambda^{n - eps} gamma_{L^m} Phi chi`.
    pub fn partial(&self, mode: &Mode, n: f64, m: f64) -> Result<DiscreteOperator> {
        if !(0.0 <= n && n <= m && m <= 0.5) {
            return Err(Error::Parameter(format!("need 0 <= n <= m <= 1/2, got n = {n}, m = {m}")));
        }
        let p = self.localizer(mode, n);
        let gamma = self.modulated_gamma(mode, m);
        let mut right = p.clone();
        for (j, mut col) in right.column_iter_mut().enumerate() {
            col *= self.chi[j];
        }
        let inner = banded_product(gamma.as_real()?, &right)?;
        let mut left = p;
        for (i, mut row) in left.row_iter_mut().enumerate() {
            row *= self.chi[i];
        }
        let out = left * inner * mode.lambda.powf(n - self.params.epsilon);
        Ok(DiscreteOperator::real_projected(*mode, out, SymmetryTag::Skew))
    }

    pub fn full(&self, mode: &Mode) -> Result<DiscreteOperator> {
        let pairs = full_phase_indices(self.params.delta)?;
        let mut total: Option<DiscreteOperator> = None;
        for (n, m) in pairs {
            let part = self.partial(mode, n, m)?;
            total = Some(match total {
                None => part,
                Some(t) => t.add_scaled(&part, 1.0)?,
            });
        }
        Ok(total.expect("at least two summands"))
    }
}

/// Largest sampled `||Gamma_{n,m} psi||^2 / E[psi]` for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBoundRatio {
    pub l: usize,
    pub n: f64,
    pub m: f64,
    pub max_ratio: f64,
}

impl PhaseWorkbench {
    /// Samples `||Gamma_{n,m} psi||^2 / E[psi]` over static states `psi`
    /// (interior values, `E = <psi, H psi> / 2`) for every summand of the
    /// full observable.
    pub fn energy_bound_ratios(
        &self,
        bg: &Background,
        mode: &Mode,
        states: &[Vec<f64>],
    ) -> Result<Vec<EnergyBoundRatio>> {
        let h = build_hamiltonian(mode, bg, &self.grid)?;
        let dx = self.grid.h();
        let energies = states
            .iter()
            .map(|psi| {
                let hpsi = h.apply(psi)?;
                Ok(0.5 * dx * psi.iter().zip(&hpsi).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect::<Result<Vec<f64>>>()?;
        full_phase_indices(self.params.delta)?
            .into_iter()
            .map(|(n, m)| {
                let op = self.partial(mode, n, m)?;
                let mut max_ratio = 0.0f64;
                for (psi, &e) in states.iter().zip(&energies) {
                    if e > 0.0 {
                        let v = op.apply(psi)?;
                        max_ratio = max_ratio.max(dx * v.iter().map(|x| x * x).sum::<f64>() / e);
                    }
                }
                Ok(EnergyBoundRatio { l: mode.l, n, m, max_ratio })
            })
            .collect()
    }
}

pub fn build_partial_phase_observable(
    mode: &Mode,
    n: f64,
    m: f64,
    params: PhaseParams,
    bg: &Background,
    grid: &RadialGrid,
) -> Result<DiscreteOperator> {
    PhaseWorkbench::new(bg, *grid, params)?.partial(mode, n, m)
}

pub fn build_full_phase_observable(
    mode: &Mode,
    params: PhaseParams,
    bg: &Background,
    grid: &RadialGrid,
) -> Result<DiscreteOperator> {
    PhaseWorkbench::new(bg, *grid, params)?.full(mode)
}
