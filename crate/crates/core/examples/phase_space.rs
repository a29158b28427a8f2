//! Phase-space observables: energy bounds for the localised pieces and the
//! positivity certificate for the angularly modulated commutator.

use rwlab::background::Background;
use rwlab::evolve::{random_state, RadialGrid, RandomStateSpec};
use rwlab::harmonics::Mode;
use rwlab::observables::{certify_phase, PhaseParams, PhaseWorkbench, TestSubspace};

fn main() -> rwlab::Result<()> {
    let bg = Background::schwarzschild(1.0)?;
    let grid = RadialGrid::with_spacing(-30.0, 30.0, 0.15)?;
    let wb = PhaseWorkbench::new(&bg, grid, PhaseParams { sigma: 2.0, b: 0.2, delta: 0.125, epsilon: 0.125 })?;

    let spec = RandomStateSpec { region: (-20.0, 20.0), moving: false, ..Default::default() };
    let states: Vec<Vec<f64>> = (0..20)
        .map(|seed| random_state(&grid, 1, &spec, seed).map(|s| s.phi[0][1..grid.n - 1].to_vec()))
        .collect::<rwlab::Result<_>>()?;
    for l in [0, 5, 10, 20, 30] {
        let ratios = wb.energy_bound_ratios(&bg, &Mode::sphere(l), &states)?;
        let worst = ratios.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
        println!("l = {l:>2}: max ||Gamma_nm psi||^2 / E over {} pieces = {worst:.3e}", ratios.len());
    }
    for l in [5, 10] {
        let cert = certify_phase(&wb, &bg, &Mode::sphere(l), &TestSubspace::default())?;
        println!(
            "l = {l:>2}: C_Gamma = {:.3}, c_best = {:.3e}, margin = {:.2e}",
            cert.c_gamma, cert.result.c_best, cert.result.margin
        );
    }
    Ok(())
}
