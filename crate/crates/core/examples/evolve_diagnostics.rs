//! Evolves a multipole pulse on Schwarzschild and prints the diagnostics:
//! conserved energy, conformal charge and the Morawetz accumulator.

use rwlab::background::Background;
use rwlab::evolve::{evolve_run, initial_data_bump, Boundary, BumpData, Launch, RadialGrid, SolverConfig, WaveSystem};
use rwlab::functionals::{DiagnosticsRecorder, FunctionalContext, DEFAULT_EPSILON};
use rwlab::harmonics::ModeSet;

fn main() -> rwlab::Result<()> {
    let bg = Background::schwarzschild(1.0)?;
    let modes = ModeSet::new(2, None)?;
    let grid = RadialGrid::with_spacing(-150.0, 150.0, 0.1)?;
    let sys = WaveSystem::new(&bg, &modes, grid, false)?;
    let data = BumpData {
        center: 10.0,
        width: 2.0,
        amplitude: 1.0,
        mode_weights: vec![1.0, 0.5, 0.25],
        launch: Launch::TimeSymmetric,
    };
    let config = SolverConfig { dt: 0.05, t_end: 100.0, boundary: Boundary::DirichletTruncation, semilinear: false };
    let mut recorder = DiagnosticsRecorder::new(FunctionalContext::new(&sys, DEFAULT_EPSILON)?, 200);
    evolve_run(&config, &sys, initial_data_bump(&grid, &data)?, &mut [&mut recorder])?;

    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "E", "E_C", "morawetz", "L4_cum");
    for r in &recorder.records {
        println!("{:>6.1} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}", r.t, r.e, r.e_c, r.morawetz_cum, r.l4_cum);
    }
    let (first, last) = (&recorder.records[0], recorder.records.last().unwrap());
    println!("relative energy change {:.2e}", (last.e - first.e).abs() / first.e);
    Ok(())
}
