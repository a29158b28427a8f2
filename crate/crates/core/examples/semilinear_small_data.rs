//! Radial semilinear evolution with `p = 2.9` on a warped product that meets
//! every structural condition, compared with the linear evolution of the
//! same data.

use rwlab::background::{Background, Warp};
use rwlab::evolve::{evolve_run, initial_data_bump, Boundary, BumpData, Launch, RadialGrid, SolverConfig, WaveSystem};
use rwlab::functionals::{DiagnosticsRecorder, FunctionalContext, DEFAULT_EPSILON};
use rwlab::harmonics::ModeSet;

fn main() -> rwlab::Result<()> {
    let bg = Background::warped(Warp::Power { s: 1.0, k: 0.625 })?.with_nonlinearity(2.9)?;
    let modes = ModeSet::new(0, None)?;
    let grid = RadialGrid::with_spacing(-150.0, 150.0, 0.1)?;
    for amplitude in [6e-3, 1.0] {
        for semilinear in [false, true] {
            let sys = WaveSystem::new(&bg, &modes, grid, semilinear)?;
            let data =
                BumpData { center: 0.0, width: 1.5, amplitude, mode_weights: vec![1.0], launch: Launch::TimeSymmetric };
            let config = SolverConfig { dt: 0.05, t_end: 99.0, boundary: Boundary::DirichletTruncation, semilinear };
            let mut rec =
                DiagnosticsRecorder::new(FunctionalContext::new(&sys, DEFAULT_EPSILON)?, 20).without_pointwise();
            evolve_run(&config, &sys, initial_data_bump(&grid, &data)?, &mut [&mut rec])?;
            let r = &rec.records;
            let ec_max = r.iter().map(|x| x.e_c).fold(0.0, f64::max) / r[0].e_c;
            let e_drift = r.iter().map(|x| (x.e - r[0].e).abs()).fold(0.0, f64::max) / r[0].e;
            println!(
                "a = {amplitude:<6} semilinear = {semilinear:<5} E(0) = {:.3e}  max E_C / E_C(0) = {ec_max:.4}  energy drift {e_drift:.1e}",
                r[0].e
            );
        }
    }
    Ok(())
}
