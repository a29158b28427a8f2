//! Checks `d/dt <phi, A phi> = <phi, [H, A] phi>` along a discrete solution
//! for the Morawetz multiplier and shows the residual shrinking with `h`.

use rwlab::background::Background;
use rwlab::evolve::{initial_data_bump, Boundary, BumpData, Launch, RadialGrid, SolverConfig, WaveSystem};
use rwlab::harmonics::ModeSet;
use rwlab::observables::{build_gamma, heisenberg_identity_check, static_family, Centering};

fn main() -> rwlab::Result<()> {
    let bg = Background::schwarzschild(1.0)?;
    let modes = ModeSet::new(1, None)?;
    let data =
        BumpData { center: 3.0, width: 1.5, amplitude: 1.0, mode_weights: vec![1.0, 0.5], launch: Launch::Outgoing };
    let mut previous: Option<f64> = None;
    for n in [151, 301, 601] {
        let grid = RadialGrid::new(-30.0, 30.0, n)?;
        let sys = WaveSystem::new(&bg, &modes, grid, false)?;
        let family = static_family(&sys, |m| build_gamma(m, &bg, &grid, 2.0, 1.0, Centering::PerMode))?;
        let config =
            SolverConfig { dt: 0.5 * grid.h(), t_end: 4.0, boundary: Boundary::DirichletTruncation, semilinear: false };
        let report = heisenberg_identity_check(&config, &sys, initial_data_bump(&grid, &data)?, &family, None)?;
        let order =
            previous.map_or(String::new(), |p| format!(", observed order {:.2}", (p / report.max_residual).log2()));
        println!("h = {:.3}: relative residual {:.3e}{order}", grid.h(), report.max_residual);
        previous = Some(report.max_residual);
    }
    Ok(())
}
