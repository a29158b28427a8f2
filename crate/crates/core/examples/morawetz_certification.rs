//! Certifies the Morawetz commutator estimate `[H, gamma] >= c W` mode by
//! mode and scans the multiplier scale `b`.

use rwlab::background::Background;
use rwlab::evolve::RadialGrid;
use rwlab::harmonics::Mode;
use rwlab::observables::{scan_b, Centering, TestSubspace};

fn main() -> rwlab::Result<()> {
    let bg = Background::schwarzschild(1.0)?;
    let grid = RadialGrid::with_spacing(-40.0, 40.0, 0.1)?;
    let modes: Vec<Mode> = [0, 1, 2, 5, 10].into_iter().map(Mode::sphere).collect();
    let report = scan_b(&bg, &modes, &grid, 2.0, &[0.01, 0.05, 0.2], Centering::PerMode, &TestSubspace::default())?;
    for row in &report.rows {
        let cs: Vec<String> = row.modes.iter().map(|m| format!("l={} c={:.2e}", m.l, m.result.c_best)).collect();
        println!(
            "b = {:<5} all certified: {:<5} min/median {:.3}  {}",
            row.b,
            row.all_certified,
            row.uniformity,
            cs.join(", ")
        );
    }
    println!("chosen b: {:?}", report.chosen);
    Ok(())
}
