//! Checks the nine structural conditions on several backgrounds.
//!
//! The unit quadratic warp fails the trapping-term condition (its `2V + r_*V'`
//! is positive everywhere); `r = (1 + r_*^2)^(5/8)` satisfies all nine with
//! the semilinear exponent 2.9.

use rwlab::background::{check_conditions, Background, ConditionStatus, ScanDomain, Warp};

fn main() -> rwlab::Result<()> {
    let scan = ScanDomain::new(-150.0, 150.0, 30001)?;
    let cases = [
        ("Schwarzschild, linear", Background::schwarzschild(1.0)?),
        ("Schwarzschild, p = 2.9", Background::schwarzschild(1.0)?.with_nonlinearity(2.9)?),
        ("r = 1 + r_*^2, p = 2.9", Background::warped(Warp::unit_quadratic())?.with_nonlinearity(2.9)?),
        (
            "r = (1 + r_*^2)^(5/8), p = 2.9",
            Background::warped(Warp::Power { s: 1.0, k: 0.625 })?.with_nonlinearity(2.9)?,
        ),
    ];
    for (name, bg) in cases {
        let report = check_conditions(&bg, &scan);
        let marks: String = report
            .outcomes
            .iter()
            .map(|o| match o.status {
                ConditionStatus::Pass => '+',
                ConditionStatus::Fail => 'x',
                ConditionStatus::NotApplicable => '.',
            })
            .collect();
        println!("{name:<32} {marks}");
        for f in report.failures() {
            let at = f.witness.map_or(String::new(), |w| format!(" at r_* = {w:.3}"));
            println!("    condition {}{at}: {}", f.condition, f.detail);
        }
    }
    Ok(())
}
