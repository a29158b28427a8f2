//! Effective potentials `V + l(l+1) V_L` and their peaks on Schwarzschild
//! and on a warped product.

use rwlab::background::{schwarzschild_peak_radius, Background, ScanDomain, Warp};

fn main() -> rwlab::Result<()> {
    let scan = ScanDomain::new(-40.0, 40.0, 8001)?;

    let bh = Background::schwarzschild(1.0)?;
    println!("Schwarzschild M = 1");
    println!("{:>3} {:>12} {:>12} {:>12}", "l", "r_peak", "closed form", "r_*");
    for l in [0usize, 1, 2, 5, 10, 20] {
        let lt2 = (l * (l + 1)) as f64;
        let peak = bh.effective_potential_peak(lt2, &scan)?;
        println!(
            "{l:>3} {:>12.6} {:>12.6} {:>12.6}",
            peak.area_radius,
            schwarzschild_peak_radius(lt2, 1.0),
            peak.tortoise
        );
    }
    let photon = bh.asymptotic_peak(&scan)?;
    println!("l -> infinity: r = {:.6} (photon sphere 3M)", photon.area_radius);

    let warped = Background::warped(Warp::unit_quadratic())?;
    println!("\nwarp r = 1 + r_*^2: potentials at a few points");
    for x in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let s = warped.potentials(x)?;
        println!("r_* = {x:>4}: V = {:.4e}, V_L = {:.4e}, 2V + r_*V' = {:.4e}", s.v, s.v_l, s.trap_v);
    }
    Ok(())
}
