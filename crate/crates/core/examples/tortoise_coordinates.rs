//! Tortoise coordinate on the Schwarzschild exterior and its inverse.
//!
//! Near the horizon the area radius `r` rounds to `2M` in double precision,
//! so the inverse is also exposed through the horizon distance `r - 2M`.

use rwlab::background::{
    area_radius_from_tortoise, horizon_distance_from_tortoise, tortoise_from_area_radius,
    tortoise_from_horizon_distance,
};

fn main() -> rwlab::Result<()> {
    let mass = 1.0;
    println!("{:>10} {:>14} {:>14}", "r/M", "r_*", "round trip");
    for r in [2.001, 2.1, 3.0, 6.0, 10.0, 100.0, 1e4] {
        let x = tortoise_from_area_radius(r, mass)?;
        let back = area_radius_from_tortoise(x, mass)?;
        println!("{r:>10} {x:>14.6} {:>14.2e}", (back - r).abs());
    }

    println!("\ndeep near-horizon region through delta = r - 2M:");
    for x in [-50.0, -200.0, -700.0] {
        let delta = horizon_distance_from_tortoise(x, mass)?;
        let back = tortoise_from_horizon_distance(delta, mass)?;
        println!("r_* = {x:>7}: delta = {delta:.6e}, round trip error {:.2e}", (back - x).abs());
    }
    Ok(())
}
