//! Polarization on the unit circle against the closed form.
//!
//! For `s = 2` the optimum is `N` equally spaced points with value `N²/4`.

use rieszpol::geometry::SetDescriptor;
use rieszpol::polarization::{angular_gaps, equally_spaced_value, solve, SolveOptions, Strategy};

fn main() -> rieszpol::Result<()> {
    let circle = SetDescriptor::unit_circle();
    let opts = SolveOptions::default().with_seed(42).with_restarts(8);
    println!("{:>3} {:>12} {:>12} {:>10}", "N", "found", "closed form", "max gap err");
    for n in 2..=8 {
        let r = solve(&circle, n, 2.0, Strategy::SmoothedAscent, &opts)?;
        let ideal = std::f64::consts::TAU / n as f64;
        let gap_err = angular_gaps(&r.config.to_points())
            .iter()
            .map(|g| (g - ideal).abs())
            .fold(0.0, f64::max);
        println!("{n:>3} {:>12.8} {:>12.8} {gap_err:>10.2e}", r.value.to_f64(), equally_spaced_value(n, 2.0));
    }
    Ok(())
}
