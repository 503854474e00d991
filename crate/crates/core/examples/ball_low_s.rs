//! Below the dimension minus two the optimum collapses.
//!
//! On the closed unit ball of R³ with `s = 1` the potential of a point
//! charge is superharmonic, so all `N` points sit at the center and
//! `M¹_N = N`, attained on the boundary sphere.

use rieszpol::geometry::SetDescriptor;
use rieszpol::polarization::{solve, SolveOptions, Strategy};

fn main() -> rieszpol::Result<()> {
    let ball = SetDescriptor::ball(3);
    let opts = SolveOptions::default().with_seed(3).with_restarts(8);
    for n in [2, 4, 8] {
        let r = solve(&ball, n, 1.0, Strategy::SmoothedAscent, &opts)?;
        let spread = r
            .config
            .points()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        println!(
            "N={n}: value {:.9} (expected {n}), farthest point from center {spread:.2e}, witness {:?}",
            r.value.to_f64(),
            r.witness
        );
    }
    Ok(())
}
