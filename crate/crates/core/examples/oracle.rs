//! Exhaustive grid maximin against the grid solver.

use rieszpol::geometry::SetDescriptor;
use rieszpol::polarization::{oracle_solve, solve_on_grid, SolveOptions, Strategy};

fn main() -> rieszpol::Result<()> {
    let circle = SetDescriptor::unit_circle();
    let opts = SolveOptions::default().with_seed(2).with_restarts(8);
    for size in [12, 24] {
        let grid = circle.sample_points(size);
        for n in 1..=3 {
            for s in [1.0, 2.0] {
                let exact = oracle_solve(&grid, n, s)?;
                let found = solve_on_grid(&grid, n, s, Strategy::Exchange, &opts)?;
                println!(
                    "|G|={size} N={n} s={s}: oracle {:.12} solver {:.12}",
                    exact.value.to_f64(),
                    found.value.to_f64()
                );
            }
        }
    }
    Ok(())
}
