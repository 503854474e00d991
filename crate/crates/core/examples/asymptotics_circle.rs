//! Ratio tables `M^d_N/(N ln N)` and the `a + b/ln N` fit.
//!
//! The circle uses the closed form up to large `N`; the sphere uses the
//! solver at small `N`, whose values are lower bounds.

use rieszpol::asymptotics::{emit_plotdata, lower_bound_report, polarization_ratio_table, to_csv, RatioSource};
use rieszpol::geometry::SetDescriptor;
use rieszpol::polarization::{SolveOptions, Strategy};

fn main() -> rieszpol::Result<()> {
    let circle = SetDescriptor::unit_circle();
    let ns: Vec<usize> = (6..=13).map(|k| 1 << k).collect();
    let table = polarization_ratio_table(&circle, &ns, &RatioSource::AnalyticCircle)?;
    print!("{}", to_csv(&table, &circle, 0));
    println!("limit 1/pi = {:.6}", 1.0 / std::f64::consts::PI);
    print!("\n{}", emit_plotdata(&table)?);

    let sphere = SetDescriptor::sphere(2);
    let source = RatioSource::Solver {
        strategy: Strategy::SmoothedAscent,
        opts: SolveOptions::default().with_seed(1).with_restarts(1),
    };
    let table = polarization_ratio_table(&sphere, &[16, 32, 64], &source)?;
    let report = lower_bound_report(&table);
    println!("\nsphere: {:?}", report.status);
    for row in &table.rows {
        println!("N={:>3} ratio {:.5}", row.n, row.ratio);
    }
    Ok(())
}
