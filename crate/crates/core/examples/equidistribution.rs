//! Counting measures of optimal configurations against normalized measure.

use rieszpol::analysis::{empirical_counts, equidistribution_report};
use rieszpol::geometry::{make_test_cells, CellFamily, SetDescriptor};
use rieszpol::polarization::{solve, SolveOptions, Strategy};

fn main() -> rieszpol::Result<()> {
    let opts = SolveOptions::default().with_seed(11).with_restarts(1);

    let two = SetDescriptor::two_circles(3.0)?;
    let parts = make_test_cells(&two, CellFamily::Parts, 0)?;
    for n in [32, 64] {
        let r = solve(&two, n, 1.0, Strategy::SmoothedAscent, &opts)?;
        let c = empirical_counts(&two, &r.config, &parts);
        println!("two circles N={n}: fractions {:.3} / {:.3}", c.rows[0].fraction, c.rows[1].fraction);
    }

    let sphere = SetDescriptor::sphere(2);
    let caps = make_test_cells(&sphere, CellFamily::RandomCaps { count: 100 }, 4)?;
    let sequence = [16, 32, 64]
        .iter()
        .map(|&n| solve(&sphere, n, 2.0, Strategy::SmoothedAscent, &opts).map(|r| (r.config, Some(r.value.to_f64()))))
        .collect::<rieszpol::Result<Vec<_>>>()?;
    let report = equidistribution_report(&sphere, &sequence, &caps);
    for row in &report.rows {
        println!(
            "sphere N={:>3}: max cap deviation {:.4}, value/(N ln N/4) {:.4}",
            row.n,
            row.max_deviation,
            row.value_ratio.unwrap_or(f64::NAN)
        );
    }
    println!("deviation trend decreasing: {}", report.decreasing);
    Ok(())
}
