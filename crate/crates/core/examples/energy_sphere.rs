//! Minimal Coulomb energy on S² and the polarization–energy inequality.

use rieszpol::energy::{circle_inequality, minimize, EnergyOptions};
use rieszpol::geometry::SetDescriptor;

fn main() -> rieszpol::Result<()> {
    let sphere = SetDescriptor::sphere(2);
    let opts = EnergyOptions::default().with_seed(5).with_restarts(4);
    // known optima: tetrahedron, octahedron, icosahedron
    for (n, known) in [(4, 3.674234614), (6, 9.985281374), (12, 49.165253058)] {
        let r = minimize(&sphere, n, 1.0, &opts)?;
        // ordered pairs, so twice the usual sum over unordered pairs
        println!("N={n:>2}: energy {:.9}, known {:.9}, iterations {}", r.energy / 2.0, known, r.iterations);
    }

    println!("\nM^s_N >= E_s(N)/(N-1) on the circle");
    for s in [1.0, 2.0] {
        for n in [2, 5, 12] {
            let c = circle_inequality(n, s)?;
            println!("s={s} N={n:>2}: {:.6} >= {:.6} holds={}", c.lhs, c.rhs, c.holds);
        }
    }
    Ok(())
}
