//! The Riesz integral outside a ball and its covering-density bound.

use rieszpol::analysis::{lemma_bound_check, lemma_suite, riesz_integral, Domain};
use rieszpol::geometry::{SetDescriptor, TestCell};

fn main() -> rieszpol::Result<()> {
    let circle = SetDescriptor::unit_circle();
    let y = [1.0, 0.0];
    for radius in [2.0, 1.0, 0.2, 0.01] {
        let q = riesz_integral(Domain::Set(&circle), &y, radius)?;
        println!("circle R={radius:<5} integral {:.9} ({} panels)", q.value, q.panels);
    }
    let c = lemma_bound_check(Domain::Set(&circle), &y, 0.2, 1.0)?;
    println!("R=0.2 r=1: {:.6} <= {:.6}", c.lhs, c.rhs);

    let sphere = SetDescriptor::sphere(2);
    let pole = [0.0, 0.0, 1.0];
    let cap = TestCell::cap(&sphere, &pole, 0.8)?;
    let c = lemma_bound_check(Domain::Cell(&sphere, &cap), &pole, 0.05, 0.5)?;
    println!("polar cap: {:.6} <= {:.6} (alpha {:.4})", c.lhs, c.rhs, c.alpha);

    let suite = lemma_suite(200, 7)?;
    println!("random suite: {}/{} hold, quadrature converged: {}", suite.holding, suite.total, suite.all_converged);
    Ok(())
}
