//! Covering density `ᾱ_d(A; ε)` as `ε` shrinks.

use rieszpol::analysis::{alpha, alpha_limit_check};
use rieszpol::geometry::{SetDescriptor, SetSpec};

fn main() -> rieszpol::Result<()> {
    let circle = SetDescriptor::unit_circle();
    for eps in [2.0, 1.0, 0.5, 0.1, 0.01] {
        let a = alpha(&circle, eps, 64, 64)?;
        println!("circle eps={eps:<5} alpha={:.8}", a.value);
    }

    let sphere = SetDescriptor::sphere(2);
    println!("sphere eps=0.3   alpha={:.8}", alpha(&sphere, 0.3, 64, 64)?.value);

    // circles touching at the origin: small balls there see both circles
    let tangent = SetDescriptor::new(SetSpec::union(vec![
        SetSpec::circle(1.0).with_center(vec![-1.0, 0.0]),
        SetSpec::circle(1.0).with_center(vec![1.0, 0.0]),
    ]))?;
    let schedule = [0.5, 0.1, 0.01];
    let near = alpha_limit_check(&tangent, &schedule, None)?;
    let away = alpha_limit_check(&tangent, &schedule, Some(0.2))?;
    println!("tangent circles, all centers: {:.4} passes={}", near.limsup_estimate, near.passes);
    println!("tangent circles, away from the contact: {:.6} passes={}", away.limsup_estimate, away.passes);
    Ok(())
}
