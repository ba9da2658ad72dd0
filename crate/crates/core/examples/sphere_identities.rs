//! Closed-form sphere moments against quadrature, and the two appendix
//! constants `∫ν₁⁴ = 4π/5`, `∫ν₁²ν₂² = 4π/15`.
//!
//! On the cube-sphere ladder the degree-4 moments converge at second order;
//! the degree-2 moment is integrated exactly.

use nematic_homog::homogenization::{
    appendix_constants, build_mesh, identity_ladder, ParticleShape, SphereMeshKind, C31, C32,
};
use nematic_homog::qtensor::QTensor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = QTensor::random(4, 0.9);
    let ladder = [16, 32, 64, 128];
    println!("Q = {:?}", q.0);
    for row in identity_ladder(&q, &ladder, SphereMeshKind::CubeSphere)? {
        let errs: Vec<String> = row.errors.iter().map(|e| format!("{e:.2e}")).collect();
        let order = row.order.map_or("exact".to_string(), |o| format!("{o:.3}"));
        println!(
            "{:>5}  closed {:>10.6}  errors [{}]  order {order}",
            row.kind.name(),
            row.closed_form,
            errs.join(", ")
        );
    }
    let mesh = build_mesh(&ParticleShape::Sphere, 8)?;
    let (c31, c32) = appendix_constants(&mesh);
    println!("c31 = {c31:.12} (4pi/5 = {C31:.12})");
    println!("c32 = {c32:.12} (4pi/15 = {C32:.12})");
    Ok(())
}
