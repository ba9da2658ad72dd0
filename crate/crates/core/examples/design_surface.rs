//! Design surface anchoring energies that move a quartic bulk potential.
//!
//! For each design family the homogenised potential of unit spheres is
//! added to the host bulk and compared with the target on random tensors.
//! A target with `c′ ≤ 0` is refused by the design gate.

use nematic_homog::homogenization::{
    build_mesh, design_surface, verify_design, Coefficients, DesignVariant, ParticleShape,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let host = Coefficients::new(-1.0, 1.0, 1.0);
    let mesh = build_mesh(&ParticleShape::Sphere, 2)?;
    for (variant, target) in [
        (DesignVariant::Designed, Coefficients::new(-0.5, 0.7, 1.3)),
        (DesignVariant::Alternative, Coefficients::new(-0.5, 0.7, 1.3)),
        (DesignVariant::RpDelta, Coefficients::new(0.25, 1.0, 1.0)),
    ] {
        let spec = design_surface(host, target, variant)?;
        let rows = verify_design(host, target, &spec, &mesh, 100, 2.0, 1);
        let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
        println!("{variant:?}: max |host + f_hom - target| = {worst:.2e}");
        println!("  {}", serde_json::to_string(&spec)?);
    }
    match design_surface(host, Coefficients::new(-0.5, 1.0, -0.2), DesignVariant::Designed) {
        Err(e) => println!("c' = -0.2 refused: {e}"),
        Ok(_) => println!("c' = -0.2 unexpectedly accepted"),
    }
    Ok(())
}
