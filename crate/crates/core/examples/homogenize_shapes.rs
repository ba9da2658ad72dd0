//! Homogenised Rapini-Papoular potential of different particle shapes.
//!
//! `f_hom(Q)` is a surface integral over the particle; for each shape the
//! quadrature is refined until the value settles. The sphere is checked
//! against its closed form.

use nalgebra::Vector3;
use nematic_homog::energies::SurfaceSpec;
use nematic_homog::homogenization::{build_mesh, f_hom, sphere_f_hom_closed_form, ParticleShape, RotationField};
use nematic_homog::qtensor::QTensor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SurfaceSpec::RapiniPapoular { w: 1.0, s_plus: 0.6 };
    let q = QTensor::from_director(&Vector3::new(1.0, 2.0, 2.0).normalize(), 0.5)?;
    let x = Vector3::new(0.5, 0.5, 0.5);
    let rotation = RotationField::Constant { axis: [0.0, 0.0, 1.0], angle: 0.3 };
    let shapes = [
        ParticleShape::Sphere,
        ParticleShape::Ellipsoid { semi_axes: [1.0, 0.6, 0.4] },
        ParticleShape::Cube { half_side: 0.5 },
        ParticleShape::Cylinder { radius: 0.5, half_height: 0.8 },
        ParticleShape::Tetrahedron { circumradius: 1.0 },
    ];
    println!("{:>12} {:>14} {:>14} {:>14}", "shape", "res 2", "res 8", "res 32");
    for shape in shapes {
        let mut vals = Vec::new();
        for res in [2, 8, 32] {
            vals.push(f_hom(&q, &x, &spec, &rotation, &build_mesh(&shape, res)?));
        }
        println!("{:>12} {:>14.10} {:>14.10} {:>14.10}", shape.name(), vals[0], vals[1], vals[2]);
    }
    if let Some(c) = sphere_f_hom_closed_form(&spec, &q) {
        println!("sphere closed form {c:.10}");
    }
    Ok(())
}
