use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::mesh::SurfaceMesh;
use super::rotation::RotationField;
use crate::energies::bulk::{bulk_energy, BulkSpec};
use crate::energies::surface::{surface_energy_and_gradient, surface_energy_unchecked, SurfaceSpec};
use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, rng};
use crate::qtensor::QTensor;

/// Which surface family realises a coefficient shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignVariant {
    Designed,
    Alternative,
    RpDelta,
}

/// Quartic coefficients `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Coefficients {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Coefficients { a, b, c }
    }

    pub fn bulk(&self) -> BulkSpec {
        BulkSpec::quartic(self.a, self.b, self.c)
    }
}

/// Surface energy whose sphere homogenisation turns the host potential
/// `(a, b, c)` into the target `(a′, b′, c′)`. Coefficients are read off
/// directly; [`psi`] on a sphere mesh is the independent check.
pub fn design_surface(host: Coefficients, target: Coefficients, variant: DesignVariant) -> Result<SurfaceSpec> {
    if !(host.c > 0.0 && target.c > 0.0) {
        return Err(Error::gate("surface design", "c > 0, c′ > 0"));
    }
    let (a, b, c) = (host.a, host.b, host.c);
    let (a_prime, b_prime, c_prime) = (target.a, target.b, target.c);
    let spec = match variant {
        DesignVariant::Designed => SurfaceSpec::Designed { a, b, c, a_prime, b_prime, c_prime },
        DesignVariant::Alternative => SurfaceSpec::Alternative { a, b, c, a_prime, b_prime, c_prime },
        DesignVariant::RpDelta => SurfaceSpec::RpDelta { a, b, c, a_prime, b_prime, c_prime, include_constant: false },
    };
    spec.validate()?;
    Ok(spec)
}

/// `Ψ(Q, R) = ∫_{∂P} f_s(Q, Rν) dσ` by the mesh rule.
pub fn psi(q: &QTensor, rot: &Matrix3<f64>, spec: &SurfaceSpec, mesh: &SurfaceMesh) -> f64 {
    let vals: Vec<f64> =
        mesh.facets.iter().map(|f| f.area * surface_energy_unchecked(spec, q, &(rot * f.normal))).collect();
    pairwise_sum(&vals)
}

/// `Ψ` and its `Q`-gradient.
pub fn psi_and_gradient(q: &QTensor, rot: &Matrix3<f64>, spec: &SurfaceSpec, mesh: &SurfaceMesh) -> (f64, QTensor) {
    let mut vals = Vec::with_capacity(mesh.facets.len());
    let mut grad = QTensor::ZERO;
    for f in &mesh.facets {
        let (v, g) = surface_energy_and_gradient(spec, q, &(rot * f.normal));
        vals.push(f.area * v);
        grad += f.area * g;
    }
    (pairwise_sum(&vals), grad)
}

/// Homogenised density `f_hom(Q, x) = Ψ(Q, R(x))`.
pub fn f_hom(q: &QTensor, x: &Vector3<f64>, spec: &SurfaceSpec, field: &RotationField, mesh: &SurfaceMesh) -> f64 {
    psi(q, &field.at(x), spec, mesh)
}

/// Exact `f_hom` of a built-in family on the unit sphere.
pub fn sphere_f_hom_closed_form(spec: &SurfaceSpec, q: &QTensor) -> Option<f64> {
    let inv = q.invariants();
    match *spec {
        SurfaceSpec::Designed { a, b, c, a_prime, b_prime, c_prime }
        | SurfaceSpec::Alternative { a, b, c, a_prime, b_prime, c_prime } => {
            Some((a_prime - a) * inv.i2 - (b_prime - b) * inv.i3 + (c_prime - c) * inv.i2 * inv.i2)
        }
        SurfaceSpec::RpDelta { a, a_prime, .. } => Some((a_prime - a) * inv.i2 + spec.hom_constant()),
        SurfaceSpec::RapiniPapoular { w, s_plus } => Some(4.0 * PI * w * (inv.i2 + 2.0 / 3.0 * s_plus * s_plus)),
        SurfaceSpec::CustomInvariant(_) => None,
    }
}

/// One sampled row of a design verification table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCheckRow {
    pub q: QTensor,
    /// `f_b(host) + f_hom` by quadrature.
    pub homogenised: f64,
    /// `f_b(target)` (plus any reported additive constant).
    pub target: f64,
    pub deviation: f64,
}

/// Compares host bulk plus quadrature `f_hom` with the target bulk on
/// `n` random tensors with `|Q| ≤ max_norm`.
pub fn verify_design(
    host: Coefficients,
    target: Coefficients,
    spec: &SurfaceSpec,
    mesh: &SurfaceMesh,
    n: usize,
    max_norm: f64,
    seed: u64,
) -> Vec<DesignCheckRow> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let q = random_q_in_ball(&mut r, max_norm);
            let homogenised = bulk_energy(&host.bulk(), &q) + psi(&q, &Matrix3::identity(), spec, mesh);
            let target = bulk_energy(&target.bulk(), &q) + spec.hom_constant();
            DesignCheckRow { q, homogenised, target, deviation: (homogenised - target).abs() }
        })
        .collect()
}

/// Random tensor with uniform direction and norm uniform in `[0, max_norm]`.
pub fn random_q_in_ball<R: rand::Rng>(r: &mut R, max_norm: f64) -> QTensor {
    let dir = QTensor::random_with(r, 1.0);
    let len = max_norm * r.gen::<f64>();
    let n = dir.norm();
    if n == 0.0 {
        QTensor::ZERO
    } else {
        (len / n) * dir
    }
}

pub fn write_design_csv<W: Write>(rows: &[DesignCheckRow], mut w: W) -> Result<()> {
    writeln!(w, "q0,q1,q2,q3,q4,homogenised,target,deviation")?;
    for row in rows {
        let c = row.q.0;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            c[0], c[1], c[2], c[3], c[4], row.homogenised, row.target, row.deviation
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogenization::mesh::build_mesh;
    use crate::homogenization::shape::ParticleShape;
    use crate::qtensor::{random_orthogonal, random_rotation};
    use rand::Rng;

    fn sphere() -> SurfaceMesh {
        build_mesh(&ParticleShape::Sphere, 4).unwrap()
    }

    #[test]
    fn design_examples() {
        let host = Coefficients::new(-1.0, 1.0, 1.0);
        let zero = design_surface(host, host, DesignVariant::Designed).unwrap();
        assert_eq!(zero.poly().unwrap(), Default::default());
        let spec = design_surface(host, Coefficients::new(1.0, 1.0, 1.0), DesignVariant::Designed).unwrap();
        let c = spec.poly().unwrap();
        assert!((c.k_r - 3.0 / (2.0 * PI)).abs() < 1e-15 && c.k_pr == 0.0 && c.k_rr == 0.0);
        assert!(matches!(
            design_surface(host, Coefficients::new(1.0, 1.0, 0.0), DesignVariant::Designed),
            Err(Error::Gate { inequality, .. }) if inequality == "c > 0, c′ > 0"
        ));
        assert!(design_surface(host, Coefficients::new(1.0, 2.0, 1.0), DesignVariant::RpDelta).is_err());
    }

    #[test]
    fn roundtrip_on_sphere() {
        let mesh = sphere();
        let mut r = rng(4);
        for _ in 0..20 {
            let host = Coefficients::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(0.1..2.0));
            let target = Coefficients::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(0.1..2.0));
            for variant in [DesignVariant::Designed, DesignVariant::Alternative] {
                let spec = design_surface(host, target, variant).unwrap();
                for row in verify_design(host, target, &spec, &mesh, 30, 2.0, 9) {
                    assert!(row.deviation < 1e-9, "{row:?}");
                }
            }
        }
        let host = Coefficients::new(-1.0, 1.0, 1.0);
        let target = Coefficients::new(0.5, 1.0, 1.0);
        let spec = SurfaceSpec::RpDelta {
            a: -1.0,
            b: 1.0,
            c: 1.0,
            a_prime: 0.5,
            b_prime: 1.0,
            c_prime: 1.0,
            include_constant: true,
        };
        for row in verify_design(host, target, &spec, &mesh, 30, 2.0, 9) {
            assert!(row.deviation < 1e-9);
        }
        assert!((spec.hom_constant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn variants_agree_on_sphere_but_not_pointwise() {
        let mesh = sphere();
        let host = Coefficients::new(-1.0, 1.0, 1.0);
        let target = Coefficients::new(0.3, 0.2, 2.0);
        let d = design_surface(host, target, DesignVariant::Designed).unwrap();
        let a = design_surface(host, target, DesignVariant::Alternative).unwrap();
        let q = QTensor::random(5, 1.0);
        let (pd, pa) = (psi(&q, &Matrix3::identity(), &d, &mesh), psi(&q, &Matrix3::identity(), &a, &mesh));
        assert!((pd - pa).abs() < 1e-10);
        let nu = Vector3::new(0.0, 0.6, 0.8);
        assert!((surface_energy_unchecked(&d, &q, &nu) - surface_energy_unchecked(&a, &q, &nu)).abs() > 1e-3);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let mesh = sphere();
        let specs = [
            SurfaceSpec::RapiniPapoular { w: 1.3, s_plus: 0.6 },
            SurfaceSpec::Designed { a: -1.0, b: 1.0, c: 1.0, a_prime: 0.2, b_prime: -0.5, c_prime: 3.0 },
            SurfaceSpec::RpDelta {
                a: -1.0,
                b: 1.0,
                c: 1.0,
                a_prime: 0.2,
                b_prime: 1.0,
                c_prime: 1.0,
                include_constant: false,
            },
        ];
        for spec in &specs {
            let q = QTensor::random(8, 1.0);
            let quad = psi(&q, &Matrix3::identity(), spec, &mesh);
            assert!((quad - sphere_f_hom_closed_form(spec, &q).unwrap()).abs() < 1e-10, "{spec:?}");
        }
        assert_eq!(psi(&QTensor::random(1, 1.0), &Matrix3::identity(), &SurfaceSpec::zero(), &mesh), 0.0);
    }

    #[test]
    fn sphere_is_rotation_blind_and_equivariant() {
        let mesh = sphere();
        let spec = SurfaceSpec::Designed { a: -1.0, b: 1.0, c: 1.0, a_prime: 0.2, b_prime: -0.5, c_prime: 3.0 };
        let mut r = rng(3);
        for _ in 0..10 {
            let q = QTensor::random_with(&mut r, 1.0);
            let rot = random_rotation(&mut r);
            let base = psi(&q, &Matrix3::identity(), &spec, &mesh);
            assert!((psi(&q, &rot, &spec, &mesh) - base).abs() < 1e-8);
            let u = random_orthogonal(&mut r, true);
            assert!((psi(&q.conjugate(&u), &(u * rot), &spec, &mesh) - psi(&q, &rot, &spec, &mesh)).abs() < 1e-8);
        }
    }

    #[test]
    fn cube_is_anisotropic() {
        let mesh = build_mesh(&ParticleShape::Cube { half_side: 1.0 }, 4).unwrap();
        let spec = SurfaceSpec::Designed { a: -1.0, b: 1.0, c: 1.0, a_prime: 0.2, b_prime: -0.5, c_prime: 3.0 };
        let q = QTensor::from_director(&Vector3::x(), 1.0).unwrap();
        let u = random_rotation(&mut rng(12));
        let v1 = psi(&q, &Matrix3::identity(), &spec, &mesh);
        let v2 = psi(&q.conjugate(&u), &Matrix3::identity(), &spec, &mesh);
        assert!((v1 - v2).abs() > 1e-3, "{v1} {v2}");
    }

    #[test]
    fn f_hom_is_lipschitz_in_x_and_quartic() {
        let mesh = build_mesh(&ParticleShape::Ellipsoid { semi_axes: [1.0, 0.5, 0.8] }, 4).unwrap();
        let spec = SurfaceSpec::Designed { a: -1.0, b: 1.0, c: 1.0, a_prime: 0.2, b_prime: -0.5, c_prime: 3.0 };
        let field = RotationField::Twist { axis: [0.0, 1.0, 0.3], angle0: 0.0, gradient: [1.0, 0.5, -0.2] };
        let mut r = rng(6);
        let q = QTensor::random(2, 1.0);
        let mut lip: f64 = 0.0;
        for _ in 0..200 {
            let x = Vector3::new(r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>());
            let y = x + Vector3::new(r.gen_range(-1e-2..1e-2), r.gen_range(-1e-2..1e-2), r.gen_range(-1e-2..1e-2));
            let d = (f_hom(&q, &x, &spec, &field, &mesh) - f_hom(&q, &y, &spec, &field, &mesh)).abs();
            lip = lip.max(d / (x - y).norm());
        }
        assert!(lip.is_finite() && lip < 100.0);
        for k in 0..20 {
            let big = (1.0 + k as f64) * QTensor::random(k, 1.0);
            let v = f_hom(&big, &Vector3::zeros(), &spec, &field, &mesh).abs();
            assert!(v <= 50.0 * (big.norm().powi(4) + 1.0));
        }
    }

    #[test]
    fn psi_gradient_matches_finite_differences() {
        let mesh = build_mesh(&ParticleShape::Cylinder { radius: 0.5, half_height: 1.0 }, 3).unwrap();
        let spec = SurfaceSpec::Alternative { a: -1.0, b: 1.0, c: 1.0, a_prime: 0.2, b_prime: -0.5, c_prime: 3.0 };
        let rot = random_rotation(&mut rng(1));
        let q = QTensor::random(3, 1.0);
        let p = QTensor::random(4, 1.0);
        let (_, g) = psi_and_gradient(&q, &rot, &spec, &mesh);
        let h = 1e-5;
        let fd = (psi(&(q + h * p), &rot, &spec, &mesh) - psi(&(q - h * p), &rot, &spec, &mesh)) / (2.0 * h);
        assert!((fd - g.dot(&p)).abs() < 1e-6 * fd.abs().max(1.0));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn design_roundtrip_for_admissible_coefficients(
            host in proptest::array::uniform3(-2.0f64..2.0), target in proptest::array::uniform3(-2.0f64..2.0),
            seed in 0u64..1000,
        ) {
            let mesh = sphere();
            let host = Coefficients::new(host[0], host[1], host[2].abs() + 0.05);
            let target = Coefficients::new(target[0], target[1], target[2].abs() + 0.05);
            for variant in [DesignVariant::Designed, DesignVariant::Alternative] {
                let spec = design_surface(host, target, variant).unwrap();
                for row in verify_design(host, target, &spec, &mesh, 20, 2.0, seed) {
                    proptest::prop_assert!(row.deviation < 1e-9, "{row:?}");
                }
            }
        }

        #[test]
        fn psi_on_the_sphere_is_conjugation_invariant(seed in 0u64..100_000) {
            let mesh = sphere();
            let spec = SurfaceSpec::Alternative { a: -1.0, b: 1.0, c: 1.0, a_prime: 0.2, b_prime: -0.5, c_prime: 3.0 };
            let mut r = rng(seed);
            let q = QTensor::random_with(&mut r, 1.0);
            let rot = random_rotation(&mut r);
            let u = random_orthogonal(&mut r, true);
            let a = psi(&q, &rot, &spec, &mesh);
            let b = psi(&q.conjugate(&u), &(u * rot), &spec, &mesh);
            proptest::prop_assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
    }
}
