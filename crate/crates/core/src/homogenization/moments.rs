use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::mesh::{build_mesh_with, SphereMeshKind, SurfaceMesh};
use super::shape::ParticleShape;
use crate::error::Result;
use crate::numerics::loglog_slope;
use crate::qtensor::QTensor;

/// `∫_{S²} ν₁⁴ dν`
pub const C31: f64 = 4.0 * PI / 5.0;
/// `∫_{S²} ν₁²ν₂² dν`
pub const C32: f64 = 4.0 * PI / 15.0;

/// Sphere integrals of polynomial invariants with known closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    /// `∫ ν·Q²ν`
    Q2,
    /// `∫ (ν·Qν)(ν·Q²ν)`
    QQ2,
    /// `∫ (ν·Q²ν)²`
    Q2sq,
    /// `∫ (ν·Qν)²`
    Qsq,
    /// `∫ ν·Qν`
    Qnu,
}

impl MomentKind {
    pub const ALL: [MomentKind; 5] =
        [MomentKind::Q2, MomentKind::QQ2, MomentKind::Q2sq, MomentKind::Qsq, MomentKind::Qnu];

    pub fn name(&self) -> &'static str {
        match self {
            MomentKind::Q2 => "Q2",
            MomentKind::QQ2 => "QQ2",
            MomentKind::Q2sq => "Q2sq",
            MomentKind::Qsq => "Qsq",
            MomentKind::Qnu => "Qnu",
        }
    }

    /// Homogeneity degree in `Q`.
    pub fn degree(&self) -> i32 {
        match self {
            MomentKind::Q2 | MomentKind::Qsq => 2,
            MomentKind::QQ2 => 3,
            MomentKind::Q2sq => 4,
            MomentKind::Qnu => 1,
        }
    }

    pub fn integrand(&self, q: &QTensor, nu: &Vector3<f64>) -> f64 {
        let qn = q.matrix() * nu;
        let p = nu.dot(&qn);
        let r = qn.norm_squared();
        match self {
            MomentKind::Q2 => r,
            MomentKind::QQ2 => p * r,
            MomentKind::Q2sq => r * r,
            MomentKind::Qsq => p * p,
            MomentKind::Qnu => p,
        }
    }
}

/// Closed-form value of the sphere moment.
pub fn sphere_moment(kind: MomentKind, q: &QTensor) -> f64 {
    let inv = q.invariants();
    match kind {
        MomentKind::Q2 => 4.0 * PI / 3.0 * inv.i2,
        MomentKind::QQ2 => 8.0 * PI / 15.0 * inv.i3,
        MomentKind::Q2sq => 8.0 * PI / 15.0 * inv.i2 * inv.i2,
        MomentKind::Qsq => 8.0 * PI / 15.0 * inv.i2,
        MomentKind::Qnu => 0.0,
    }
}

pub fn sphere_moment_quadrature(kind: MomentKind, q: &QTensor, mesh: &SurfaceMesh) -> f64 {
    mesh.integrate(|_, nu| kind.integrand(q, nu))
}

/// Quadratures of `ν₁⁴` and `ν₁²ν₂²` on a sphere mesh.
pub fn appendix_constants(mesh: &SurfaceMesh) -> (f64, f64) {
    (mesh.integrate(|_, n| n.x.powi(4)), mesh.integrate(|_, n| n.x * n.x * n.y * n.y))
}

/// One moment across a resolution ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub kind: MomentKind,
    pub closed_form: f64,
    pub resolutions: Vec<usize>,
    pub quadrature: Vec<f64>,
    pub errors: Vec<f64>,
    /// Fitted order `−d log(err)/d log(r)`; `None` when every error is at
    /// roundoff level (the rule is exact for the integrand).
    pub order: Option<f64>,
}

/// Moments of `q` against the closed forms over a resolution ladder.
pub fn identity_ladder(q: &QTensor, resolutions: &[usize], kind: SphereMeshKind) -> Result<Vec<LadderRow>> {
    let meshes: Vec<SurfaceMesh> =
        resolutions.iter().map(|&r| build_mesh_with(&ParticleShape::Sphere, r, kind)).collect::<Result<_>>()?;
    Ok(MomentKind::ALL
        .iter()
        .map(|&k| {
            let closed = sphere_moment(k, q);
            let quad: Vec<f64> = meshes.iter().map(|m| sphere_moment_quadrature(k, q, m)).collect();
            let errors: Vec<f64> = quad.iter().map(|v| (v - closed).abs()).collect();
            let floor = 1e-12 * (4.0 * PI) * q.norm().powi(k.degree()).max(f64::MIN_POSITIVE);
            let order = if errors.iter().all(|&e| e > floor) && errors.len() >= 2 {
                let rs: Vec<f64> = resolutions.iter().map(|&r| r as f64).collect();
                Some(-loglog_slope(&rs, &errors))
            } else {
                None
            };
            LadderRow {
                kind: k,
                closed_form: closed,
                resolutions: resolutions.to_vec(),
                quadrature: quad,
                errors,
                order,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogenization::mesh::build_mesh;
    use nalgebra::Vector3;

    #[test]
    fn closed_form_examples() {
        let q = QTensor::from_director(&Vector3::x(), 1.0).unwrap();
        assert!((sphere_moment(MomentKind::Q2, &q) - 8.0 * PI / 9.0).abs() < 1e-14);
        assert_eq!(sphere_moment(MomentKind::Qnu, &QTensor::random(3, 1.0)), 0.0);
    }

    #[test]
    fn icosphere_is_exact_for_low_degree() {
        let mesh = build_mesh(&ParticleShape::Sphere, 3).unwrap();
        for seed in 0..20 {
            let q = QTensor::random(seed, 1.0);
            for k in MomentKind::ALL {
                let d = (sphere_moment_quadrature(k, &q, &mesh) - sphere_moment(k, &q)).abs();
                assert!(d < 1e-12, "{k:?} {d}");
            }
        }
        let (c31, c32) = appendix_constants(&mesh);
        assert!((c31 - C31).abs() < 1e-12 && (c32 - C32).abs() < 1e-12);
    }

    #[test]
    fn cube_sphere_converges_at_second_order() {
        let q = QTensor::random(11, 1.0);
        let rows = identity_ladder(&q, &[8, 16, 32], SphereMeshKind::CubeSphere).unwrap();
        for row in rows {
            match row.kind {
                MomentKind::Q2 | MomentKind::Qnu => assert!(row.order.is_none(), "{row:?}"),
                _ => {
                    let o = row.order.unwrap();
                    assert!((o - 2.0).abs() < 0.3, "{:?} {o}", row.kind);
                }
            }
        }
    }
}
