use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference particle: a convex body centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParticleShape {
    /// Unit ball.
    Sphere,
    Ellipsoid {
        semi_axes: [f64; 3],
    },
    /// Axis-aligned cube `[-h, h]³`.
    Cube {
        half_side: f64,
    },
    /// Cylinder with axis `e₃`.
    Cylinder {
        radius: f64,
        half_height: f64,
    },
    /// Regular tetrahedron with the given circumradius and centroid at the
    /// origin. One vertex points along `(1, 1, 1)`.
    Tetrahedron {
        circumradius: f64,
    },
}

impl ParticleShape {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ParticleShape::Sphere => true,
            ParticleShape::Ellipsoid { semi_axes } => semi_axes.iter().all(|&s| s > 0.0 && s.is_finite()),
            ParticleShape::Cube { half_side } => half_side > 0.0 && half_side.is_finite(),
            ParticleShape::Cylinder { radius, half_height } => {
                radius > 0.0 && half_height > 0.0 && radius.is_finite() && half_height.is_finite()
            }
            ParticleShape::Tetrahedron { circumradius } => circumradius > 0.0 && circumradius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("degenerate shape parameters: {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ParticleShape::Sphere => "sphere",
            ParticleShape::Ellipsoid { .. } => "ellipsoid",
            ParticleShape::Cube { .. } => "cube",
            ParticleShape::Cylinder { .. } => "cylinder",
            ParticleShape::Tetrahedron { .. } => "tetrahedron",
        }
    }

    /// Exact volume.
    pub fn volume(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            ParticleShape::Sphere => 4.0 * PI / 3.0,
            ParticleShape::Ellipsoid { semi_axes: [a, b, c] } => 4.0 * PI / 3.0 * a * b * c,
            ParticleShape::Cube { half_side } => 8.0 * half_side.powi(3),
            ParticleShape::Cylinder { radius, half_height } => 2.0 * PI * radius * radius * half_height,
            ParticleShape::Tetrahedron { circumradius } => {
                let edge = circumradius * (8.0f64 / 3.0).sqrt();
                edge.powi(3) / (6.0 * 2f64.sqrt())
            }
        }
    }

    /// Radius of the smallest origin-centred ball containing the body.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            ParticleShape::Sphere => 1.0,
            ParticleShape::Ellipsoid { semi_axes } => semi_axes.iter().copied().fold(0.0, f64::max),
            ParticleShape::Cube { half_side } => half_side * 3f64.sqrt(),
            ParticleShape::Cylinder { radius, half_height } => radius.hypot(half_height),
            ParticleShape::Tetrahedron { circumradius } => circumradius,
        }
    }

    /// Radius of the largest origin-centred ball inside the body.
    pub fn inner_radius(&self) -> f64 {
        match *self {
            ParticleShape::Sphere => 1.0,
            ParticleShape::Ellipsoid { semi_axes } => semi_axes.iter().copied().fold(f64::INFINITY, f64::min),
            ParticleShape::Cube { half_side } => half_side,
            ParticleShape::Cylinder { radius, half_height } => radius.min(half_height),
            ParticleShape::Tetrahedron { circumradius } => circumradius / 3.0,
        }
    }

    /// Analytic membership test for the closed body.
    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        match *self {
            ParticleShape::Sphere => x.norm_squared() <= 1.0,
            ParticleShape::Ellipsoid { semi_axes: [a, b, c] } => {
                (x.x / a).powi(2) + (x.y / b).powi(2) + (x.z / c).powi(2) <= 1.0
            }
            ParticleShape::Cube { half_side } => x.amax() <= half_side,
            ParticleShape::Cylinder { radius, half_height } => {
                x.x * x.x + x.y * x.y <= radius * radius && x.z.abs() <= half_height
            }
            ParticleShape::Tetrahedron { circumradius } => {
                tetra_outward_normals().iter().all(|n| n.dot(x) <= circumradius / 3.0)
            }
        }
    }

    /// Distance from the origin to the boundary along the unit direction `w`.
    pub fn radial_function(&self, w: &Vector3<f64>) -> f64 {
        match *self {
            ParticleShape::Sphere => 1.0,
            ParticleShape::Ellipsoid { semi_axes: [a, b, c] } => {
                1.0 / ((w.x / a).powi(2) + (w.y / b).powi(2) + (w.z / c).powi(2)).sqrt()
            }
            ParticleShape::Cube { half_side } => half_side / w.amax(),
            ParticleShape::Cylinder { radius, half_height } => {
                let rho = w.x.hypot(w.y);
                let side = if rho > 0.0 { radius / rho } else { f64::INFINITY };
                let cap = if w.z != 0.0 { half_height / w.z.abs() } else { f64::INFINITY };
                side.min(cap)
            }
            ParticleShape::Tetrahedron { circumradius } => tetra_outward_normals()
                .iter()
                .filter_map(|n| {
                    let d = n.dot(w);
                    (d > 0.0).then(|| circumradius / 3.0 / d)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Bi-Lipschitz parametrisation of the body by the closed unit ball,
    /// `x ↦ ρ(x/|x|) x` with `ρ` the radial function.
    pub fn phi(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let n = x.norm();
        if n == 0.0 {
            return Vector3::zeros();
        }
        x * self.radial_function(&(x / n))
    }
}

/// Vertices of the regular tetrahedron with unit circumradius.
pub fn tetra_vertices() -> [Vector3<f64>; 4] {
    let s = 1.0 / 3f64.sqrt();
    [Vector3::new(s, s, s), Vector3::new(s, -s, -s), Vector3::new(-s, s, -s), Vector3::new(-s, -s, s)]
}

/// Outward unit normals of the unit tetrahedron; face `k` is opposite vertex `k`.
pub fn tetra_outward_normals() -> [Vector3<f64>; 4] {
    tetra_vertices().map(|v| -v)
}
