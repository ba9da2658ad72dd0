use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::numerics;

/// Continuous orientation field `x ↦ R(x) ∈ SO(3)` assigning each inclusion its rotation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RotationField {
    #[default]
    Identity,
    /// Rotation by `angle` about `axis` everywhere.
    Constant { axis: [f64; 3], angle: f64 },
    /// Rotation about `axis` by the affine angle `angle0 + gradient·x`.
    Twist { axis: [f64; 3], angle0: f64, gradient: [f64; 3] },
}

impl RotationField {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RotationField::Identity => Ok(()),
            RotationField::Constant { axis, .. } | RotationField::Twist { axis, .. } => {
                if Vector3::from(axis).norm() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Precondition("rotation axis must be non-zero".into()))
                }
            }
        }
    }

    pub fn at(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        match *self {
            RotationField::Identity => Matrix3::identity(),
            RotationField::Constant { axis, angle } => rotation(axis, angle),
            RotationField::Twist { axis, angle0, gradient } => rotation(axis, angle0 + Vector3::from(gradient).dot(x)),
        }
    }

    /// True when `R` does not depend on position.
    pub fn is_uniform(&self) -> bool {
        match *self {
            RotationField::Twist { gradient, .. } => gradient == [0.0; 3],
            _ => true,
        }
    }
}

fn rotation(axis: [f64; 3], angle: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle).into_inner()
}

/// Checks `RᵀR = Id` and `det R = 1` within the configured tolerance.
pub fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let tol = numerics().orthogonality_tol;
    let dev = (r.transpose() * r - Matrix3::identity()).abs().max();
    if dev > tol || (r.determinant() - 1.0).abs() > tol {
        return Err(Error::Precondition(format!("matrix is not a rotation (|RᵀR - I| = {dev:e})")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_produce_rotations() {
        let fields = [
            RotationField::Identity,
            RotationField::Constant { axis: [1.0, 2.0, 0.5], angle: 0.7 },
            RotationField::Twist { axis: [0.0, 1.0, 1.0], angle0: 0.1, gradient: [1.0, -2.0, 0.3] },
        ];
        for f in fields {
            f.validate().unwrap();
            for k in 0..20 {
                let x = Vector3::new(k as f64 * 0.05, 0.3, 1.0 - k as f64 * 0.04);
                check_rotation(&f.at(&x)).unwrap();
            }
        }
        assert!(RotationField::Constant { axis: [0.0; 3], angle: 1.0 }.validate().is_err());
        assert!(check_rotation(&Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))).is_err());
    }
}
