//! Particle geometry, boundary quadrature and the homogenised surface potential.

pub mod design;
pub mod mesh;
pub mod moments;
pub mod rotation;
pub mod shape;

pub use design::{
    design_surface, f_hom, psi, psi_and_gradient, sphere_f_hom_closed_form, verify_design, Coefficients,
    DesignCheckRow, DesignVariant,
};
pub use mesh::{build_mesh, build_mesh_with, Facet, SphereMeshKind, SurfaceMesh};
pub use moments::{appendix_constants, identity_ladder, sphere_moment, sphere_moment_quadrature, MomentKind, C31, C32};
pub use rotation::RotationField;
pub use shape::ParticleShape;
