//! Pointwise energy densities: bulk potentials, elastic forms and surface anchoring.

pub mod bulk;
pub mod elastic;
pub mod surface;

pub use bulk::{bulk_energy, bulk_energy_and_gradient, bulk_gradient, s_plus, BulkSpec};
pub use elastic::{
    elastic_convexity_check, elastic_energy, elastic_gradient, elastic_min_eigenvalue, elastic_min_rayleigh,
    ElasticForm, ElasticSpec, GradQ,
};
pub use surface::{
    growth_constants_estimate, invariance_test, surface_energy, surface_energy_and_gradient, surface_energy_unchecked,
    surface_energy_via_invariants, InvariantDensity, SurfaceDensity, SurfaceInvariants, SurfaceSpec,
};
