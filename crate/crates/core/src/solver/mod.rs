//! Finite-difference discretisation and minimisation of `F_ε` and `F₀`.
//!
//! Fields live on a uniform node lattice over the box `Ω`. Bulk and elastic
//! energies use cut-cell weights (the fluid fraction of each cell, measured
//! against the exact inclusion geometry), the surface term uses each
//! inclusion's scaled boundary mesh with trilinear interpolation at facet
//! centres. Masked nodes next to an inclusion boundary stay unknowns of the
//! discrete problem and play the role of the extension inside it.

pub mod energy;
pub mod experiment;
pub mod extension;
pub mod field;
pub mod grid;
pub mod io;
pub mod minimize;
pub mod norms;

pub use energy::{
    assemble_f_eps, assemble_f_zero, check_resolution, AssemblyOptions, EnergyBreakdown, EnergySpecs, EpsAssembly,
    Functional, ZeroAssembly,
};
pub use experiment::{
    convergence_experiment, extension_constant, recovery_check, recovery_rate, ExperimentReport, ExperimentRow,
    ExperimentSetup, ExtensionConstant, RecoveryRow, RecoverySetup,
};
pub use extension::{harmonic_extension, harmonic_extension_report, ExtensionReport};
pub use field::{BoundaryDatum, DiscreteField, Mode, NodeLabel, SmoothField};
pub use grid::Grid;
pub use minimize::{
    gradient_check, minimize, second_variation, GradientCheck, Metric, MinimizeOptions, MinimizeResult, Status,
};
pub use norms::{dirichlet_norm_sq, h1_distance, l2_norm_sq};
