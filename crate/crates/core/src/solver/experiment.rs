use serde::{Deserialize, Serialize};

use super::energy::{AssemblyOptions, EnergyBreakdown, EnergySpecs, EpsAssembly, Functional, ZeroAssembly};
use super::extension::harmonic_extension_report;
use super::field::{cell_fractions, BoundaryDatum, DiscreteField, NodeLabel, SmoothField};
use super::grid::Grid;
use super::minimize::{minimize, second_variation, MinimizeOptions, Status};
use super::norms::{dirichlet_norm_sq, h1_distance};
use crate::energies::{s_plus, BulkSpec, ElasticSpec, SurfaceSpec};
use crate::error::{Error, Result};
use crate::homogenization::{build_mesh, ParticleShape, RotationField};
use crate::lattice::{BoxDomain, InclusionConfig};
use crate::numerics::loglog_slope;

fn default_h_factor() -> f64 {
    0.25
}

fn default_mesh_resolution() -> usize {
    2
}

fn default_limit_mesh_resolution() -> usize {
    1
}

/// Inputs of the `ε → 0` minimiser experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSetup {
    pub domain: BoxDomain,
    pub shape: ParticleShape,
    #[serde(default)]
    pub rotation: RotationField,
    pub alpha: f64,
    /// Decreasing sequence of lattice spacings.
    pub eps: Vec<f64>,
    /// Host bulk potential (inside `Ω_ε`, and the bulk part of `F₀`).
    pub bulk: BulkSpec,
    pub elastic: ElasticSpec,
    pub surface: SurfaceSpec,
    pub boundary: BoundaryDatum,
    /// Grid policy `h ≤ h_factor ε^α`.
    #[serde(default = "default_h_factor")]
    pub h_factor: f64,
    /// Inclusion surface mesh used for `J_ε`.
    #[serde(default = "default_mesh_resolution")]
    pub mesh_resolution: usize,
    /// Reference mesh used for `f_hom` in `F₀`.
    #[serde(default = "default_limit_mesh_resolution")]
    pub limit_mesh_resolution: usize,
    #[serde(default)]
    pub minimize: MinimizeOptions,
    #[serde(default)]
    pub assembly: AssemblyOptions,
}

impl Default for ExperimentSetup {
    /// Spheres designed to move `(a, b, c) = (−1, 1, 1)` to `(−1/2, 1, 1)` on
    /// the unit cube at `ε ∈ {1/2, 1/4}`, with uniform uniaxial `g` along `e₃`.
    fn default() -> Self {
        let (a, b, c) = (-1.0, 1.0, 1.0);
        let (a_prime, b_prime, c_prime) = (-0.5, 1.0, 1.0);
        ExperimentSetup {
            domain: BoxDomain::unit_cube(),
            shape: ParticleShape::Sphere,
            rotation: RotationField::Identity,
            alpha: 1.25,
            eps: vec![0.5, 0.25],
            bulk: BulkSpec::quartic(a, b, c),
            elastic: ElasticSpec::Dirichlet,
            surface: SurfaceSpec::Designed { a, b, c, a_prime, b_prime, c_prime },
            boundary: BoundaryDatum::Uniaxial {
                director: [0.0, 0.0, 1.0],
                s: s_plus(a_prime, b_prime, c_prime).expect("c > 0"),
            },
            h_factor: default_h_factor(),
            mesh_resolution: default_mesh_resolution(),
            limit_mesh_resolution: default_limit_mesh_resolution(),
            minimize: MinimizeOptions::default(),
            assembly: AssemblyOptions::default(),
        }
    }
}

impl ExperimentSetup {
    pub fn specs(&self) -> EnergySpecs {
        EnergySpecs { bulk: self.bulk, elastic: self.elastic, surface: self.surface.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.shape.validate()?;
        self.rotation.validate()?;
        self.boundary.validate()?;
        self.specs().validate()?;
        check_eps_sequence(&self.eps)?;
        if !(self.h_factor > 0.0 && self.h_factor <= 0.5) {
            return Err(Error::Config("h_factor must lie in (0, 1/2]".into()));
        }
        Ok(())
    }
}

fn check_eps_sequence(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Precondition("eps values must lie in (0, 1)".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("eps sequence must be strictly decreasing".into()));
    }
    Ok(())
}

/// One `ε` of the minimiser experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub eps: f64,
    pub n_inclusions: usize,
    pub cells: usize,
    pub h: f64,
    /// `‖E_ε Q_ε − Q₀‖_{H¹(Ω)}`.
    pub distance: f64,
    /// `F_ε[Q_ε]`.
    pub f_eps: EnergyBreakdown,
    /// `F₀[Q₀]`.
    pub f_zero: EnergyBreakdown,
    /// `F_ε[Q₀|_{Ω_ε}]`, the recovery-sequence energy.
    pub f_recovery: f64,
    /// `∫_{Ω_ε} |∇Q_ε|²`.
    pub grad_sq: f64,
    /// Smallest second difference of `F₀` at `Q₀` along random directions.
    pub min_second_difference: f64,
    /// Termination of the two minimisations (absent for failed rows).
    pub status_zero: Option<Status>,
    pub status_eps: Option<Status>,
    pub iterations: usize,
    /// Set when this row's inner computation failed; numbers are then NaN.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    /// Whether the distance column is non-increasing up to relative `slack`.
    pub fn distances_nonincreasing(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].distance <= w[0].distance * (1.0 + slack))
    }

    /// Whether `|F_ε[Q_ε] − F₀[Q₀]|` shrinks along the sequence.
    pub fn energy_gap_shrinks(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| (w[1].f_eps.total - w[1].f_zero.total).abs() < (w[0].f_eps.total - w[0].f_zero.total).abs())
    }
}

/// Minimises `F₀` from the extension of `g`, then `F_ε` from the restricted
/// `F₀` minimiser, for each `ε`, and compares the two.
pub fn convergence_experiment(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    setup.validate()?;
    let mut rows = Vec::new();
    for &eps in &setup.eps {
        rows.push(match experiment_row(setup, eps) {
            Ok(r) => r,
            Err(e @ (Error::Numerical(_) | Error::Resolution(_))) => failed_row(eps, e.to_string()),
            Err(e) => return Err(e),
        });
    }
    Ok(ExperimentReport { rows })
}

fn failed_row(eps: f64, msg: String) -> ExperimentRow {
    let nan = EnergyBreakdown::new(f64::NAN, f64::NAN, f64::NAN);
    ExperimentRow {
        eps,
        n_inclusions: 0,
        cells: 0,
        h: f64::NAN,
        distance: f64::NAN,
        f_eps: nan,
        f_zero: nan,
        f_recovery: f64::NAN,
        grad_sq: f64::NAN,
        min_second_difference: f64::NAN,
        status_zero: None,
        status_eps: None,
        iterations: 0,
        flag: Some(msg),
    }
}

fn experiment_row(setup: &ExperimentSetup, eps: f64) -> Result<ExperimentRow> {
    let specs = setup.specs();
    let scale = eps.powf(setup.alpha);
    let grid = Grid::with_max_spacing(setup.domain, setup.h_factor * scale)?;
    let config = InclusionConfig::periodic(&setup.domain, eps, setup.alpha, setup.shape, &setup.rotation)?;
    let mesh = build_mesh(&setup.shape, setup.mesh_resolution)?;
    let limit_mesh = build_mesh(&setup.shape, setup.limit_mesh_resolution)?;

    let init = DiscreteField::from_fn(grid, |x| setup.boundary.eval(x));
    let zero = ZeroAssembly::new(&init, &specs, &setup.rotation, &limit_mesh)?;
    let r0 = minimize(&init, &zero, &setup.minimize)?;
    let q0 = r0.field;
    let min_second_difference =
        second_variation(&zero, &q0.values, 4, 1e-3, 17).into_iter().fold(f64::INFINITY, f64::min);

    let mut start = q0.clone();
    start.mask_inclusions(&config);
    let asm = EpsAssembly::new(&start, &config, &specs, &mesh, setup.assembly)?;
    let f_recovery = asm.energy(&start.values).total;
    let r = minimize(&start, &asm, &setup.minimize)?;
    let extended = if r.field.count(NodeLabel::Masked) > 0 {
        harmonic_extension_report(&r.field, 1e-12, 0)?.0
    } else {
        r.field.clone()
    };
    Ok(ExperimentRow {
        eps,
        n_inclusions: config.len(),
        cells: grid.cells[0],
        h: grid.h_max(),
        distance: h1_distance(&extended, &q0)?,
        f_eps: r.energy,
        f_zero: r0.energy,
        f_recovery,
        grad_sq: dirichlet_norm_sq(&grid, &r.field.values, Some(asm.cell_weights())),
        min_second_difference,
        status_zero: Some(r0.status),
        status_eps: Some(r.status),
        iterations: r.iterations(),
        flag: None,
    })
}

/// Inputs of the fixed-field recovery check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySetup {
    pub domain: BoxDomain,
    pub shape: ParticleShape,
    #[serde(default)]
    pub rotation: RotationField,
    pub alpha: f64,
    pub eps: Vec<f64>,
    pub bulk: BulkSpec,
    pub elastic: ElasticSpec,
    pub surface: SurfaceSpec,
    pub field: SmoothField,
    #[serde(default = "default_h_factor")]
    pub h_factor: f64,
    #[serde(default = "default_mesh_resolution")]
    pub mesh_resolution: usize,
    #[serde(default = "default_limit_mesh_resolution")]
    pub limit_mesh_resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub eps: f64,
    pub n_inclusions: usize,
    pub cells: usize,
    pub f_eps: EnergyBreakdown,
    pub f_zero: EnergyBreakdown,
}

impl RecoveryRow {
    /// `|J_ε[Q] − J₀[Q]|`.
    pub fn j_gap(&self) -> f64 {
        (self.f_eps.surface - self.f_zero.surface).abs()
    }

    /// `|F_ε[Q] − F₀[Q]|`.
    pub fn f_gap(&self) -> f64 {
        (self.f_eps.total - self.f_zero.total).abs()
    }
}

/// Fitted exponent of `|J_ε − J₀|` against `ε`.
pub fn recovery_rate(rows: &[RecoveryRow]) -> f64 {
    let e: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let g: Vec<f64> = rows.iter().map(|r| r.j_gap()).collect();
    loglog_slope(&e, &g)
}

/// Evaluates `F_ε` and `F₀` on samples of one fixed smooth field.
pub fn recovery_check(setup: &RecoverySetup) -> Result<Vec<RecoveryRow>> {
    check_eps_sequence(&setup.eps)?;
    let specs = EnergySpecs { bulk: setup.bulk, elastic: setup.elastic, surface: setup.surface.clone() };
    let mesh = build_mesh(&setup.shape, setup.mesh_resolution)?;
    let limit_mesh = build_mesh(&setup.shape, setup.limit_mesh_resolution)?;
    let mut rows = Vec::new();
    for &eps in &setup.eps {
        let grid = Grid::with_max_spacing(setup.domain, setup.h_factor * eps.powf(setup.alpha))?;
        let config = InclusionConfig::periodic(&setup.domain, eps, setup.alpha, setup.shape, &setup.rotation)?;
        let full = DiscreteField::from_fn(grid, |x| setup.field.eval(x));
        let f_zero = ZeroAssembly::new(&full, &specs, &setup.rotation, &limit_mesh)?.energy(&full.values);
        let mut masked = full;
        masked.mask_inclusions(&config);
        let f_eps =
            EpsAssembly::new(&masked, &config, &specs, &mesh, AssemblyOptions::default())?.energy(&masked.values);
        rows.push(RecoveryRow { eps, n_inclusions: config.len(), cells: grid.cells[0], f_eps, f_zero });
    }
    Ok(rows)
}

/// Empirical constants of the extension bound for one field and one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConstant {
    pub eps: f64,
    pub n_inclusions: usize,
    /// `‖∇E_εQ‖_{L²(Ω)} / ‖∇Q‖_{L²(Ω_ε)}`.
    pub global: f64,
    /// `‖∇E_εQ‖_{L²(P_ε)} / ‖∇Q‖_{L²(Ω_ε)}`.
    pub local: f64,
    pub max_principle_excess: f64,
}

/// Samples `field` on a grid with `h ≤ h_factor ε^α`, extends it harmonically
/// into the inclusions and measures the gradient ratios.
pub fn extension_constant(
    domain: &BoxDomain,
    eps: f64,
    alpha: f64,
    shape: ParticleShape,
    rotation: &RotationField,
    field: &SmoothField,
    h_factor: f64,
) -> Result<ExtensionConstant> {
    let grid = Grid::with_max_spacing(*domain, h_factor * eps.powf(alpha))?;
    let config = InclusionConfig::periodic(domain, eps, alpha, shape, rotation)?;
    let mut f = DiscreteField::from_fn(grid, |x| field.eval(x));
    f.mask_inclusions(&config);
    let (e, rep) = harmonic_extension_report(&f, 1e-12, 0)?;
    let vol = grid.cell_volume();
    let fluid: Vec<f64> = cell_fractions(&grid, &config, 4).into_iter().map(|p| p * vol).collect();
    let solid: Vec<f64> = fluid.iter().map(|w| vol - w).collect();
    let outside = dirichlet_norm_sq(&grid, &f.values, Some(&fluid));
    let all = dirichlet_norm_sq(&grid, &e.values, None);
    let inside = dirichlet_norm_sq(&grid, &e.values, Some(&solid));
    Ok(ExtensionConstant {
        eps,
        n_inclusions: config.len(),
        global: (all / outside).sqrt(),
        local: (inside / outside).sqrt(),
        max_principle_excess: rep.max_principle_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::s_plus;
    use crate::homogenization::{design_surface, Coefficients, DesignVariant};
    use crate::qtensor::QTensor;

    #[test]
    fn rejects_non_decreasing_sequences() {
        assert!(check_eps_sequence(&[0.25, 0.25]).is_err());
        assert!(check_eps_sequence(&[0.125, 0.25]).is_err());
        assert!(check_eps_sequence(&[0.25, 0.125]).is_ok());
    }

    #[test]
    fn without_surface_energy_the_minimisers_coincide() {
        let s = s_plus(-1.0, 1.0, 1.0).unwrap();
        let setup = ExperimentSetup {
            domain: BoxDomain::unit_cube(),
            shape: ParticleShape::Sphere,
            rotation: RotationField::Identity,
            alpha: 1.25,
            eps: vec![0.5],
            bulk: BulkSpec::quartic(-1.0, 1.0, 1.0),
            elastic: ElasticSpec::Dirichlet,
            surface: SurfaceSpec::zero(),
            boundary: BoundaryDatum::Uniaxial { director: [0.0, 0.0, 1.0], s },
            h_factor: 0.25,
            mesh_resolution: 1,
            limit_mesh_resolution: 1,
            minimize: MinimizeOptions::default(),
            assembly: AssemblyOptions::default(),
        };
        let rep = convergence_experiment(&setup).unwrap();
        let row = &rep.rows[0];
        assert!(row.flag.is_none());
        assert!(row.distance < 1e-8, "{row:?}");
        assert!(row.min_second_difference > 0.0);
        // with no surface term F_ε[Q₀] only loses the inclusion volume
        let fluid = 1.0 - 4.0 / 3.0 * std::f64::consts::PI * 0.5f64.powf(3.75);
        assert!((row.f_recovery / row.f_zero.total - fluid).abs() < 1e-2, "{row:?}");
    }

    #[test]
    fn designed_surface_reduces_to_a_constant_shift_for_constant_fields() {
        let host = Coefficients::new(-1.0, 1.0, 1.0);
        let spec = design_surface(host, Coefficients::new(-0.5, 1.0, 1.0), DesignVariant::Designed).unwrap();
        let q = QTensor::random(3, 0.4);
        let setup = RecoverySetup {
            domain: BoxDomain::unit_cube(),
            shape: ParticleShape::Sphere,
            rotation: RotationField::Identity,
            alpha: 1.25,
            eps: vec![0.25],
            bulk: host.bulk(),
            elastic: ElasticSpec::Dirichlet,
            surface: spec,
            field: SmoothField::constant(q),
            h_factor: 0.25,
            mesh_resolution: 2,
            limit_mesh_resolution: 1,
        };
        let rows = recovery_check(&setup).unwrap();
        let r = rows[0];
        assert_eq!(r.n_inclusions, 27);
        // J_ε[Q̄] = ε³ N_ε f_hom(Q̄) while J₀[Q̄] = |Ω| f_hom(Q̄)
        let ratio = r.f_eps.surface / r.f_zero.surface;
        assert!((ratio - 27.0 * 0.25f64.powi(3)).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn extension_constant_of_an_affine_field_is_one_globally() {
        let a = [QTensor::random(1, 1.0), QTensor::random(2, 1.0), QTensor::random(3, 1.0)];
        let field = SmoothField { constant: QTensor::ZERO, linear: a, modes: Vec::new() };
        let c = extension_constant(
            &BoxDomain::unit_cube(),
            0.5,
            1.3,
            ParticleShape::Sphere,
            &RotationField::Identity,
            &field,
            0.25,
        )
        .unwrap();
        let frac = 4.0 / 3.0 * std::f64::consts::PI * 0.5f64.powf(3.9);
        assert!((c.global - (1.0 / (1.0 - frac)).sqrt()).abs() < 0.02, "{c:?}");
        assert!((c.local - (frac / (1.0 - frac)).sqrt()).abs() < 0.02, "{c:?}");
    }
}
