use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::field::{cell_fractions, inclusion_nodes, DiscreteField, NodeLabel};
use super::grid::Grid;
use crate::energies::{
    bulk_energy, bulk_energy_and_gradient, elastic_gradient, surface_energy_and_gradient, surface_energy_unchecked,
    BulkSpec, ElasticForm, ElasticSpec, SurfaceSpec,
};
use crate::error::{Error, Result};
use crate::homogenization::{psi, psi_and_gradient, RotationField, SurfaceMesh};
use crate::lattice::InclusionConfig;
use crate::numerics::pairwise_sum;
use crate::qtensor::QTensor;

/// Energy densities entering `F_ε` and `F₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpecs {
    pub bulk: BulkSpec,
    pub elastic: ElasticSpec,
    pub surface: SurfaceSpec,
}

impl EnergySpecs {
    pub fn validate(&self) -> Result<()> {
        self.bulk.validate()?;
        self.elastic.validate()?;
        self.surface.validate()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(elastic: f64, bulk: f64, surface: f64) -> Self {
        EnergyBreakdown { elastic, bulk, surface, total: elastic + bulk + surface }
    }

    pub fn parts(&self) -> [f64; 3] {
        [self.elastic, self.bulk, self.surface]
    }
}

/// Term index used by [`Functional::term_gradients`].
pub const ELASTIC: usize = 0;
pub const BULK: usize = 1;
pub const SURFACE: usize = 2;

/// A discrete energy on nodal values.
pub trait Functional {
    fn grid(&self) -> &Grid;
    /// Nodes the energy may vary (not Dirichlet, and coupled to some term).
    fn active(&self) -> &[bool];
    /// `L1`, the coefficient of `|∇Q|²`, used to scale the Sobolev metric.
    fn stiffness(&self) -> f64;
    fn energy(&self, v: &[QTensor]) -> EnergyBreakdown;
    fn energy_and_gradient(&self, v: &[QTensor], g: &mut [QTensor]) -> EnergyBreakdown;
    /// Gradients of the elastic, bulk and surface terms separately.
    fn term_gradients(&self, v: &[QTensor]) -> (EnergyBreakdown, [Vec<QTensor>; 3]);
}

enum Sink<'a> {
    None,
    One(&'a mut [QTensor]),
    Split(&'a mut [Vec<QTensor>; 3]),
}

impl Sink<'_> {
    #[inline]
    fn add(&mut self, term: usize, n: usize, g: QTensor) {
        match self {
            Sink::None => {}
            Sink::One(v) => v[n] += g,
            Sink::Split(v) => v[term][n] += g,
        }
    }

    fn wants(&self) -> bool {
        !matches!(self, Sink::None)
    }
}

/// Bulk and elastic terms over weighted cells. A cell of weight `w` contributes
/// `w/8 Σ_corners f(∇Q_corner)`, the corner gradient built from the three cell
/// edges meeting there, and `w/8 f_b` to each corner.
#[derive(Debug, Clone)]
struct CellTerms {
    grid: Grid,
    bulk: BulkSpec,
    elastic: ElasticSpec,
    form: Option<Box<ElasticForm>>,
    cell_weight: Vec<f64>,
    /// Weight of the elastic term; exceeds `cell_weight` on ghost cells.
    elastic_weight: Vec<f64>,
    active_cells: Vec<usize>,
    node_weight: Vec<f64>,
}

impl CellTerms {
    fn new(grid: Grid, bulk: BulkSpec, elastic: ElasticSpec, cell_weight: Vec<f64>) -> Self {
        Self::with_elastic_weight(grid, bulk, elastic, cell_weight.clone(), cell_weight)
    }

    fn with_elastic_weight(
        grid: Grid,
        bulk: BulkSpec,
        elastic: ElasticSpec,
        cell_weight: Vec<f64>,
        elastic_weight: Vec<f64>,
    ) -> Self {
        let active_cells: Vec<usize> = (0..grid.n_cells()).filter(|&c| elastic_weight[c] > 0.0).collect();
        let mut node_weight = vec![0.0; grid.n_nodes()];
        for &c in &active_cells {
            for n in grid.cell_nodes(c) {
                node_weight[n] += cell_weight[c] / 8.0;
            }
        }
        let form = (!elastic.is_dirichlet_like()).then(|| Box::new(elastic.form()));
        CellTerms { grid, bulk, elastic, form, cell_weight, elastic_weight, active_cells, node_weight }
    }

    fn eval(&self, v: &[QTensor], sink: &mut Sink) -> (f64, f64) {
        let h = self.grid.h();
        let inv_h2 = h.map(|x| 1.0 / (x * x));
        let inv_h = h.map(|x| 1.0 / x);
        let l1 = self.elastic.constants().0;
        let grad = sink.wants();
        let mut el = Vec::with_capacity(self.active_cells.len());
        for &c in &self.active_cells {
            let nodes = self.grid.cell_nodes(c);
            let w = self.elastic_weight[c];
            let mut e = 0.0;
            match &self.form {
                None => {
                    for (k, bit) in [1usize, 2, 4].into_iter().enumerate() {
                        for lo in (0..8).filter(|a| a & bit == 0) {
                            let (a, b) = (nodes[lo], nodes[lo | bit]);
                            let d = v[b] - v[a];
                            e += d.norm_sq() * inv_h2[k];
                            if grad {
                                let g = (0.5 * w * l1 * inv_h2[k]) * d;
                                sink.add(ELASTIC, b, g);
                                sink.add(ELASTIC, a, -g);
                            }
                        }
                    }
                    el.push(0.25 * w * l1 * e);
                }
                Some(form) => {
                    for corner in 0..8 {
                        let d: [QTensor; 3] = std::array::from_fn(|k| {
                            let bit = 1 << k;
                            inv_h[k] * (v[nodes[corner | bit]] - v[nodes[corner & !bit]])
                        });
                        let g = elastic_gradient(form, &d);
                        e += 0.5 * (0..3).map(|k| d[k].dot(&g[k])).sum::<f64>();
                        if grad {
                            for (k, gk) in g.iter().enumerate() {
                                let bit = 1 << k;
                                let s = w / 8.0 * inv_h[k];
                                sink.add(ELASTIC, nodes[corner | bit], s * *gk);
                                sink.add(ELASTIC, nodes[corner & !bit], -s * *gk);
                            }
                        }
                    }
                    el.push(w / 8.0 * e);
                }
            }
        }
        let mut bu = Vec::with_capacity(v.len());
        for (n, &w) in self.node_weight.iter().enumerate() {
            if w > 0.0 {
                if grad {
                    let (f, g) = bulk_energy_and_gradient(&self.bulk, &v[n]);
                    bu.push(w * f);
                    sink.add(BULK, n, w * g);
                } else {
                    bu.push(w * bulk_energy(&self.bulk, &v[n]));
                }
            }
        }
        (pairwise_sum(&el), pairwise_sum(&bu))
    }
}

/// Surface quadrature point of one inclusion facet.
#[derive(Debug, Clone, Copy)]
struct SurfacePoint {
    stencil: [(usize, f64); 8],
    nu: Vector3<f64>,
    weight: f64,
}

/// Discretisation of `F_ε` on a masked field.
#[derive(Debug, Clone)]
pub struct EpsAssembly {
    cells: CellTerms,
    surface: SurfaceSpec,
    points: Vec<SurfacePoint>,
    active: Vec<bool>,
}

/// Fine-scale options of the `F_ε` discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssemblyOptions {
    /// Subsamples per axis when measuring the fluid fraction of cut cells.
    pub subsamples: usize,
    /// Ghost penalty `γ`: cut cells and cells holding surface quadrature
    /// points carry elastic weight `max(|cell ∩ Ω_ε|, γ h³)`. This ties the
    /// interpolated trace on `∂P_ε` to the fluid field; its energy lives in
    /// a one-cell layer and vanishes with `h`. Zero disables it.
    pub ghost: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { subsamples: 4, ghost: 1.0 }
    }
}

/// Rejects grids with `ε^α < 2h`.
pub fn check_resolution(grid: &Grid, config: &InclusionConfig) -> Result<()> {
    let s = config.scale();
    let h = grid.h_max();
    if s < 2.0 * h {
        return Err(Error::Resolution(format!(
            "inclusion scale eps^alpha = {s:.4e} requires h <= {:.4e} (at least {} cells per axis on this box), grid has h = {h:.4e}",
            0.5 * s,
            grid.domain.edges().iter().map(|e| (2.0 * e / s).ceil() as usize).max().unwrap_or(0)
        )));
    }
    Ok(())
}

impl EpsAssembly {
    pub fn new(
        field: &DiscreteField,
        config: &InclusionConfig,
        specs: &EnergySpecs,
        mesh: &SurfaceMesh,
        options: AssemblyOptions,
    ) -> Result<Self> {
        specs.validate()?;
        let grid = field.grid;
        check_resolution(&grid, config)?;
        let inside = inclusion_nodes(&grid, config);
        for (n, l) in field.labels.iter().enumerate() {
            let consistent = match l {
                NodeLabel::Dirichlet => grid.is_boundary(n),
                NodeLabel::Masked => inside[n] && !grid.is_boundary(n),
                NodeLabel::Free => !inside[n] && !grid.is_boundary(n),
            };
            if !consistent {
                return Err(Error::Precondition(format!(
                    "field mask is inconsistent with the inclusion configuration at node {n}"
                )));
            }
        }
        if !(options.ghost >= 0.0 && options.ghost <= 1.0) {
            return Err(Error::Config("ghost penalty must lie in [0, 1]".into()));
        }
        let vol = grid.cell_volume();
        let weights: Vec<f64> =
            cell_fractions(&grid, config, options.subsamples).into_iter().map(|f| f * vol).collect();

        let s = config.scale();
        let e3 = config.eps.powi(3);
        let mut points = Vec::with_capacity(config.len() * mesh.facets.len());
        let mut point_cells = Vec::with_capacity(points.capacity());
        for (c, r) in config.centers.iter().zip(&config.rotations) {
            for f in &mesh.facets {
                let x = c + s * (r * f.center);
                let outside = || Error::Precondition(format!("inclusion surface point {x:?} lies outside the grid"));
                let stencil = grid.trilinear(&x).ok_or_else(outside)?;
                let ([i, j, k], _) = grid.locate(&x).ok_or_else(outside)?;
                point_cells.push(grid.cell_index(i, j, k));
                points.push(SurfacePoint { stencil, nu: r * f.normal, weight: e3 * f.area });
            }
        }
        let mut elastic_weight = weights.clone();
        if options.ghost > 0.0 {
            let floor = options.ghost * vol;
            for w in elastic_weight.iter_mut() {
                if *w > 0.0 && *w < vol {
                    *w = w.max(floor);
                }
            }
            for &c in &point_cells {
                elastic_weight[c] = elastic_weight[c].max(floor);
            }
        }
        let cells = CellTerms::with_elastic_weight(grid, specs.bulk, specs.elastic, weights, elastic_weight);

        let mut active = vec![false; grid.n_nodes()];
        for &c in &cells.active_cells {
            for n in grid.cell_nodes(c) {
                active[n] = true;
            }
        }
        for p in &points {
            for &(n, w) in &p.stencil {
                if w != 0.0 {
                    active[n] = true;
                }
            }
        }
        for (n, a) in active.iter_mut().enumerate() {
            if field.labels[n] == NodeLabel::Dirichlet {
                *a = false;
            }
        }
        Ok(EpsAssembly { cells, surface: specs.surface.clone(), points, active })
    }

    /// Cell weights `|cell ∩ Ω_ε|`.
    pub fn cell_weights(&self) -> &[f64] {
        &self.cells.cell_weight
    }

    /// Discrete `|Ω_ε|`.
    pub fn fluid_volume(&self) -> f64 {
        pairwise_sum(&self.cells.cell_weight)
    }

    pub fn n_surface_points(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, v: &[QTensor], sink: &mut Sink) -> EnergyBreakdown {
        let (el, bu) = self.cells.eval(v, sink);
        let grad = sink.wants();
        let mut su = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let q = p.stencil.iter().fold(QTensor::ZERO, |acc, &(n, w)| acc + w * v[n]);
            if grad {
                let (f, g) = surface_energy_and_gradient(&self.surface, &q, &p.nu);
                su.push(p.weight * f);
                for &(n, w) in &p.stencil {
                    sink.add(SURFACE, n, (p.weight * w) * g);
                }
            } else {
                su.push(p.weight * surface_energy_unchecked(&self.surface, &q, &p.nu));
            }
        }
        EnergyBreakdown::new(el, bu, pairwise_sum(&su))
    }
}

impl Functional for EpsAssembly {
    fn grid(&self) -> &Grid {
        &self.cells.grid
    }

    fn active(&self) -> &[bool] {
        &self.active
    }

    fn stiffness(&self) -> f64 {
        self.cells.elastic.constants().0
    }

    fn energy(&self, v: &[QTensor]) -> EnergyBreakdown {
        self.eval(v, &mut Sink::None)
    }

    fn energy_and_gradient(&self, v: &[QTensor], g: &mut [QTensor]) -> EnergyBreakdown {
        g.fill(QTensor::ZERO);
        self.eval(v, &mut Sink::One(g))
    }

    fn term_gradients(&self, v: &[QTensor]) -> (EnergyBreakdown, [Vec<QTensor>; 3]) {
        let mut g = std::array::from_fn(|_| vec![QTensor::ZERO; v.len()]);
        let e = self.eval(v, &mut Sink::Split(&mut g));
        (e, g)
    }
}

/// Discretisation of `F₀` on the full box, the surface slot holding `∫ f_hom(Q, x) dx`.
#[derive(Debug, Clone)]
pub struct ZeroAssembly {
    cells: CellTerms,
    surface: SurfaceSpec,
    mesh: SurfaceMesh,
    rotations: Vec<Matrix3<f64>>,
    uniform: bool,
    active: Vec<bool>,
}

impl ZeroAssembly {
    /// `mesh` is the reference particle's surface mesh used for `f_hom`.
    pub fn new(
        field: &DiscreteField,
        specs: &EnergySpecs,
        rotation: &RotationField,
        mesh: &SurfaceMesh,
    ) -> Result<Self> {
        specs.validate()?;
        rotation.validate()?;
        if field.labels.contains(&NodeLabel::Masked) {
            return Err(Error::Precondition("the limit functional takes an unmasked field".into()));
        }
        let grid = field.grid;
        let cells = CellTerms::new(grid, specs.bulk, specs.elastic, vec![grid.cell_volume(); grid.n_cells()]);
        let uniform = rotation.is_uniform();
        let rotations = if uniform {
            vec![rotation.at(&grid.node(0))]
        } else {
            (0..grid.n_nodes()).map(|n| rotation.at(&grid.node(n))).collect()
        };
        let active = field.labels.iter().map(|&l| l != NodeLabel::Dirichlet).collect();
        Ok(ZeroAssembly { cells, surface: specs.surface.clone(), mesh: mesh.clone(), rotations, uniform, active })
    }

    fn eval(&self, v: &[QTensor], sink: &mut Sink) -> EnergyBreakdown {
        let (el, bu) = self.cells.eval(v, sink);
        let grad = sink.wants();
        let mut su = Vec::with_capacity(v.len());
        for (n, &w) in self.cells.node_weight.iter().enumerate() {
            let r = &self.rotations[if self.uniform { 0 } else { n }];
            if grad {
                let (f, g) = psi_and_gradient(&v[n], r, &self.surface, &self.mesh);
                su.push(w * f);
                sink.add(SURFACE, n, w * g);
            } else {
                su.push(w * psi(&v[n], r, &self.surface, &self.mesh));
            }
        }
        EnergyBreakdown::new(el, bu, pairwise_sum(&su))
    }
}

impl Functional for ZeroAssembly {
    fn grid(&self) -> &Grid {
        &self.cells.grid
    }

    fn active(&self) -> &[bool] {
        &self.active
    }

    fn stiffness(&self) -> f64 {
        self.cells.elastic.constants().0
    }

    fn energy(&self, v: &[QTensor]) -> EnergyBreakdown {
        self.eval(v, &mut Sink::None)
    }

    fn energy_and_gradient(&self, v: &[QTensor], g: &mut [QTensor]) -> EnergyBreakdown {
        g.fill(QTensor::ZERO);
        self.eval(v, &mut Sink::One(g))
    }

    fn term_gradients(&self, v: &[QTensor]) -> (EnergyBreakdown, [Vec<QTensor>; 3]) {
        let mut g = std::array::from_fn(|_| vec![QTensor::ZERO; v.len()]);
        let e = self.eval(v, &mut Sink::Split(&mut g));
        (e, g)
    }
}

/// `F_ε` of a masked field.
pub fn assemble_f_eps(
    field: &DiscreteField,
    config: &InclusionConfig,
    specs: &EnergySpecs,
    mesh: &SurfaceMesh,
) -> Result<EnergyBreakdown> {
    Ok(EpsAssembly::new(field, config, specs, mesh, AssemblyOptions::default())?.energy(&field.values))
}

/// `F₀` of an unmasked field.
pub fn assemble_f_zero(
    field: &DiscreteField,
    specs: &EnergySpecs,
    rotation: &RotationField,
    mesh: &SurfaceMesh,
) -> Result<EnergyBreakdown> {
    Ok(ZeroAssembly::new(field, specs, rotation, mesh)?.energy(&field.values))
}
