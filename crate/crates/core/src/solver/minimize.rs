use std::sync::Arc;

use rand::Rng;
use rustdct::{DctPlanner, Dst1};
use serde::{Deserialize, Serialize};

use super::energy::{EnergyBreakdown, Functional};
use super::field::DiscreteField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::numerics::rng;
use crate::qtensor::QTensor;

/// Inner product in which the descent direction is the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Metric {
    /// Nodal gradient divided by the cell volume.
    Euclidean,
    /// Discrete `H¹` product `∫ mass |P|² + 2 L1 |∇P|²` with zero boundary
    /// values; inverted exactly by sine transforms.
    Sobolev { mass: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop when the sup-norm of the gradient density falls below this.
    pub grad_tol: f64,
    /// Stop when an accepted step lowers the energy by less than this, relative.
    pub energy_rtol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub metric: Metric,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 2000,
            grad_tol: 1e-6,
            energy_rtol: 1e-13,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            metric: Metric::Sobolev { mass: 1.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    EnergyStalled,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: EnergyBreakdown,
    pub grad_norm: f64,
    pub step: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub field: DiscreteField,
    pub energy: EnergyBreakdown,
    pub log: Vec<IterationRecord>,
    pub status: Status,
}

impl MinimizeResult {
    pub fn iterations(&self) -> usize {
        self.log.len().saturating_sub(1)
    }
}

/// Armijo backtracking gradient descent on the active nodes of `f`. Dirichlet
/// and frozen nodes are never written.
pub fn minimize(initial: &DiscreteField, f: &dyn Functional, options: &MinimizeOptions) -> Result<MinimizeResult> {
    let grid = *f.grid();
    if initial.grid != grid {
        return Err(Error::Precondition("initial field and functional use different grids".into()));
    }
    if initial.values.iter().any(|q| q.0.iter().any(|v| !v.is_finite())) {
        return Err(Error::Precondition("initial field has non-finite values".into()));
    }
    if !(options.backtrack > 0.0 && options.backtrack < 1.0 && options.armijo_c > 0.0 && options.armijo_c < 1.0) {
        return Err(Error::Config("line search needs 0 < backtrack < 1 and 0 < c < 1".into()));
    }
    let active = f.active();
    let vol = grid.cell_volume();
    let precond = match options.metric {
        Metric::Euclidean => None,
        Metric::Sobolev { mass } => {
            if !(mass > 0.0) {
                return Err(Error::Config("Sobolev metric needs a positive mass".into()));
            }
            Some(SobolevMetric::new(&grid, mass, 2.0 * f.stiffness()))
        }
    };
    let mut x = initial.values.clone();
    let mut g = vec![QTensor::ZERO; x.len()];
    let mut e = f.energy_and_gradient(&x, &mut g);
    if !e.total.is_finite() {
        return Err(Error::Numerical("initial energy is not finite".into()));
    }
    let mut log = Vec::new();
    let mut step: f64 = 1.0;
    let mut trial = vec![QTensor::ZERO; x.len()];
    let mut last_step = 0.0;
    let mut last_backtracks = 0;
    let status = loop {
        for (n, gn) in g.iter_mut().enumerate() {
            if !active[n] {
                *gn = QTensor::ZERO;
            }
        }
        let gnorm = g.iter().map(|q| q.norm()).fold(0.0, f64::max) / vol;
        log.push(IterationRecord {
            iter: log.len(),
            energy: e,
            grad_norm: gnorm,
            step: last_step,
            backtracks: last_backtracks,
        });
        if gnorm < options.grad_tol {
            break Status::Converged;
        }
        if log.len() > options.max_iters {
            break Status::MaxIterations;
        }
        let d: Vec<QTensor> = match &precond {
            None => g.iter().map(|q| (-1.0 / vol) * *q).collect(),
            Some(p) => p.apply(&g, active).into_iter().map(|q| -q).collect(),
        };
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a.dot(b)).sum();
        if !(slope < 0.0) {
            break Status::LineSearchFailed;
        }
        step = (2.0 * step).min(1e8);
        let mut accepted = None;
        for bt in 0..=options.max_backtracks {
            for n in 0..x.len() {
                trial[n] = if active[n] { x[n] + step * d[n] } else { x[n] };
            }
            let et = f.energy(&trial);
            if et.total.is_finite() && et.total <= e.total + options.armijo_c * step * slope {
                accepted = Some(bt);
                break;
            }
            step *= options.backtrack;
        }
        let Some(bt) = accepted else {
            break Status::LineSearchFailed;
        };
        std::mem::swap(&mut x, &mut trial);
        let previous = e.total;
        e = f.energy_and_gradient(&x, &mut g);
        last_step = step;
        last_backtracks = bt;
        if (previous - e.total) <= options.energy_rtol * previous.abs().max(1e-300) {
            for (n, gn) in g.iter_mut().enumerate() {
                if !active[n] {
                    *gn = QTensor::ZERO;
                }
            }
            let gnorm = g.iter().map(|q| q.norm()).fold(0.0, f64::max) / vol;
            log.push(IterationRecord { iter: log.len(), energy: e, grad_norm: gnorm, step, backtracks: bt });
            break if gnorm < options.grad_tol { Status::Converged } else { Status::EnergyStalled };
        }
    };
    let mut field = initial.clone();
    field.values = x;
    Ok(MinimizeResult { field, energy: e, log, status })
}

/// Exact inverse of `V (mass I − stiffness Δ_h)` on interior nodes with zero
/// Dirichlet values, diagonalised by type-I sine transforms.
pub(crate) struct SobolevMetric {
    grid: Grid,
    m: [usize; 3],
    dst: [Arc<dyn Dst1<f64>>; 3],
    inv_symbol: Vec<f64>,
}

impl SobolevMetric {
    pub(crate) fn new(grid: &Grid, mass: f64, stiffness: f64) -> Self {
        let m = grid.cells.map(|c| c - 1);
        let h = grid.h();
        let mut planner = DctPlanner::new();
        let dst = std::array::from_fn(|a| planner.plan_dst1(m[a]));
        let lam: [Vec<f64>; 3] = std::array::from_fn(|a| {
            (0..m[a])
                .map(|j| {
                    (2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (m[a] + 1) as f64).cos()) / (h[a] * h[a])
                })
                .collect()
        });
        let norm: f64 = (0..3).map(|a| 2.0 / (m[a] + 1) as f64).product();
        let vol = grid.cell_volume();
        let mut inv_symbol = Vec::with_capacity(m[0] * m[1] * m[2]);
        for k in 0..m[2] {
            for j in 0..m[1] {
                for i in 0..m[0] {
                    inv_symbol.push(norm / (vol * (mass + stiffness * (lam[0][i] + lam[1][j] + lam[2][k]))));
                }
            }
        }
        SobolevMetric { grid: *grid, m, dst, inv_symbol }
    }

    fn transform(&self, buf: &mut [f64]) {
        let [m0, m1, m2] = self.m;
        let mut scratch = vec![0.0; m0.max(m1).max(m2)];
        for line in buf.chunks_exact_mut(m0) {
            self.dst[0].process_dst1(line);
        }
        for k in 0..m2 {
            for i in 0..m0 {
                for j in 0..m1 {
                    scratch[j] = buf[i + m0 * (j + m1 * k)];
                }
                self.dst[1].process_dst1(&mut scratch[..m1]);
                for j in 0..m1 {
                    buf[i + m0 * (j + m1 * k)] = scratch[j];
                }
            }
        }
        for j in 0..m1 {
            for i in 0..m0 {
                for k in 0..m2 {
                    scratch[k] = buf[i + m0 * (j + m1 * k)];
                }
                self.dst[2].process_dst1(&mut scratch[..m2]);
                for k in 0..m2 {
                    buf[i + m0 * (j + m1 * k)] = scratch[k];
                }
            }
        }
    }

    /// `M G⁻¹ M g`, `M` the restriction to active nodes.
    pub(crate) fn apply(&self, g: &[QTensor], active: &[bool]) -> Vec<QTensor> {
        let [m0, m1, m2] = self.m;
        let mut out = vec![QTensor::ZERO; g.len()];
        let mut buf = vec![0.0; m0 * m1 * m2];
        let node = |i: usize, j: usize, k: usize| self.grid.index(i + 1, j + 1, k + 1);
        for comp in 0..5 {
            for k in 0..m2 {
                for j in 0..m1 {
                    for i in 0..m0 {
                        let n = node(i, j, k);
                        buf[i + m0 * (j + m1 * k)] = if active[n] { g[n].0[comp] } else { 0.0 };
                    }
                }
            }
            self.transform(&mut buf);
            for (b, s) in buf.iter_mut().zip(&self.inv_symbol) {
                *b *= s;
            }
            self.transform(&mut buf);
            for k in 0..m2 {
                for j in 0..m1 {
                    for i in 0..m0 {
                        let n = node(i, j, k);
                        if active[n] {
                            out[n].0[comp] = buf[i + m0 * (j + m1 * k)];
                        }
                    }
                }
            }
        }
        out
    }
}

/// Worst relative mismatch between analytic and central-difference
/// directional derivatives, overall and per term (elastic, bulk, surface).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub directions: usize,
    pub total: f64,
    pub terms: [f64; 3],
}

/// Compares `∇F · P` with `(F(Q + tP) − F(Q − tP)) / 2t` along `n_dirs`
/// random perturbations supported on active nodes.
pub fn gradient_check(f: &dyn Functional, values: &[QTensor], n_dirs: usize, seed: u64) -> GradientCheck {
    let (_, grads) = f.term_gradients(values);
    let active = f.active();
    let mut r = rng(seed);
    let scale = values.iter().map(|q| q.norm()).fold(0.0, f64::max).max(1.0);
    let t = 1e-5 * scale;
    let mut worst = [0.0f64; 4];
    for _ in 0..n_dirs {
        let d: Vec<QTensor> = active
            .iter()
            .map(|&a| if a { QTensor(std::array::from_fn(|_| r.gen_range(-1.0..1.0))) } else { QTensor::ZERO })
            .collect();
        let plus: Vec<QTensor> = values.iter().zip(&d).map(|(v, p)| *v + t * *p).collect();
        let minus: Vec<QTensor> = values.iter().zip(&d).map(|(v, p)| *v - t * *p).collect();
        let (ep, em) = (f.energy(&plus), f.energy(&minus));
        let mut an = [0.0; 4];
        for term in 0..3 {
            an[term] = grads[term].iter().zip(&d).map(|(g, p)| g.dot(p)).sum();
        }
        an[3] = an[0] + an[1] + an[2];
        let fd = [
            (ep.elastic - em.elastic) / (2.0 * t),
            (ep.bulk - em.bulk) / (2.0 * t),
            (ep.surface - em.surface) / (2.0 * t),
            (ep.total - em.total) / (2.0 * t),
        ];
        let mag =
            [ep.elastic.abs(), ep.bulk.abs(), ep.surface.abs(), ep.elastic.abs() + ep.bulk.abs() + ep.surface.abs()];
        for k in 0..4 {
            // below this the difference quotient is pure cancellation noise
            let noise = 1e-13 * (1.0 + mag[k]) / t;
            let dev = (fd[k] - an[k]).abs();
            let denom = an[k].abs().max(fd[k].abs());
            if denom > noise {
                worst[k] = worst[k].max(dev / denom);
            } else {
                worst[k] = worst[k].max(dev / noise.max(1.0));
            }
        }
    }
    GradientCheck { directions: n_dirs, total: worst[3], terms: [worst[0], worst[1], worst[2]] }
}

/// Second differences `(F(Q + tP) + F(Q − tP) − 2F(Q)) / t²` along random
/// active perturbations of unit sup-norm.
pub fn second_variation(f: &dyn Functional, values: &[QTensor], n_dirs: usize, t: f64, seed: u64) -> Vec<f64> {
    let active = f.active();
    let mut r = rng(seed);
    let e0 = f.energy(values).total;
    (0..n_dirs)
        .map(|_| {
            let d: Vec<QTensor> = active
                .iter()
                .map(|&a| if a { QTensor(std::array::from_fn(|_| r.gen_range(-1.0..1.0))) } else { QTensor::ZERO })
                .collect();
            let plus: Vec<QTensor> = values.iter().zip(&d).map(|(v, p)| *v + t * *p).collect();
            let minus: Vec<QTensor> = values.iter().zip(&d).map(|(v, p)| *v - t * *p).collect();
            (f.energy(&plus).total + f.energy(&minus).total - 2.0 * e0) / (t * t)
        })
        .collect()
}
