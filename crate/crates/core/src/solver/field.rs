use std::collections::HashMap;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::energies::GradQ;
use crate::error::{Error, Result};
use crate::lattice::{BoxDomain, InclusionConfig};
use crate::numerics::rng;
use crate::qtensor::{check_unit, random_unit, QTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeLabel {
    /// Interior node of `Ω_ε`.
    Free,
    /// Node inside some inclusion.
    Masked,
    /// Node on `∂Ω` carrying the boundary datum.
    Dirichlet,
}

/// Nodal Q-tensor field on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub grid: Grid,
    pub values: Vec<QTensor>,
    pub labels: Vec<NodeLabel>,
}

impl DiscreteField {
    /// Samples `f` at every node; boundary nodes become Dirichlet nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(&Vector3<f64>) -> QTensor) -> Self {
        let n = grid.n_nodes();
        let mut values = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            values.push(f(&grid.node(i)));
            labels.push(if grid.is_boundary(i) { NodeLabel::Dirichlet } else { NodeLabel::Free });
        }
        DiscreteField { grid, values, labels }
    }

    pub fn constant(grid: Grid, q: QTensor) -> Self {
        Self::from_fn(grid, |_| q)
    }

    /// Overwrites the Dirichlet nodes with `g`.
    pub fn impose(&mut self, g: &BoundaryDatum) {
        for i in 0..self.values.len() {
            if self.labels[i] == NodeLabel::Dirichlet {
                self.values[i] = g.eval(&self.grid.node(i));
            }
        }
    }

    /// Labels interior nodes inside any inclusion as masked, all others free.
    pub fn mask_inclusions(&mut self, config: &InclusionConfig) {
        let inside = inclusion_nodes(&self.grid, config);
        for (i, l) in self.labels.iter_mut().enumerate() {
            if *l != NodeLabel::Dirichlet {
                *l = if inside[i] { NodeLabel::Masked } else { NodeLabel::Free };
            }
        }
    }

    /// Removes the inclusion mask (for the limit functional).
    pub fn unmask(&mut self) {
        for l in self.labels.iter_mut() {
            if *l == NodeLabel::Masked {
                *l = NodeLabel::Free;
            }
        }
    }

    pub fn count(&self, label: NodeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Trilinear interpolant at `x`.
    pub fn interpolate(&self, x: &Vector3<f64>) -> Option<QTensor> {
        let s = self.grid.trilinear(x)?;
        Some(s.iter().fold(QTensor::ZERO, |acc, &(n, w)| acc + w * self.values[n]))
    }

    pub fn same_grid(&self, other: &DiscreteField) -> bool {
        self.grid == other.grid
    }
}

/// Whether each node lies inside some inclusion (closed sets).
pub fn inclusion_nodes(grid: &Grid, config: &InclusionConfig) -> Vec<bool> {
    let mut inside = vec![false; grid.n_nodes()];
    let reach = config.scale() * config.shape.bounding_radius();
    for (i, c) in config.centers.iter().enumerate() {
        let [ri, rj, rk] = grid.node_range(c, reach);
        for k in rk {
            for j in rj.clone() {
                for l in ri.clone() {
                    let n = grid.index(l, j, k);
                    if !inside[n] && config.inclusion_contains(i, &grid.point(l, j, k)) {
                        inside[n] = true;
                    }
                }
            }
        }
    }
    inside
}

/// Fraction of each cell lying outside all inclusions, by midpoint
/// subsampling with `sub³` points per cell.
pub fn cell_fractions(grid: &Grid, config: &InclusionConfig, sub: usize) -> Vec<f64> {
    let mut frac = vec![1.0; grid.n_cells()];
    let mut candidates: HashMap<usize, Vec<usize>> = HashMap::new();
    let reach = config.scale() * config.shape.bounding_radius();
    let h = grid.h();
    for (i, c) in config.centers.iter().enumerate() {
        let r = grid.node_range(c, reach);
        let cr: [_; 3] = std::array::from_fn(|a| {
            let lo = (*r[a].start()).min(grid.cells[a] - 1);
            lo..(*r[a].end()).clamp(lo + 1, grid.cells[a])
        });
        for k in cr[2].clone() {
            for j in cr[1].clone() {
                for l in cr[0].clone() {
                    candidates.entry(grid.cell_index(l, j, k)).or_default().push(i);
                }
            }
        }
    }
    let s = sub.max(1);
    let mut keys: Vec<_> = candidates.keys().copied().collect();
    keys.sort_unstable();
    for cell in keys {
        let inc = &candidates[&cell];
        let [ci, cj, ck] = grid.cell_ijk(cell);
        let base = grid.point(ci, cj, ck);
        let mut outside = 0usize;
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    let x = base
                        + Vector3::new(
                            (a as f64 + 0.5) / s as f64 * h[0],
                            (b as f64 + 0.5) / s as f64 * h[1],
                            (c as f64 + 0.5) / s as f64 * h[2],
                        );
                    if !inc.iter().any(|&i| config.inclusion_contains(i, &x)) {
                        outside += 1;
                    }
                }
            }
        }
        frac[cell] = outside as f64 / (s * s * s) as f64;
    }
    frac
}

/// Smooth closed-form field `C + Σₖ xₖ Lₖ + Σ A sin(k·x + φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothField {
    #[serde(default = "zero_q")]
    pub constant: QTensor,
    #[serde(default = "zero_grad")]
    pub linear: [QTensor; 3],
    #[serde(default)]
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub amplitude: QTensor,
    pub wavevector: [f64; 3],
    #[serde(default)]
    pub phase: f64,
}

fn zero_q() -> QTensor {
    QTensor::ZERO
}

fn zero_grad() -> [QTensor; 3] {
    [QTensor::ZERO; 3]
}

impl SmoothField {
    pub fn constant(q: QTensor) -> Self {
        SmoothField { constant: q, linear: zero_grad(), modes: Vec::new() }
    }

    /// `n_modes` sine modes with random amplitudes of norm up to `amplitude`
    /// and wavevectors of length up to `max_wavenumber`.
    pub fn random(seed: u64, n_modes: usize, max_wavenumber: f64, amplitude: f64) -> Self {
        let mut r = rng(seed);
        let modes = (0..n_modes)
            .map(|_| {
                let k = random_unit(&mut r) * r.gen_range(0.5..1.0) * max_wavenumber;
                Mode {
                    amplitude: QTensor::random_with(&mut r, amplitude),
                    wavevector: [k.x, k.y, k.z],
                    phase: r.gen_range(0.0..std::f64::consts::TAU),
                }
            })
            .collect();
        SmoothField { constant: QTensor::random_with(&mut r, amplitude), linear: zero_grad(), modes }
    }

    /// `C + A Πₖ sin^{2p}(π(xₖ − loₖ)/Lₖ)` on `domain`: equal to `C` on the
    /// boundary, where its first `2p − 1` normal derivatives vanish.
    pub fn bubble(domain: &BoxDomain, constant: QTensor, amplitude: QTensor, p: u32) -> Self {
        assert!(p >= 1, "bubble power must be at least 1");
        // sin^{2p}θ = Σⱼ cⱼ cos(2jθ)
        let binom = |n: u32, k: u32| (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1));
        let scale = 0.25f64.powi(p as i32);
        let series: Vec<f64> = (0..=p)
            .map(|j| {
                let c = scale * binom(2 * p, p - j);
                if j == 0 {
                    c
                } else if j % 2 == 1 {
                    -2.0 * c
                } else {
                    2.0 * c
                }
            })
            .collect();
        let edges = domain.edges();
        let mut field = SmoothField::constant(constant + series[0].powi(3) * amplitude);
        let n = (p + 1) as usize;
        for choice in 1..n * n * n {
            let js = [choice % n, choice / n % n, choice / (n * n)];
            let axes: Vec<usize> = (0..3).filter(|&k| js[k] > 0).collect();
            let weight: f64 = js.iter().map(|&j| series[j]).product::<f64>() / f64::from(1u32 << (axes.len() - 1));
            // products of cosines as sums of cosines, first sign fixed to +
            for signs in 0..1usize << (axes.len() - 1) {
                let mut wavevector = [0.0; 3];
                let mut phase = std::f64::consts::FRAC_PI_2;
                for (i, &k) in axes.iter().enumerate() {
                    let s = if i > 0 && signs >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
                    wavevector[k] = s * std::f64::consts::TAU * js[k] as f64 / edges[k];
                    phase -= wavevector[k] * domain.lo[k];
                }
                field.modes.push(Mode { amplitude: weight * amplitude, wavevector, phase });
            }
        }
        field
    }

    pub fn eval(&self, x: &Vector3<f64>) -> QTensor {
        let mut q = self.constant + x.x * self.linear[0] + x.y * self.linear[1] + x.z * self.linear[2];
        for m in &self.modes {
            q += (Vector3::from(m.wavevector).dot(x) + m.phase).sin() * m.amplitude;
        }
        q
    }

    pub fn gradient(&self, x: &Vector3<f64>) -> GradQ {
        let mut d = self.linear;
        for m in &self.modes {
            let c = (Vector3::from(m.wavevector).dot(x) + m.phase).cos();
            for (k, dk) in d.iter_mut().enumerate() {
                *dk += (c * m.wavevector[k]) * m.amplitude;
            }
        }
        d
    }
}

/// Boundary datum `g`, also used as the initial guess inside `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryDatum {
    Zero,
    /// `s (n⊗n − Id/3)` with a fixed director.
    Uniaxial {
        director: [f64; 3],
        s: f64,
    },
    Smooth {
        field: SmoothField,
    },
}

impl BoundaryDatum {
    pub fn validate(&self) -> Result<()> {
        match self {
            BoundaryDatum::Uniaxial { director, s } => {
                if !s.is_finite() {
                    return Err(Error::Precondition("order parameter must be finite".into()));
                }
                check_unit(&Vector3::from(*director))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &Vector3<f64>) -> QTensor {
        match self {
            BoundaryDatum::Zero => QTensor::ZERO,
            BoundaryDatum::Uniaxial { director, s } => QTensor::uniaxial_unchecked(&Vector3::from(*director), *s),
            BoundaryDatum::Smooth { field } => field.eval(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogenization::{ParticleShape, RotationField};
    use crate::lattice::BoxDomain;

    #[test]
    fn bubble_matches_the_product_of_squared_sines() {
        let domain = BoxDomain { lo: [0.0, -0.5, 0.2], hi: [0.6, 0.5, 1.0] };
        let c = QTensor::random(1, 0.5);
        let a = QTensor::random(2, 0.8);
        for p in 1..=3 {
            let f = SmoothField::bubble(&domain, c, a, p);
            for x in [[0.1, 0.2, 0.3], [0.3, 0.0, 0.6], [0.55, -0.4, 0.95], [0.0, 0.1, 0.5]] {
                let b: f64 = (0..3)
                    .map(|k| {
                        let t = std::f64::consts::PI * (x[k] - domain.lo[k]) / (domain.hi[k] - domain.lo[k]);
                        t.sin().powi(2 * p as i32)
                    })
                    .product();
                let want = c + b * a;
                assert!((f.eval(&Vector3::from(x)) - want).norm() < 1e-13, "p = {p}");
            }
        }
        assert_eq!(SmoothField::bubble(&domain, c, a, 1).modes.len(), 13);
    }

    #[test]
    fn smooth_field_gradient_matches_differences() {
        let f = SmoothField::random(3, 4, 6.0, 0.5);
        let x = Vector3::new(0.3, 0.7, 0.2);
        let d = f.gradient(&x);
        let t = 1e-6;
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = t;
            let fd = (f.eval(&(x + e)) - f.eval(&(x - e))).0.map(|v| v / (2.0 * t));
            for a in 0..5 {
                assert!((fd[a] - d[k].0[a]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn masks_and_fractions_match_the_geometry() {
        let grid = Grid::new(BoxDomain::unit_cube(), [40, 40, 40]).unwrap();
        let cfg = InclusionConfig::from_centers(
            vec![Vector3::new(0.5, 0.5, 0.5)],
            0.5,
            1.3,
            ParticleShape::Sphere,
            &RotationField::Identity,
        )
        .unwrap();
        let r = cfg.scale();
        let mut f = DiscreteField::constant(grid, QTensor::ZERO);
        f.mask_inclusions(&cfg);
        let masked = f.count(NodeLabel::Masked) as f64 * grid.cell_volume();
        let ball = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        assert!((masked - ball).abs() < 0.1 * ball, "{masked} {ball}");
        let frac = cell_fractions(&grid, &cfg, 4);
        let fluid: f64 = frac.iter().sum::<f64>() * grid.cell_volume();
        assert!((fluid - (1.0 - ball)).abs() < 2e-3 * ball.max(1e-2), "{fluid}");
        assert_eq!(f.count(NodeLabel::Dirichlet), 41usize.pow(3) - 39usize.pow(3));
    }
}
