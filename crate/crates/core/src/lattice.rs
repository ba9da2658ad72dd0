//! Dilute inclusion families on a periodic lattice.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogenization::mesh::build_mesh;
use crate::homogenization::rotation::RotationField;
use crate::homogenization::shape::ParticleShape;
use crate::numerics::pairwise_sum;

/// Axis-aligned box `[lo, hi]` in the closed positive octant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDomain {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoxDomain {
    pub fn unit_cube() -> Self {
        BoxDomain { lo: [0.0; 3], hi: [1.0; 3] }
    }

    pub fn cube(side: f64) -> Self {
        BoxDomain { lo: [0.0; 3], hi: [side; 3] }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if !(self.hi[k] > self.lo[k]) || self.lo[k] < 0.0 || !self.hi[k].is_finite() {
                return Err(Error::Precondition(format!("invalid box domain {self:?}")));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn edges(&self) -> [f64; 3] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1], self.hi[2] - self.lo[2]]
    }

    /// Distance to the boundary for points inside; zero outside.
    pub fn dist_to_boundary(&self, x: &Vector3<f64>) -> f64 {
        (0..3).map(|k| (x[k] - self.lo[k]).min(self.hi[k] - x[k])).fold(f64::INFINITY, f64::min).max(0.0)
    }

    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        (0..3).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k])
    }
}

/// Validity of the dilution exponent, `1 < α < 3/2`.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 1.5 {
        Ok(())
    } else {
        Err(Error::gate("H1", "1 < alpha < 3/2"))
    }
}

/// Inclusions `xᵢ + ε^α Rᵢ P`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionConfig {
    pub eps: f64,
    pub alpha: f64,
    pub centers: Vec<Vector3<f64>>,
    pub rotations: Vec<Matrix3<f64>>,
    pub shape: ParticleShape,
    /// Non-fatal hypothesis violations noticed during construction.
    pub warnings: Vec<String>,
}

impl InclusionConfig {
    /// Periodic family on `domain` with orientations sampled from `field`.
    /// An out-of-range `α` is recorded as a warning, not rejected.
    pub fn periodic(
        domain: &BoxDomain,
        eps: f64,
        alpha: f64,
        shape: ParticleShape,
        field: &RotationField,
    ) -> Result<Self> {
        let centers = periodic_centers(domain, eps)?;
        Self::from_centers(centers, eps, alpha, shape, field)
    }

    pub fn from_centers(
        centers: Vec<Vector3<f64>>,
        eps: f64,
        alpha: f64,
        shape: ParticleShape,
        field: &RotationField,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Precondition("eps must be positive".into()));
        }
        shape.validate()?;
        field.validate()?;
        let mut warnings = Vec::new();
        if let Err(e) = check_alpha(alpha) {
            warnings.push(e.to_string());
        }
        let rotations = centers.iter().map(|c| field.at(c)).collect();
        Ok(InclusionConfig { eps, alpha, centers, rotations, shape, warnings })
    }

    /// Particle scale `ε^α`.
    pub fn scale(&self) -> f64 {
        self.eps.powf(self.alpha)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Point of inclusion `i` in reference coordinates.
    pub fn to_reference(&self, i: usize, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotations[i].transpose() * (x - self.centers[i]) / self.scale()
    }

    /// Whether `x` lies in the closed inclusion `i`.
    pub fn inclusion_contains(&self, i: usize, x: &Vector3<f64>) -> bool {
        let s = self.scale();
        if (x - self.centers[i]).norm() > s * self.shape.bounding_radius() {
            return false;
        }
        self.shape.contains(&self.to_reference(i, x))
    }

    /// Whether the inclusions inflated by `factor` are pairwise disjoint
    /// (checked through bounding spheres, hence sufficient).
    pub fn pairwise_disjoint(&self, factor: f64) -> bool {
        let reach = 2.0 * factor * self.scale() * self.shape.bounding_radius();
        min_pair_distance(&self.centers) > reach
    }

    pub fn write_centers_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,z")?;
        for c in &self.centers {
            writeln!(w, "{},{},{}", c.x, c.y, c.z)?;
        }
        Ok(())
    }
}

/// Largest `ε` for which the periodic family inflated by `factor` is
/// certainly disjoint: `2 factor ε^α r_P < ε`.
pub fn disjointness_threshold(alpha: f64, shape: &ParticleShape, factor: f64) -> f64 {
    (1.0 / (2.0 * factor * shape.bounding_radius())).powf(1.0 / (alpha - 1.0))
}

fn lattice_ranges(domain: &BoxDomain, eps: f64) -> Result<[std::ops::RangeInclusive<i64>; 3]> {
    domain.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let tol = 1e-9 * eps;
    Ok(std::array::from_fn(|k| {
        let first = ((domain.lo[k] + eps - tol) / eps).ceil() as i64;
        let last = ((domain.hi[k] - eps + tol) / eps).floor() as i64;
        first..=last
    }))
}

/// Lattice points `y ∈ εℤ³` with `dist(y, ∂Ω) ≥ ε`, in lexicographic order.
pub fn periodic_centers(domain: &BoxDomain, eps: f64) -> Result<Vec<Vector3<f64>>> {
    let [ri, rj, rl] = lattice_ranges(domain, eps)?;
    let mut out = Vec::new();
    for i in ri {
        for j in rj.clone() {
            for l in rl.clone() {
                out.push(Vector3::new(i as f64 * eps, j as f64 * eps, l as f64 * eps));
            }
        }
    }
    Ok(out)
}

/// Number of points [`periodic_centers`] would return, without building them.
pub fn periodic_count(domain: &BoxDomain, eps: f64) -> Result<usize> {
    let r = lattice_ranges(domain, eps)?;
    Ok(r.iter().map(|x| x.clone().count()).product())
}

fn min_pair_distance(centers: &[Vector3<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..centers.len() {
        for j in 0..i {
            best = best.min((centers[i] - centers[j]).norm());
        }
    }
    best
}

/// `min_i (dist(xᵢ, ∂Ω) + ½ min_{j≠i} |xⱼ − xᵢ|) / ε`. The inner minimum
/// over an empty set is `+∞`, so a single centre contributes its boundary
/// term only.
pub fn check_separation(config: &InclusionConfig, domain: &BoxDomain) -> Result<f64> {
    if config.centers.is_empty() {
        return Err(Error::Precondition("at least one centre required".into()));
    }
    let c = &config.centers;
    let mut best = f64::INFINITY;
    for i in 0..c.len() {
        let nearest = (0..c.len()).filter(|&j| j != i).map(|j| (c[j] - c[i]).norm()).fold(f64::INFINITY, f64::min);
        let half = if nearest.is_finite() { 0.5 * nearest } else { 0.0 };
        best = best.min((domain.dist_to_boundary(&c[i]) + half) / config.eps);
    }
    Ok(best)
}

/// `N ε^{3α} |P|` with `|P|` from the divergence theorem on the shape mesh.
pub fn volume_fraction(config: &InclusionConfig) -> Result<f64> {
    if config.is_empty() {
        return Ok(0.0);
    }
    fraction(config.len(), config.scale(), &config.shape)
}

/// [`volume_fraction`] of the periodic family, counting centres without
/// materialising them (usable down to very small `ε`).
pub fn periodic_volume_fraction(domain: &BoxDomain, eps: f64, alpha: f64, shape: &ParticleShape) -> Result<f64> {
    let n = periodic_count(domain, eps)?;
    if n == 0 {
        return Ok(0.0);
    }
    fraction(n, eps.powf(alpha), shape)
}

fn fraction(n: usize, scale: f64, shape: &ParticleShape) -> Result<f64> {
    let unit = build_mesh(shape, 16)?.volume();
    Ok(n as f64 * scale.powi(3) * unit)
}

pub type ScalarFn = Box<dyn Fn(&Vector3<f64>) -> f64>;

/// Named scalar test function for the empirical-measure check.
pub struct TestFunction {
    pub name: String,
    pub f: ScalarFn,
}

impl TestFunction {
    pub fn new(name: &str, f: impl Fn(&Vector3<f64>) -> f64 + 'static) -> Self {
        TestFunction { name: name.to_string(), f: Box::new(f) }
    }
}

/// Polynomials up to degree two and two smooth bumps.
pub fn standard_test_functions() -> Vec<TestFunction> {
    let bump = |c: Vector3<f64>, w: f64| move |x: &Vector3<f64>| (-(x - c).norm_squared() / (w * w)).exp();
    vec![
        TestFunction::new("one", |_| 1.0),
        TestFunction::new("x1", |x| x.x),
        TestFunction::new("x2*x3", |x| x.y * x.z),
        TestFunction::new("x1^2", |x| x.x * x.x),
        TestFunction::new("bump_centre", bump(Vector3::new(0.5, 0.5, 0.5), 0.3)),
        TestFunction::new("bump_corner", bump(Vector3::new(0.2, 0.7, 0.4), 0.15)),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub function: String,
    pub eps: f64,
    pub lattice_sum: f64,
    pub integral: f64,
    pub error: f64,
}

/// `|ε³ Σᵢ f(xᵢ) − ∫_Ω f|` per test function and `ε`; the integral is a
/// midpoint sum with `grid` cells per axis.
pub fn measure_convergence_check(
    domain: &BoxDomain,
    eps_list: &[f64],
    functions: &[TestFunction],
    grid: usize,
) -> Result<Vec<MeasureRow>> {
    let e = domain.edges();
    let cell = domain.volume() / (grid * grid * grid) as f64;
    let mut rows = Vec::new();
    for tf in functions {
        let mut vals = Vec::with_capacity(grid * grid * grid);
        for i in 0..grid {
            for j in 0..grid {
                for k in 0..grid {
                    let x = Vector3::new(
                        domain.lo[0] + e[0] * (i as f64 + 0.5) / grid as f64,
                        domain.lo[1] + e[1] * (j as f64 + 0.5) / grid as f64,
                        domain.lo[2] + e[2] * (k as f64 + 0.5) / grid as f64,
                    );
                    vals.push((tf.f)(&x));
                }
            }
        }
        let integral = pairwise_sum(&vals) * cell;
        for &eps in eps_list {
            let centers = periodic_centers(domain, eps)?;
            let v: Vec<f64> = centers.iter().map(|c| (tf.f)(c)).collect();
            let lattice_sum = eps.powi(3) * pairwise_sum(&v);
            rows.push(MeasureRow {
                function: tf.name.clone(),
                eps,
                lattice_sum,
                integral,
                error: (lattice_sum - integral).abs(),
            });
        }
    }
    Ok(rows)
}
