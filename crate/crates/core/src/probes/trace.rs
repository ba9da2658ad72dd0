//! Empirical constant of the shell trace inequality
//! `∫_{∂(aP)} |u|^p ≤ C ∫_{bP∖aP} (|∇u|² + |u|^{2p−2}) + (C a²/b³) ∫_{bP∖aP} |u|^p`.
//!
//! Integrals use polar coordinates around the origin, `x = ρω` with
//! `a r(ω) < ρ < b r(ω)` and `r` the radial function of `P`. On the inner
//! boundary `dσ = a² r(ω)³ |∇g| dω`, with `g(x) = |x| / r(x/|x|)` the gauge.
//! For a fixed profile the amplitude is swept, since the three terms scale
//! differently in it.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogenization::ParticleShape;
use crate::numerics::{gauss_legendre, pairwise_sum};

/// Scalar profiles, written in the coordinate `y = x / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Constant,
    /// `y₁`.
    Linear,
    /// `1 + y₁y₂ − y₃²/2`.
    Quadratic,
    /// `|y|^power`.
    RadialPower {
        power: f64,
    },
    /// `|y| − 1`, which vanishes on the unit sphere.
    RadialShift,
    /// `cos(k y₁) sin(k y₂ + 1) + 1/2`.
    Oscillatory {
        k: f64,
    },
    /// `exp(−λ(|y| − 1))`, concentrated at the inner boundary.
    BoundaryLayer {
        lambda: f64,
    },
}

impl TestFunction {
    pub fn eval(&self, y: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let n = y.norm();
        match *self {
            TestFunction::Constant => (1.0, Vector3::zeros()),
            TestFunction::Linear => (y.x, Vector3::x()),
            TestFunction::Quadratic => (1.0 + y.x * y.y - 0.5 * y.z * y.z, Vector3::new(y.y, y.x, -y.z)),
            TestFunction::RadialPower { power } => (n.powf(power), power * n.powf(power - 2.0) * y),
            TestFunction::RadialShift => (n - 1.0, y / n),
            TestFunction::Oscillatory { k } => {
                let (c, s) = ((k * y.x).cos(), (k * y.y + 1.0).sin());
                (c * s + 0.5, Vector3::new(-k * (k * y.x).sin() * s, k * c * (k * y.y + 1.0).cos(), 0.0))
            }
            TestFunction::BoundaryLayer { lambda } => {
                let v = (-lambda * (n - 1.0)).exp();
                (v, -lambda * v / n * y)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Constant => "constant".into(),
            TestFunction::Linear => "linear".into(),
            TestFunction::Quadratic => "quadratic".into(),
            TestFunction::RadialPower { power } => format!("radial_power_{power}"),
            TestFunction::RadialShift => "radial_shift".into(),
            TestFunction::Oscillatory { k } => format!("oscillatory_{k}"),
            TestFunction::BoundaryLayer { lambda } => format!("boundary_layer_{lambda}"),
        }
    }

    pub fn default_family() -> Vec<TestFunction> {
        vec![
            TestFunction::Constant,
            TestFunction::Linear,
            TestFunction::Quadratic,
            TestFunction::RadialPower { power: -1.0 },
            TestFunction::RadialPower { power: 2.0 },
            TestFunction::RadialShift,
            TestFunction::Oscillatory { k: 3.0 },
            TestFunction::BoundaryLayer { lambda: 4.0 },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceParams {
    pub shape: ParticleShape,
    pub p: f64,
    /// `(a, b)` pairs with `b ≥ 2a`.
    pub pairs: Vec<(f64, f64)>,
    pub family: Vec<TestFunction>,
    /// Polar nodes; the azimuth gets twice as many.
    pub angular_order: usize,
    pub radial_order: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        let mut pairs = Vec::new();
        for a in [0.1, 1.0] {
            for ratio in [2.0, 4.0, 8.0] {
                pairs.push((a, ratio * a));
            }
        }
        TraceParams {
            shape: ParticleShape::Sphere,
            p: 3.0,
            pairs,
            family: TestFunction::default_family(),
            angular_order: 24,
            radial_order: 32,
        }
    }
}

/// One test function on one shell, at unit amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub a: f64,
    pub b: f64,
    pub function: String,
    /// `∫_{∂(aP)} |u|^p`.
    pub lhs: f64,
    /// `∫ |∇u|²` over the shell.
    pub gradient: f64,
    /// `∫ |u|^{2p−2}` over the shell.
    pub power: f64,
    /// `∫ |u|^p` over the shell.
    pub volume: f64,
    /// Smallest admissible `C`, maximised over the amplitude sweep.
    pub constant: f64,
    /// Amplitude attaining it.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub p: f64,
    pub rows: Vec<TraceRow>,
    /// Family maximum of the constant per `(a, b)` pair.
    pub family_max: Vec<(f64, f64, f64)>,
    /// Largest over smallest family maximum across pairs.
    pub spread: f64,
}

impl TraceReport {
    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| r.constant.is_finite() && r.constant >= 0.0)
    }
}

fn gauge(shape: &ParticleShape, x: &Vector3<f64>) -> f64 {
    let n = x.norm();
    n / shape.radial_function(&(x / n))
}

fn gauge_gradient_norm(shape: &ParticleShape, x: &Vector3<f64>) -> f64 {
    if matches!(shape, ParticleShape::Sphere) {
        return 1.0;
    }
    let h = 1e-7 * x.norm();
    let g = Vector3::from_fn(|i, _| {
        let mut e = Vector3::zeros();
        e[i] = h;
        (gauge(shape, &(x + e)) - gauge(shape, &(x - e))) / (2.0 * h)
    });
    g.norm()
}

/// Smallest `C` with `s^p L ≤ C (s² G + s^{2p−2} W + s^p (a²/b³) V)`,
/// maximised over amplitudes `s` on a log grid.
fn worst_constant(p: f64, a: f64, b: f64, lhs: f64, grad: f64, pow: f64, vol: f64) -> (f64, f64) {
    if lhs == 0.0 {
        return (0.0, 1.0);
    }
    let mut best = (0.0, 1.0);
    for i in 0..=1200 {
        let s = 10f64.powf(-6.0 + i as f64 / 100.0);
        let rhs = s * s * grad + s.powf(2.0 * p - 2.0) * pow + s.powf(p) * a * a / b.powi(3) * vol;
        let c = s.powf(p) * lhs / rhs;
        if c > best.0 {
            best = (c, s);
        }
    }
    best
}

pub fn trace_inequality_check(params: &TraceParams) -> Result<TraceReport> {
    let p = params.p;
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::gate("trace inequality", "p in [2, 4]"));
    }
    params.shape.validate()?;
    if params.pairs.is_empty() || params.family.is_empty() {
        return Err(Error::Precondition("trace check needs shells and test functions".into()));
    }
    for &(a, b) in &params.pairs {
        if !(a > 0.0 && b >= 2.0 * a) {
            return Err(Error::gate("trace inequality", "a > 0 and b >= 2a"));
        }
    }
    let (ct, wt) = gauss_legendre(params.angular_order.max(2));
    let (xr, wr) = gauss_legendre(params.radial_order.max(2));
    let n_phi = 2 * params.angular_order.max(2);
    let mut dirs = Vec::with_capacity(ct.len() * n_phi);
    for (c, w) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for k in 0..n_phi {
            let t = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
            dirs.push((Vector3::new(s * t.cos(), s * t.sin(), *c), w * 2.0 * PI / n_phi as f64));
        }
    }

    let mut rows = Vec::new();
    for &(a, b) in &params.pairs {
        for f in &params.family {
            let (mut lhs, mut grad, mut pow, mut vol) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (w, dw) in &dirs {
                let r = params.shape.radial_function(w);
                let x0 = a * r * w;
                let (u0, _) = f.eval(&(x0 / a));
                lhs.push(dw * a * a * r.powi(3) * gauge_gradient_norm(&params.shape, &x0) * u0.abs().powf(p));
                let (lo, hi) = (a * r, b * r);
                for (xi, wi) in xr.iter().zip(&wr) {
                    let rho = lo + 0.5 * (hi - lo) * (xi + 1.0);
                    let jac = dw * 0.5 * (hi - lo) * wi * rho * rho;
                    let (u, du) = f.eval(&(rho / a * w));
                    // ∇ₓu = ∇_y U / a
                    grad.push(jac * du.norm_squared() / (a * a));
                    pow.push(jac * u.abs().powf(2.0 * p - 2.0));
                    vol.push(jac * u.abs().powf(p));
                }
            }
            let (lhs, grad, pow, vol) =
                (pairwise_sum(&lhs), pairwise_sum(&grad), pairwise_sum(&pow), pairwise_sum(&vol));
            let (constant, amplitude) = worst_constant(p, a, b, lhs, grad, pow, vol);
            rows.push(TraceRow {
                a,
                b,
                function: f.label(),
                lhs,
                gradient: grad,
                power: pow,
                volume: vol,
                constant,
                amplitude,
            });
        }
    }
    let family_max: Vec<(f64, f64, f64)> = params
        .pairs
        .iter()
        .map(|&(a, b)| {
            let c = rows.iter().filter(|r| r.a == a && r.b == b).map(|r| r.constant).fold(0.0, f64::max);
            (a, b, c)
        })
        .collect();
    let hi = family_max.iter().map(|t| t.2).fold(0.0, f64::max);
    let lo = family_max.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    Ok(TraceReport { p, rows, family_max, spread: hi / lo })
}
