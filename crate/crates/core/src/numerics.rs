//! Shared numerical defaults, deterministic reductions and small quadrature helpers.

use std::sync::RwLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Tolerances used by validity gates across the crate.
///
/// A single process-wide instance is consulted by the gates; callers may
/// override it with [`set_numerics`] (for example from a run configuration).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Allowed asymmetry / trace of a Q-tensor built from a raw matrix.
    pub symmetry_tol: f64,
    /// Allowed deviation of a direction from unit length.
    pub unit_tol: f64,
    /// Eigenvalue gap below which the eigen-solver runs Jacobi refinement.
    pub eigen_gap_tol: f64,
    /// Allowed deviation of a rotation from orthogonality.
    pub orthogonality_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { symmetry_tol: 1e-12, unit_tol: 1e-10, eigen_gap_tol: 1e-7, orthogonality_tol: 1e-10 }
    }
}

static NUMERICS: RwLock<Numerics> =
    RwLock::new(Numerics { symmetry_tol: 1e-12, unit_tol: 1e-10, eigen_gap_tol: 1e-7, orthogonality_tol: 1e-10 });

/// Current process-wide numerics configuration.
pub fn numerics() -> Numerics {
    *NUMERICS.read().unwrap_or_else(|e| e.into_inner())
}

/// Replace the process-wide numerics configuration.
pub fn set_numerics(n: Numerics) {
    *NUMERICS.write().unwrap_or_else(|e| e.into_inner()) = n;
}

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pairwise (cascade) summation. Order of operations depends only on the
/// slice length, so results are reproducible bit for bit.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of log|y| against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    fit_slope(&lx, &ly)
}
