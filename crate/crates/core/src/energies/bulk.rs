use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qtensor::QTensor;

/// Bulk potential as a polynomial in `tr Q²` and `tr Q³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BulkSpec {
    /// `a tr Q² − b tr Q³ + c (tr Q²)²`
    Quartic { a: f64, b: f64, c: f64 },
    /// `a2 tr Q² − a3 tr Q³ + a4 (tr Q²)² + a5 tr Q² tr Q³ + a6 (tr Q²)³ + a6p (tr Q³)²`
    Sextic { a2: f64, a3: f64, a4: f64, a5: f64, a6: f64, a6p: f64 },
}

impl BulkSpec {
    pub fn quartic(a: f64, b: f64, c: f64) -> Self {
        BulkSpec::Quartic { a, b, c }
    }

    /// Checks the family gate. Quartic potentials are accepted for any
    /// finite coefficients; positivity of `c` is enforced where it is needed
    /// (surface design, `s_plus`).
    pub fn validate(&self) -> Result<()> {
        match *self {
            BulkSpec::Quartic { a, b, c } => {
                if ![a, b, c].iter().all(|x| x.is_finite()) {
                    return Err(Error::Precondition("non-finite quartic coefficient".into()));
                }
            }
            BulkSpec::Sextic { a2, a3, a4, a5, a6, a6p } => {
                if ![a2, a3, a4, a5, a6, a6p].iter().all(|x| x.is_finite()) {
                    return Err(Error::Precondition("non-finite sextic coefficient".into()));
                }
                if a6 <= 0.0 {
                    return Err(Error::gate("sextic growth", "a6 > 0"));
                }
                if 6.0 * a6 + a6p <= 0.0 {
                    return Err(Error::gate("sextic growth", "6 a6 + a6′ > 0"));
                }
            }
        }
        Ok(())
    }

    /// Value and partial derivatives `(f, ∂f/∂i2, ∂f/∂i3)`.
    pub fn eval_invariants(&self, i2: f64, i3: f64) -> (f64, f64, f64) {
        match *self {
            BulkSpec::Quartic { a, b, c } => (a * i2 - b * i3 + c * i2 * i2, a + 2.0 * c * i2, -b),
            BulkSpec::Sextic { a2, a3, a4, a5, a6, a6p } => {
                let f = a2 * i2 - a3 * i3 + a4 * i2 * i2 + a5 * i2 * i3 + a6 * i2 * i2 * i2 + a6p * i3 * i3;
                let d2 = a2 + 2.0 * a4 * i2 + a5 * i3 + 3.0 * a6 * i2 * i2;
                let d3 = -a3 + a5 * i2 + 2.0 * a6p * i3;
                (f, d2, d3)
            }
        }
    }

    /// Sextic growth rate: `f(Q) ≥ μ |Q|⁶ − C` holds with this `μ` (zero for
    /// quartic potentials). Uses `(tr Q³)² ≤ (tr Q²)³ / 6`.
    pub fn sextic_growth_rate(&self) -> f64 {
        match *self {
            BulkSpec::Quartic { .. } => 0.0,
            BulkSpec::Sextic { a6, a6p, .. } => a6 + a6p.min(0.0) / 6.0,
        }
    }
}

pub fn bulk_energy(spec: &BulkSpec, q: &QTensor) -> f64 {
    let inv = q.invariants();
    spec.eval_invariants(inv.i2, inv.i3).0
}

/// Gradient in the orthonormal 5-vector coordinates (equivalently, the
/// projection of the matrix derivative onto the trace-free symmetric space).
pub fn bulk_gradient(spec: &BulkSpec, q: &QTensor) -> QTensor {
    let m = q.matrix();
    let m2 = m * m;
    let i2 = q.norm_sq();
    let i3 = (m2 * m).trace();
    let (_, d2, d3) = spec.eval_invariants(i2, i3);
    (2.0 * d2) * *q + (3.0 * d3) * QTensor::project(&m2)
}

/// Bulk value and gradient in one pass.
pub fn bulk_energy_and_gradient(spec: &BulkSpec, q: &QTensor) -> (f64, QTensor) {
    let m = q.matrix();
    let m2 = m * m;
    let i2 = q.norm_sq();
    let i3 = (m2 * m).trace();
    let (f, d2, d3) = spec.eval_invariants(i2, i3);
    (f, (2.0 * d2) * *q + (3.0 * d3) * QTensor::project(&m2))
}

/// Profile `s ↦ f_b(s(n⊗n − Id/3))` of the quartic potential.
pub fn uniaxial_profile(a: f64, b: f64, c: f64, s: f64) -> f64 {
    a * (2.0 / 3.0) * s * s - b * (2.0 / 9.0) * s * s * s + c * (4.0 / 9.0) * s.powi(4)
}

/// Minimiser over `s ≥ 0` of the uniaxial profile of the quartic potential.
///
/// Found by a coarse scan over a bracket that provably contains the
/// minimiser, golden-section refinement and a final Newton polish on the
/// derivative. Returns 0 in the isotropic regime.
pub fn s_plus(a: f64, b: f64, c: f64) -> Result<f64> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::gate("quartic bulk", "c > 0"));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Precondition("non-finite bulk coefficient".into()));
    }
    let f = |s: f64| uniaxial_profile(a, b, c, s);
    // every positive critical point lies below twice the larger of the
    // root bounds of (16/9) c s² − (2/3)|b| s − (4/3)|a|
    let upper = 1.0 + 2.0 * (0.375 * b.abs() / c).max((0.75 * a.abs() / c).sqrt());
    let n = 2000;
    let mut best = (0.0, f(0.0));
    for i in 1..=n {
        let s = upper * i as f64 / n as f64;
        let v = f(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    if best.0 == 0.0 {
        return Ok(0.0);
    }
    let step = upper / n as f64;
    let (mut lo, mut hi) = ((best.0 - step).max(0.0), best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-14 * (1.0 + hi) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..4 {
        let d1 = (4.0 / 3.0) * a * s - (2.0 / 3.0) * b * s * s + (16.0 / 9.0) * c * s * s * s;
        let d2 = (4.0 / 3.0) * a - (4.0 / 3.0) * b * s + (16.0 / 3.0) * c * s * s;
        if d2 <= 0.0 {
            break;
        }
        let next = s - d1 / d2;
        if (next - s).abs() > step {
            break;
        }
        s = next;
    }
    if f(s) > 0.0 {
        return Ok(0.0);
    }
    Ok(s)
}
