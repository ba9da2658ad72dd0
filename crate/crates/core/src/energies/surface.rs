use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng;
use crate::qtensor::{check_unit, random_orthogonal, random_unit, QTensor};

/// The four scalar invariants of a pair `(Q, ν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceInvariants {
    /// `tr Q²`
    pub i2: f64,
    /// `tr Q³`
    pub i3: f64,
    /// `ν·Qν`
    pub p: f64,
    /// `ν·Q²ν`
    pub r: f64,
}

impl SurfaceInvariants {
    pub fn of(q: &QTensor, nu: &Vector3<f64>) -> Self {
        let m = q.matrix();
        let qn = m * nu;
        SurfaceInvariants { i2: q.norm_sq(), i3: (m * m * m).trace(), p: nu.dot(&qn), r: qn.norm_squared() }
    }
}

/// A user density written as a function of the four invariants only.
#[derive(Clone)]
pub struct InvariantDensity {
    pub name: String,
    f: Arc<dyn Fn(&SurfaceInvariants) -> f64 + Send + Sync>,
}

impl InvariantDensity {
    pub fn new(name: &str, f: impl Fn(&SurfaceInvariants) -> f64 + Send + Sync + 'static) -> Self {
        InvariantDensity { name: name.to_string(), f: Arc::new(f) }
    }

    pub fn eval(&self, inv: &SurfaceInvariants) -> f64 {
        (self.f)(inv)
    }
}

impl fmt::Debug for InvariantDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InvariantDensity({})", self.name)
    }
}

impl PartialEq for InvariantDensity {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// Surface anchoring energy family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// `W tr(Q − s₊(ν⊗ν − Id/3))²`
    RapiniPapoular { w: f64, s_plus: f64 },
    /// Quadratic-in-`ν·Q²ν` family that homogenises on the unit sphere to a
    /// shift of the quartic coefficients from `(a, b, c)` to `(a′, b′, c′)`.
    Designed { a: f64, b: f64, c: f64, a_prime: f64, b_prime: f64, c_prime: f64 },
    /// As `Designed`, with the `ν·Q²ν` term replaced by `(ν·Qν)²`.
    Alternative { a: f64, b: f64, c: f64, a_prime: f64, b_prime: f64, c_prime: f64 },
    /// `(a′ − a)/(4π) tr(Q − Q_ν)²` with `Q_ν = ν⊗ν − Id/3`; only shifts `a`.
    /// The `Q`-independent part is dropped unless `include_constant`.
    RpDelta {
        a: f64,
        b: f64,
        c: f64,
        a_prime: f64,
        b_prime: f64,
        c_prime: f64,
        #[serde(default)]
        include_constant: bool,
    },
    /// Arbitrary function of `(tr Q², tr Q³, ν·Qν, ν·Q²ν)`.
    #[serde(skip)]
    CustomInvariant(InvariantDensity),
}

/// Coefficients of the polynomial
/// `k_i2 i2 + k_p p + k_r r + k_pp p² + k_pr p r + k_rr r² + k0`
/// shared by every built-in family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolyCoeffs {
    pub k_i2: f64,
    pub k_p: f64,
    pub k_r: f64,
    pub k_pp: f64,
    pub k_pr: f64,
    pub k_rr: f64,
    pub k0: f64,
}

impl PolyCoeffs {
    fn eval(&self, inv: &SurfaceInvariants) -> f64 {
        let (p, r) = (inv.p, inv.r);
        self.k_i2 * inv.i2
            + self.k_p * p
            + self.k_r * r
            + self.k_pp * p * p
            + self.k_pr * p * r
            + self.k_rr * r * r
            + self.k0
    }
}

impl SurfaceSpec {
    /// The identically vanishing density.
    pub fn zero() -> Self {
        SurfaceSpec::Designed { a: 0.0, b: 0.0, c: 0.0, a_prime: 0.0, b_prime: 0.0, c_prime: 0.0 }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SurfaceSpec::RapiniPapoular { .. } => "rapini_papoular",
            SurfaceSpec::Designed { .. } => "designed",
            SurfaceSpec::Alternative { .. } => "alternative",
            SurfaceSpec::RpDelta { .. } => "rp_delta",
            SurfaceSpec::CustomInvariant(_) => "custom_invariant",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SurfaceSpec::RapiniPapoular { w, s_plus } => {
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::gate("rapini_papoular", "W > 0"));
                }
                if !s_plus.is_finite() {
                    return Err(Error::Precondition("non-finite s_plus".into()));
                }
            }
            SurfaceSpec::RpDelta { a, b, c, a_prime, b_prime, c_prime, .. } => {
                if b_prime != b {
                    return Err(Error::gate("rp_delta", "b′ = b"));
                }
                if c_prime != c {
                    return Err(Error::gate("rp_delta", "c′ = c"));
                }
                if !(a_prime > a) {
                    return Err(Error::gate("rp_delta", "a′ > a"));
                }
            }
            SurfaceSpec::Designed { a, b, c, a_prime, b_prime, c_prime }
            | SurfaceSpec::Alternative { a, b, c, a_prime, b_prime, c_prime } => {
                if ![a, b, c, a_prime, b_prime, c_prime].iter().all(|x| x.is_finite()) {
                    return Err(Error::Precondition("non-finite coefficient".into()));
                }
            }
            SurfaceSpec::CustomInvariant(_) => {}
        }
        Ok(())
    }

    /// Polynomial coefficients for built-in families, `None` for custom densities.
    pub fn poly(&self) -> Option<PolyCoeffs> {
        let k = 15.0 / (8.0 * PI);
        Some(match *self {
            SurfaceSpec::RapiniPapoular { w, s_plus } => PolyCoeffs {
                k_i2: w,
                k_p: -2.0 * w * s_plus,
                k0: w * s_plus * s_plus * 2.0 / 3.0,
                ..Default::default()
            },
            SurfaceSpec::Designed { a, b, c, a_prime, b_prime, c_prime } => PolyCoeffs {
                k_r: 3.0 / (4.0 * PI) * (a_prime - a),
                k_pr: k * (b - b_prime),
                k_rr: k * (c_prime - c),
                ..Default::default()
            },
            SurfaceSpec::Alternative { a, b, c, a_prime, b_prime, c_prime } => PolyCoeffs {
                k_pp: k * (a_prime - a),
                k_pr: k * (b - b_prime),
                k_rr: k * (c_prime - c),
                ..Default::default()
            },
            SurfaceSpec::RpDelta { a, a_prime, include_constant, .. } => {
                let kappa = (a_prime - a) / (4.0 * PI);
                PolyCoeffs {
                    k_i2: kappa,
                    k_p: -2.0 * kappa,
                    k0: if include_constant { kappa * 2.0 / 3.0 } else { 0.0 },
                    ..Default::default()
                }
            }
            SurfaceSpec::CustomInvariant(_) => return None,
        })
    }

    /// Additive constant carried by the homogenised density on the unit sphere.
    pub fn hom_constant(&self) -> f64 {
        match *self {
            SurfaceSpec::RpDelta { a, a_prime, include_constant: true, .. } => (2.0 / 3.0) * (a_prime - a),
            _ => 0.0,
        }
    }

    /// Evaluates through the four invariants only.
    pub fn eval_invariants(&self, inv: &SurfaceInvariants) -> f64 {
        match self {
            SurfaceSpec::CustomInvariant(d) => d.eval(inv),
            _ => self.poly().map(|c| c.eval(inv)).unwrap_or(0.0),
        }
    }
}

/// Any pointwise surface density `f(Q, ν)`. Built-in families implement it
/// through [`surface_energy`]; test fixtures may plant raw densities.
pub trait SurfaceDensity {
    fn density(&self, q: &QTensor, nu: &Vector3<f64>) -> f64;
}

impl SurfaceDensity for SurfaceSpec {
    fn density(&self, q: &QTensor, nu: &Vector3<f64>) -> f64 {
        surface_energy_unchecked(self, q, nu)
    }
}

impl<F: Fn(&QTensor, &Vector3<f64>) -> f64> SurfaceDensity for F {
    fn density(&self, q: &QTensor, nu: &Vector3<f64>) -> f64 {
        self(q, nu)
    }
}

/// Surface density with validation of `ν` and of the spec.
pub fn surface_energy(spec: &SurfaceSpec, q: &QTensor, nu: &Vector3<f64>) -> Result<f64> {
    check_unit(nu)?;
    spec.validate()?;
    Ok(surface_energy_unchecked(spec, q, nu))
}

/// Surface density evaluated from its defining matrix expression.
pub fn surface_energy_unchecked(spec: &SurfaceSpec, q: &QTensor, nu: &Vector3<f64>) -> f64 {
    let m = q.matrix();
    let q_nu = nu * nu.transpose() - Matrix3::identity() / 3.0;
    match *spec {
        SurfaceSpec::RapiniPapoular { w, s_plus } => w * (m - q_nu * s_plus).norm_squared(),
        SurfaceSpec::RpDelta { a, a_prime, include_constant, .. } => {
            let kappa = (a_prime - a) / (4.0 * PI);
            let full = (m - q_nu).norm_squared();
            kappa * if include_constant { full } else { full - 2.0 / 3.0 }
        }
        SurfaceSpec::Designed { .. } | SurfaceSpec::Alternative { .. } => {
            let qn = m * nu;
            let p = nu.dot(&qn);
            let r = qn.dot(&qn);
            let c = spec.poly().unwrap_or_default();
            c.k_r * r + c.k_pp * p * p + c.k_pr * p * r + c.k_rr * r * r
        }
        SurfaceSpec::CustomInvariant(ref d) => d.eval(&SurfaceInvariants::of(q, nu)),
    }
}

/// Same density recomputed through the four-invariant route.
pub fn surface_energy_via_invariants(spec: &SurfaceSpec, q: &QTensor, nu: &Vector3<f64>) -> f64 {
    spec.eval_invariants(&SurfaceInvariants::of(q, nu))
}

/// Value and `Q`-gradient (5-vector coordinates) of the surface density.
pub fn surface_energy_and_gradient(spec: &SurfaceSpec, q: &QTensor, nu: &Vector3<f64>) -> (f64, QTensor) {
    let m = q.matrix();
    let qn = m * nu;
    let p = nu.dot(&qn);
    let r = qn.norm_squared();
    let dp = QTensor::project(&(nu * nu.transpose()));
    let dr = QTensor::project(&(qn * nu.transpose() + nu * qn.transpose()));
    match spec.poly() {
        Some(c) => {
            let inv = SurfaceInvariants { i2: q.norm_sq(), i3: 0.0, p, r };
            let f = c.eval(&inv);
            let fp = c.k_p + 2.0 * c.k_pp * p + c.k_pr * r;
            let fr = c.k_r + c.k_pr * p + 2.0 * c.k_rr * r;
            (f, (2.0 * c.k_i2) * *q + fp * dp + fr * dr)
        }
        None => {
            let m2 = m * m;
            let inv = SurfaceInvariants { i2: q.norm_sq(), i3: (m2 * m).trace(), p, r };
            let f = spec.eval_invariants(&inv);
            // central differences in each invariant
            let partial = |k: usize| {
                let x = [inv.i2, inv.i3, inv.p, inv.r][k];
                let h = 1e-6 * (1.0 + x.abs());
                let shift = |s: f64| {
                    let mut j = inv;
                    match k {
                        0 => j.i2 += s,
                        1 => j.i3 += s,
                        2 => j.p += s,
                        _ => j.r += s,
                    }
                    spec.eval_invariants(&j)
                };
                (shift(h) - shift(-h)) / (2.0 * h)
            };
            let g = (2.0 * partial(0)) * *q
                + (3.0 * partial(1)) * QTensor::project(&m2)
                + partial(2) * dp
                + partial(3) * dr;
            (f, g)
        }
    }
}

/// Largest observed `|f(UQUᵀ, Uν) − f(Q, ν)|` over random `Q`, `ν` and `U ∈ O(3)`.
pub fn invariance_test(f: &dyn SurfaceDensity, n_samples: usize, seed: u64) -> f64 {
    assert!(n_samples > 0, "n_samples must be positive");
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let q = QTensor::random_with(&mut r, 1.0);
        let nu = random_unit(&mut r);
        let u = random_orthogonal(&mut r, true);
        let dev = (f.density(&q.conjugate(&u), &(u * nu)) - f.density(&q, &nu)).abs();
        worst = worst.max(dev);
    }
    worst
}

/// Empirical lower bound for the local Lipschitz constant `λ_s` in
/// `|f(Q₁,ν) − f(Q₂,ν)| ≤ λ_s (|Q₁|³ + |Q₂|³ + 1)|Q₁ − Q₂|`,
/// with norms `|Qᵢ|` uniform in `[0, radius]` and uniform directions.
pub fn growth_constants_estimate(spec: &SurfaceSpec, n_samples: usize, radius: f64, seed: u64) -> f64 {
    assert!(radius > 0.0, "radius must be positive");
    let mut r = rng(seed);
    let sample = |r: &mut rand_chacha::ChaCha8Rng| {
        let dir = QTensor::random_with(r, 1.0);
        let len: f64 = radius * r.gen::<f64>();
        let n = dir.norm();
        if n == 0.0 {
            QTensor::ZERO
        } else {
            (len / n) * dir
        }
    };
    let mut best: f64 = 0.0;
    for _ in 0..n_samples {
        let q1 = sample(&mut r);
        let q2 = sample(&mut r);
        let nu = random_unit(&mut r);
        let dq = (q1 - q2).norm();
        if dq == 0.0 {
            continue;
        }
        let num = (spec.density(&q1, &nu) - spec.density(&q2, &nu)).abs();
        let den = (q1.norm().powi(3) + q2.norm().powi(3) + 1.0) * dq;
        best = best.max(num / den);
    }
    best
}
