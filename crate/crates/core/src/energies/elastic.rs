use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng;
use crate::qtensor::QTensor;

/// Spatial gradient of a Q-tensor field: `d[k] = ∂ₖQ`.
pub type GradQ = [QTensor; 3];

/// 15 × 15 matrix of an elastic quadratic form in the coordinates
/// `(∂₀Q, ∂₁Q, ∂₂Q)`, each in the orthonormal 5-vector basis.
pub type ElasticForm = SMatrix<f64, 15, 15>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElasticSpec {
    /// `|∇Q|²`
    Dirichlet,
    /// `L1 ∂ₖQᵢⱼ∂ₖQᵢⱼ + L2 ∂ⱼQᵢⱼ∂ₖQᵢₖ + L3 ∂ⱼQᵢₖ∂ₖQᵢⱼ`
    FullLdg { l1: f64, l2: f64, l3: f64 },
}

impl ElasticSpec {
    /// Constants `(L1, L2, L3)`; Dirichlet is `(1, 0, 0)`.
    pub fn constants(&self) -> (f64, f64, f64) {
        match *self {
            ElasticSpec::Dirichlet => (1.0, 0.0, 0.0),
            ElasticSpec::FullLdg { l1, l2, l3 } => (l1, l2, l3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ElasticSpec::Dirichlet => Ok(()),
            ElasticSpec::FullLdg { l1, l2, l3 } => elastic_convexity_check(l1, l2, l3),
        }
    }

    pub fn is_dirichlet_like(&self) -> bool {
        let (_, l2, l3) = self.constants();
        l2 == 0.0 && l3 == 0.0
    }

    /// Matrix of the quadratic form, built by polarisation of [`elastic_energy`].
    pub fn form(&self) -> ElasticForm {
        let mut k = ElasticForm::zeros();
        let unit = |i: usize| {
            let mut d = [QTensor::ZERO; 3];
            d[i / 5].0[i % 5] = 1.0;
            d
        };
        for i in 0..15 {
            k[(i, i)] = elastic_energy(self, &unit(i));
            for j in 0..i {
                let mut d = unit(i);
                d[j / 5].0[j % 5] = 1.0;
                let v = 0.5 * (elastic_energy(self, &d) - k[(i, i)] - k[(j, j)]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

/// Strict convexity gate of the three-constant elastic energy.
pub fn elastic_convexity_check(l1: f64, l2: f64, l3: f64) -> Result<()> {
    const GATE: &str = "elastic convexity";
    if !(l1 > 0.0) {
        return Err(Error::gate(GATE, "L1 > 0"));
    }
    if !(-l1 < l3) {
        return Err(Error::gate(GATE, "-L1 < L3"));
    }
    if !(l3 < 2.0 * l1) {
        return Err(Error::gate(GATE, "L3 < 2 L1"));
    }
    if !(-0.6 * l1 - 0.1 * l3 < l2) {
        return Err(Error::gate(GATE, "-(3/5) L1 - (1/10) L3 < L2"));
    }
    Ok(())
}

/// Elastic density of a gradient given per direction.
pub fn elastic_energy(spec: &ElasticSpec, d: &GradQ) -> f64 {
    let (l1, l2, l3) = spec.constants();
    let mut f = l1 * (d[0].norm_sq() + d[1].norm_sq() + d[2].norm_sq());
    if l2 == 0.0 && l3 == 0.0 {
        return f;
    }
    let m = [d[0].matrix(), d[1].matrix(), d[2].matrix()];
    if l2 != 0.0 {
        // divergence vector wᵢ = ∂ⱼQᵢⱼ
        let w: Vector3<f64> = m[0].column(0) + m[1].column(1) + m[2].column(2);
        f += l2 * w.norm_squared();
    }
    if l3 != 0.0 {
        let mut s = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    s += m[j][(i, k)] * m[k][(i, j)];
                }
            }
        }
        f += l3 * s;
    }
    f
}

/// Elastic density from the full 27-component gradient `D[i][j][k] = ∂ₖQᵢⱼ`.
pub fn elastic_energy_full(spec: &ElasticSpec, dfull: &[[[f64; 3]; 3]; 3]) -> Result<f64> {
    let mut d = [QTensor::ZERO; 3];
    for (k, dk) in d.iter_mut().enumerate() {
        let m = Matrix3::from_fn(|i, j| dfull[i][j][k]);
        *dk = QTensor::from_matrix(&m)?;
    }
    Ok(elastic_energy(spec, &d))
}

/// Gradient of the density with respect to each `∂ₖQ`.
pub fn elastic_gradient(form: &ElasticForm, d: &GradQ) -> GradQ {
    let v = flatten(d);
    let g = form * v * 2.0;
    let mut out = [QTensor::ZERO; 3];
    for k in 0..3 {
        for a in 0..5 {
            out[k].0[a] = g[5 * k + a];
        }
    }
    out
}

pub(crate) fn flatten(d: &GradQ) -> SVector<f64, 15> {
    SVector::<f64, 15>::from_fn(|i, _| d[i / 5].0[i % 5])
}

/// Smallest eigenvalue of the quadratic form (exact, via a dense symmetric solver).
pub fn elastic_min_eigenvalue(spec: &ElasticSpec) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(spec.form());
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Minimum Rayleigh quotient of the form over `n` random unit gradients.
pub fn elastic_min_rayleigh(spec: &ElasticSpec, n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let mut d = [QTensor::ZERO; 3];
        for dk in &mut d {
            for x in &mut dk.0 {
                *x = r.gen_range(-1.0..1.0);
            }
        }
        let norm2: f64 = d.iter().map(|x| x.norm_sq()).sum();
        best = best.min(elastic_energy(spec, &d) / norm2);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_grad(seed: u64) -> GradQ {
        [QTensor::random(seed, 1.0), QTensor::random(seed + 1000, 1.0), QTensor::random(seed + 2000, 1.0)]
    }

    #[test]
    fn examples() {
        let ldg = ElasticSpec::FullLdg { l1: 1.0, l2: 0.0, l3: 0.0 };
        assert_eq!(elastic_energy(&ElasticSpec::Dirichlet, &[QTensor::ZERO; 3]), 0.0);
        let d = random_grad(4);
        let sum_sq: f64 = d.iter().map(|x| x.matrix().norm_squared()).sum();
        assert_relative_eq!(elastic_energy(&ElasticSpec::Dirichlet, &d), sum_sq, epsilon = 1e-13);
        assert_eq!(elastic_energy(&ldg, &d), elastic_energy(&ElasticSpec::Dirichlet, &d));
    }

    #[test]
    fn gate_examples() {
        assert!(elastic_convexity_check(1.0, 0.0, 0.0).is_ok());
        assert!(matches!(elastic_convexity_check(1.0, 0.0, 2.0),
            Err(Error::Gate { inequality, .. }) if inequality == "L3 < 2 L1"));
        assert!(matches!(elastic_convexity_check(1.0, -0.7, 1.0),
            Err(Error::Gate { inequality, .. }) if inequality.ends_with("< L2")));
        assert!(elastic_convexity_check(0.0, 0.0, 0.0).is_err());
        assert!(elastic_convexity_check(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn full_gradient_layout_agrees() {
        let spec = ElasticSpec::FullLdg { l1: 1.2, l2: 0.7, l3: -0.4 };
        let d = random_grad(8);
        let mut full = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            let m = d[k].matrix();
            for i in 0..3 {
                for j in 0..3 {
                    full[i][j][k] = m[(i, j)];
                }
            }
        }
        assert_relative_eq!(elastic_energy_full(&spec, &full).unwrap(), elastic_energy(&spec, &d), epsilon = 1e-13);
    }

    #[test]
    fn form_reproduces_energy_and_gradient() {
        let spec = ElasticSpec::FullLdg { l1: 1.0, l2: 0.3, l3: 0.5 };
        let k = spec.form();
        let d = random_grad(12);
        let v = flatten(&d);
        assert_relative_eq!((v.transpose() * k * v)[(0, 0)], elastic_energy(&spec, &d), epsilon = 1e-12);
        let g = elastic_gradient(&k, &d);
        let p = random_grad(99);
        let h = 1e-5;
        let plus: GradQ = std::array::from_fn(|i| d[i] + h * p[i]);
        let minus: GradQ = std::array::from_fn(|i| d[i] - h * p[i]);
        let fd = (elastic_energy(&spec, &plus) - elastic_energy(&spec, &minus)) / (2.0 * h);
        let exact: f64 = (0..3).map(|i| g[i].dot(&p[i])).sum();
        assert_relative_eq!(fd, exact, max_relative = 1e-8);
    }

    #[test]
    fn gate_is_equivalent_to_positive_definiteness() {
        let mut r = rng(21);
        for _ in 0..2000 {
            let (l1, l2, l3) = (r.gen_range(-0.5..2.0), r.gen_range(-2.0..2.0), r.gen_range(-2.0..3.0));
            let pass = elastic_convexity_check(l1, l2, l3).is_ok();
            let lam = elastic_min_eigenvalue(&ElasticSpec::FullLdg { l1, l2, l3 });
            if lam.abs() > 1e-9 {
                assert_eq!(pass, lam > 0.0, "({l1},{l2},{l3}) min eig {lam}");
            }
        }
    }

    #[test]
    fn boundary_hyperplanes_are_degenerate() {
        for (l1, l2, l3) in [(1.0, 0.3, -1.0), (1.0, 0.3, 2.0), (1.0, -0.6 - 0.05, 0.5)] {
            assert!(elastic_convexity_check(l1, l2, l3).is_err());
            let lam = elastic_min_eigenvalue(&ElasticSpec::FullLdg { l1, l2, l3 });
            assert!(lam.abs() < 1e-12, "{lam}");
        }
    }

    proptest::proptest! {
        #[test]
        fn gate_passing_constants_give_positive_rayleigh_quotients(
            l1 in 0.05f64..3.0, t3 in 0.01f64..0.99, t2 in 0.01f64..3.0, seed in 0u64..1000,
        ) {
            // parametrise the open cone so every sample passes the gate
            let l3 = -l1 + t3 * 3.0 * l1;
            let l2 = -0.6 * l1 - 0.1 * l3 + t2;
            proptest::prop_assert!(elastic_convexity_check(l1, l2, l3).is_ok());
            let spec = ElasticSpec::FullLdg { l1, l2, l3 };
            proptest::prop_assert!(elastic_min_rayleigh(&spec, 200, seed) > 0.0);
            proptest::prop_assert!(elastic_min_eigenvalue(&spec) > 0.0);
        }
    }
}
