use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::field::{DiscreteField, NodeLabel};
use crate::error::{Error, Result};
use crate::qtensor::QTensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub unknowns: usize,
    /// Connected clusters of masked nodes.
    pub clusters: usize,
    pub iterations: usize,
    /// Final residual relative to the right-hand side, worst component.
    pub residual: f64,
    /// Largest amount by which an extended component leaves the range of its
    /// cluster's boundary values (zero when the maximum principle holds).
    pub max_principle_excess: f64,
}

/// Replaces masked node values by the discrete harmonic extension of the
/// surrounding unmasked values (7-point Laplacian, one solve per component).
pub fn harmonic_extension(field: &DiscreteField) -> Result<DiscreteField> {
    harmonic_extension_report(field, 1e-12, 0).map(|(f, _)| f)
}

/// As [`harmonic_extension`]; `max_iter = 0` picks a size-based default.
pub fn harmonic_extension_report(
    field: &DiscreteField,
    tol: f64,
    max_iter: usize,
) -> Result<(DiscreteField, ExtensionReport)> {
    let grid = field.grid;
    let masked: Vec<usize> = (0..grid.n_nodes()).filter(|&n| field.labels[n] == NodeLabel::Masked).collect();
    let mut out = field.clone();
    if masked.is_empty() {
        return Err(Error::Precondition("harmonic extension needs masked nodes".into()));
    }
    let mut slot = vec![u32::MAX; grid.n_nodes()];
    for (u, &n) in masked.iter().enumerate() {
        slot[n] = u as u32;
    }
    let h = grid.h();
    let c = h.map(|x| 1.0 / (x * x));
    let diag = 2.0 * (c[0] + c[1] + c[2]);
    let d = grid.dims();
    let stride = [1, d[0], d[0] * d[1]];
    let neighbours = |n: usize| {
        let mut out = [(0usize, 0.0f64); 6];
        for a in 0..3 {
            out[2 * a] = (n - stride[a], c[a]);
            out[2 * a + 1] = (n + stride[a], c[a]);
        }
        out
    };

    // right-hand side from unmasked neighbours
    let mut b = vec![[0.0; 5]; masked.len()];
    for (u, &n) in masked.iter().enumerate() {
        for (m, w) in neighbours(n) {
            if slot[m] == u32::MAX {
                for k in 0..5 {
                    b[u][k] += w * field.values[m].0[k];
                }
            }
        }
    }
    let apply = |x: &[[f64; 5]], y: &mut [[f64; 5]]| {
        for (u, &n) in masked.iter().enumerate() {
            let mut acc = x[u].map(|v| diag * v);
            for (m, w) in neighbours(n) {
                let s = slot[m];
                if s != u32::MAX {
                    for k in 0..5 {
                        acc[k] -= w * x[s as usize][k];
                    }
                }
            }
            y[u] = acc;
        }
    };
    let dot = |x: &[[f64; 5]], y: &[[f64; 5]]| {
        let mut s = [0.0; 5];
        for (a, b) in x.iter().zip(y) {
            for k in 0..5 {
                s[k] += a[k] * b[k];
            }
        }
        s
    };

    // initial guess: current values
    let mut x: Vec<[f64; 5]> = masked.iter().map(|&n| field.values[n].0).collect();
    let mut ax = vec![[0.0; 5]; x.len()];
    apply(&x, &mut ax);
    let mut r: Vec<[f64; 5]> = b.iter().zip(&ax).map(|(b, a)| std::array::from_fn(|k| b[k] - a[k])).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let bb = dot(&b, &b).map(|v| v.max(1e-300));
    let max_iter = if max_iter == 0 { 20 * (masked.len() as f64).sqrt() as usize + 2000 } else { max_iter };
    let rel = |rr: &[f64; 5]| (0..5).map(|k| (rr[k] / bb[k]).sqrt()).fold(0.0, f64::max);
    let mut it = 0;
    let mut ap = vec![[0.0; 5]; x.len()];
    while rel(&rr) > tol {
        if it >= max_iter {
            return Err(Error::Numerical(format!(
                "harmonic extension did not converge in {max_iter} iterations (relative residual {:.3e})",
                rel(&rr)
            )));
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        let alpha: [f64; 5] = std::array::from_fn(|k| if pap[k] > 0.0 { rr[k] / pap[k] } else { 0.0 });
        for u in 0..x.len() {
            for k in 0..5 {
                x[u][k] += alpha[k] * p[u][k];
                r[u][k] -= alpha[k] * ap[u][k];
            }
        }
        let rr_new = dot(&r, &r);
        let beta: [f64; 5] = std::array::from_fn(|k| if rr[k] > 0.0 { rr_new[k] / rr[k] } else { 0.0 });
        for u in 0..x.len() {
            for k in 0..5 {
                p[u][k] = r[u][k] + beta[k] * p[u][k];
            }
        }
        rr = rr_new;
        it += 1;
    }
    for (u, &n) in masked.iter().enumerate() {
        out.values[n] = QTensor(x[u]);
    }

    let (clusters, excess) = max_principle(&out, &slot, &masked, &neighbours);
    let residual = rel(&rr);
    Ok((
        out,
        ExtensionReport { unknowns: masked.len(), clusters, iterations: it, residual, max_principle_excess: excess },
    ))
}

fn max_principle(
    field: &DiscreteField,
    slot: &[u32],
    masked: &[usize],
    neighbours: &dyn Fn(usize) -> [(usize, f64); 6],
) -> (usize, f64) {
    let mut seen = vec![false; masked.len()];
    let mut clusters = 0;
    let mut excess: f64 = 0.0;
    let mut queue = VecDeque::new();
    for start in 0..masked.len() {
        if seen[start] {
            continue;
        }
        clusters += 1;
        let mut members = Vec::new();
        let mut lo = [f64::INFINITY; 5];
        let mut hi = [f64::NEG_INFINITY; 5];
        seen[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for (m, _) in neighbours(masked[u]) {
                let s = slot[m];
                if s == u32::MAX {
                    for k in 0..5 {
                        lo[k] = lo[k].min(field.values[m].0[k]);
                        hi[k] = hi[k].max(field.values[m].0[k]);
                    }
                } else if !seen[s as usize] {
                    seen[s as usize] = true;
                    queue.push_back(s as usize);
                }
            }
        }
        for u in members {
            let v = field.values[masked[u]].0;
            for k in 0..5 {
                excess = excess.max(lo[k] - v[k]).max(v[k] - hi[k]);
            }
        }
    }
    (clusters, excess.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogenization::{ParticleShape, RotationField};
    use crate::lattice::{BoxDomain, InclusionConfig};
    use crate::solver::grid::Grid;
    use nalgebra::Vector3;

    fn config() -> InclusionConfig {
        InclusionConfig::from_centers(
            vec![Vector3::new(0.3, 0.3, 0.3), Vector3::new(0.7, 0.6, 0.5)],
            0.25,
            1.1,
            ParticleShape::Ellipsoid { semi_axes: [1.0, 0.7, 0.5] },
            &RotationField::Constant { axis: [1.0, 2.0, 0.5], angle: 0.6 },
        )
        .unwrap()
    }

    #[test]
    fn constants_and_affine_fields_are_reproduced() {
        let grid = Grid::new(BoxDomain::unit_cube(), [30, 30, 30]).unwrap();
        let a = [QTensor::random(1, 1.0), QTensor::random(2, 1.0), QTensor::random(3, 1.0)];
        let exact = DiscreteField::from_fn(grid, |x| QTensor::random(4, 1.0) + x.x * a[0] + x.y * a[1] + x.z * a[2]);
        let mut f = exact.clone();
        f.mask_inclusions(&config());
        for (n, l) in f.labels.iter().enumerate() {
            if *l == NodeLabel::Masked {
                f.values[n] = QTensor::ZERO;
            }
        }
        let (e, rep) = harmonic_extension_report(&f, 1e-13, 0).unwrap();
        assert_eq!(rep.clusters, 2);
        assert!(rep.max_principle_excess < 1e-9);
        let err = e.values.iter().zip(&exact.values).map(|(p, q)| (*p - *q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn maximum_principle_for_rough_data() {
        let grid = Grid::new(BoxDomain::unit_cube(), [24, 24, 24]).unwrap();
        let mut f =
            DiscreteField::from_fn(grid, |x| QTensor::random((1000.0 * (x.x + 3.0 * x.y + 7.0 * x.z)) as u64, 1.0));
        f.mask_inclusions(&config());
        let (_, rep) = harmonic_extension_report(&f, 1e-12, 0).unwrap();
        assert!(rep.max_principle_excess <= 1e-9, "{rep:?}");
        assert!(rep.residual <= 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
        #[test]
        fn extension_obeys_the_maximum_principle(seed in 0u64..10_000) {
            let grid = Grid::new(BoxDomain::unit_cube(), [16, 16, 16]).unwrap();
            let mut f = DiscreteField::from_fn(grid, |x| {
                QTensor::random(seed ^ (1000.0 * (x.x + 3.0 * x.y + 7.0 * x.z)) as u64, 1.0)
            });
            f.mask_inclusions(&config());
            let (_, rep) = harmonic_extension_report(&f, 1e-12, 0).unwrap();
            proptest::prop_assert!(rep.max_principle_excess <= 1e-9, "{:?}", rep);
        }
    }
}
