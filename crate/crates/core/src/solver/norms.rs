use super::field::DiscreteField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::qtensor::QTensor;

/// `Σ_cells w_c/4 Σ_edges |ΔQ|²/h²`, the discrete `∫|∇Q|²` with cell weights
/// `w_c` (the cell volume when `weights` is `None`).
pub fn dirichlet_norm_sq(grid: &Grid, values: &[QTensor], weights: Option<&[f64]>) -> f64 {
    let h = grid.h();
    let vol = grid.cell_volume();
    let parts: Vec<f64> = (0..grid.n_cells())
        .map(|c| {
            let w = weights.map_or(vol, |w| w[c]);
            if w == 0.0 {
                return 0.0;
            }
            let nodes = grid.cell_nodes(c);
            let mut e = 0.0;
            for (k, bit) in [1usize, 2, 4].into_iter().enumerate() {
                for lo in (0..8).filter(|a| a & bit == 0) {
                    e += (values[nodes[lo | bit]] - values[nodes[lo]]).norm_sq() / (h[k] * h[k]);
                }
            }
            0.25 * w * e
        })
        .collect();
    pairwise_sum(&parts)
}

/// `Σ_cells w_c/8 Σ_corners |Q|²`.
pub fn l2_norm_sq(grid: &Grid, values: &[QTensor], weights: Option<&[f64]>) -> f64 {
    let vol = grid.cell_volume();
    let parts: Vec<f64> = (0..grid.n_cells())
        .map(|c| {
            let w = weights.map_or(vol, |w| w[c]);
            w / 8.0 * grid.cell_nodes(c).iter().map(|&n| values[n].norm_sq()).sum::<f64>()
        })
        .collect();
    pairwise_sum(&parts)
}

/// `(Σ_cells h³[|Q₁−Q₂|² + |∇Q₁−∇Q₂|²])^{1/2}` over the whole box.
pub fn h1_distance(f1: &DiscreteField, f2: &DiscreteField) -> Result<f64> {
    if !f1.same_grid(f2) {
        return Err(Error::Precondition("H1 distance needs fields on the same grid".into()));
    }
    let diff: Vec<QTensor> = f1.values.iter().zip(&f2.values).map(|(a, b)| *a - *b).collect();
    Ok((l2_norm_sq(&f1.grid, &diff, None) + dirichlet_norm_sq(&f1.grid, &diff, None)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxDomain;
    use nalgebra::Vector3;

    fn random_field(grid: Grid, seed: u64) -> DiscreteField {
        DiscreteField::from_fn(grid, |x: &Vector3<f64>| {
            let key = (x.x * 1e3) as u64 * 1_000_003 + (x.y * 1e3) as u64 * 1009 + (x.z * 1e3) as u64;
            QTensor::random(key + (seed << 40), 1.0)
        })
    }

    #[test]
    fn distance_axioms() {
        let grid = Grid::new(BoxDomain::unit_cube(), [6, 6, 6]).unwrap();
        let a = random_field(grid, 1);
        let b = random_field(grid, 2);
        let c = random_field(grid, 3);
        assert_eq!(h1_distance(&a, &a).unwrap(), 0.0);
        let ab = h1_distance(&a, &b).unwrap();
        assert!((ab - h1_distance(&b, &a).unwrap()).abs() < 1e-14);
        assert!(ab <= h1_distance(&a, &c).unwrap() + h1_distance(&c, &b).unwrap() + 1e-12);
        let other = DiscreteField::constant(Grid::new(BoxDomain::unit_cube(), [5, 6, 6]).unwrap(), QTensor::ZERO);
        assert!(h1_distance(&a, &other).is_err());
    }

    #[test]
    fn constant_shift_costs_its_l2_norm() {
        let grid = Grid::new(BoxDomain::cube(2.0), [5, 5, 5]).unwrap();
        let a = random_field(grid, 9);
        let c = QTensor::random(4, 1.0);
        let mut b = a.clone();
        for v in b.values.iter_mut() {
            *v += c;
        }
        let d = h1_distance(&a, &b).unwrap();
        assert!((d - (8.0 * c.norm_sq()).sqrt()).abs() < 1e-12);
    }
}
