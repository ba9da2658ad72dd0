use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::BoxDomain;

/// Uniform node lattice over a box; node `(i, j, k)` sits at `lo + (i h₀, j h₁, k h₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub domain: BoxDomain,
    /// Cells per axis.
    pub cells: [usize; 3],
}

/// Corner offsets of a cell, bit `k` of the index selecting `+e_k`.
pub(crate) const CORNERS: [[usize; 3]; 8] =
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];

impl Grid {
    pub fn new(domain: BoxDomain, cells: [usize; 3]) -> Result<Self> {
        domain.validate()?;
        if cells.iter().any(|&c| c < 2) {
            return Err(Error::Precondition(format!("grid needs at least 2 cells per axis, got {cells:?}")));
        }
        Ok(Grid { domain, cells })
    }

    /// Coarsest grid whose spacing does not exceed `h_max` on any axis.
    pub fn with_max_spacing(domain: BoxDomain, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) {
            return Err(Error::Precondition("spacing must be positive".into()));
        }
        let e = domain.edges();
        let cells = std::array::from_fn(|k| ((e[k] / h_max * (1.0 - 1e-12)).ceil() as usize).max(2));
        Grid::new(domain, cells)
    }

    pub fn h(&self) -> [f64; 3] {
        let e = self.domain.edges();
        std::array::from_fn(|k| e[k] / self.cells[k] as f64)
    }

    pub fn h_max(&self) -> f64 {
        self.h().into_iter().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().iter().product()
    }

    /// Nodes per axis.
    pub fn dims(&self) -> [usize; 3] {
        self.cells.map(|c| c + 1)
    }

    pub fn n_nodes(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let d = self.dims();
        i + d[0] * (j + d[1] * k)
    }

    #[inline]
    pub fn ijk(&self, n: usize) -> [usize; 3] {
        let d = self.dims();
        [n % d[0], (n / d[0]) % d[1], n / (d[0] * d[1])]
    }

    pub fn node(&self, n: usize) -> Vector3<f64> {
        let [i, j, k] = self.ijk(n);
        self.point(i, j, k)
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let h = self.h();
        let lo = self.domain.lo;
        Vector3::new(lo[0] + i as f64 * h[0], lo[1] + j as f64 * h[1], lo[2] + k as f64 * h[2])
    }

    pub fn is_boundary(&self, n: usize) -> bool {
        let ijk = self.ijk(n);
        (0..3).any(|a| ijk[a] == 0 || ijk[a] == self.cells[a])
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.cells[0] * (j + self.cells[1] * k)
    }

    pub fn cell_ijk(&self, c: usize) -> [usize; 3] {
        [c % self.cells[0], (c / self.cells[0]) % self.cells[1], c / (self.cells[0] * self.cells[1])]
    }

    /// Node indices of the 8 corners of a cell, ordered as [`CORNERS`].
    #[inline]
    pub fn cell_nodes(&self, c: usize) -> [usize; 8] {
        let [i, j, k] = self.cell_ijk(c);
        CORNERS.map(|o| self.index(i + o[0], j + o[1], k + o[2]))
    }

    /// Cell containing `x` and the local coordinates in `[0, 1]³`.
    pub fn locate(&self, x: &Vector3<f64>) -> Option<([usize; 3], [f64; 3])> {
        let h = self.h();
        let tol = 1e-12;
        let mut cell = [0; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - self.domain.lo[a]) / h[a];
            if !(s >= -tol && s <= self.cells[a] as f64 + tol) {
                return None;
            }
            let c = (s.floor().max(0.0) as usize).min(self.cells[a] - 1);
            cell[a] = c;
            t[a] = (s - c as f64).clamp(0.0, 1.0);
        }
        Some((cell, t))
    }

    /// Trilinear interpolation weights at `x`.
    pub fn trilinear(&self, x: &Vector3<f64>) -> Option<[(usize, f64); 8]> {
        let ([i, j, k], t) = self.locate(x)?;
        Some(std::array::from_fn(|c| {
            let o = CORNERS[c];
            let w = (0..3).map(|a| if o[a] == 1 { t[a] } else { 1.0 - t[a] }).product();
            (self.index(i + o[0], j + o[1], k + o[2]), w)
        }))
    }

    /// Inclusive node-index ranges covering the ball `B(x, r)`, clipped to the grid.
    pub(crate) fn node_range(&self, x: &Vector3<f64>, r: f64) -> [std::ops::RangeInclusive<usize>; 3] {
        let h = self.h();
        std::array::from_fn(|a| {
            let lo = ((x[a] - r - self.domain.lo[a]) / h[a]).floor().max(0.0) as usize;
            let hi = (((x[a] + r - self.domain.lo[a]) / h[a]).ceil().max(0.0) as usize).min(self.cells[a]);
            lo.min(self.cells[a])..=hi
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip_and_spacing() {
        let g = Grid::new(BoxDomain { lo: [0.0; 3], hi: [1.0, 2.0, 0.5] }, [4, 5, 3]).unwrap();
        assert_eq!(g.dims(), [5, 6, 4]);
        for n in 0..g.n_nodes() {
            let [i, j, k] = g.ijk(n);
            assert_eq!(g.index(i, j, k), n);
        }
        assert!((g.cell_volume() - 0.25 * 0.4 / 6.0).abs() < 1e-15);
        let g2 = Grid::with_max_spacing(BoxDomain::unit_cube(), 0.1).unwrap();
        assert_eq!(g2.cells, [10, 10, 10]);
    }

    #[test]
    fn trilinear_reproduces_affine_functions() {
        let g = Grid::new(BoxDomain::cube(2.0), [7, 7, 7]).unwrap();
        let f = |x: &Vector3<f64>| 0.3 + 2.0 * x.x - x.y + 0.5 * x.z;
        for x in [Vector3::new(0.11, 1.3, 1.99), Vector3::new(2.0, 0.0, 0.7), Vector3::new(1.0, 1.0, 1.0)] {
            let s = g.trilinear(&x).unwrap();
            let v: f64 = s.iter().map(|&(n, w)| w * f(&g.node(n))).sum();
            assert!((v - f(&x)).abs() < 1e-12);
        }
        assert!(g.trilinear(&Vector3::new(2.1, 0.0, 0.0)).is_none());
    }
}
