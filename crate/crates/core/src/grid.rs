//! Regular grids over the unit cube `[0,1]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A regular tensor grid with `resolution` nodes per axis, endpoints
/// included. Nodes are stored in row-major order (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    resolution: usize,
}

impl Grid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("grid dimension must be positive"));
        }
        if resolution < 2 {
            return Err(invalid("grid resolution must be at least 2"));
        }
        resolution
            .checked_pow(dim as u32)
            .ok_or_else(|| invalid("grid node count overflows"))?;
        Ok(Self { dim, resolution })
    }

    /// Default resolution: 64 nodes per axis in one dimension, 32 otherwise.
    pub fn with_default_resolution(dim: usize) -> Result<Self> {
        Self::new(dim, if dim == 1 { 64 } else { 32 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn node_count(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.resolution - 1) as f64
    }

    /// Per-axis indices of a flat node index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.resolution;
            flat /= self.resolution;
        }
        idx
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(flat).into_iter().map(|i| i as f64 * h).collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.node_count()).map(|i| self.node(i)).collect()
    }

    /// Tensor trapezoidal weights; they sum to one.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let last = self.resolution - 1;
        (0..self.node_count())
            .map(|flat| {
                self.multi_index(flat)
                    .into_iter()
                    .map(|i| if i == 0 || i == last { 0.5 * h } else { h })
                    .product()
            })
            .collect()
    }

    /// Trapezoid weights in units of `h^d` (products of 1/2 and 1).
    pub fn trapezoid_coefficients(&self) -> Vec<f64> {
        let last = self.resolution - 1;
        (0..self.node_count())
            .map(|flat| {
                self.multi_index(flat)
                    .into_iter()
                    .map(|i| if i == 0 || i == last { 0.5 } else { 1.0 })
                    .product()
            })
            .collect()
    }

    /// `1 / h^d` as an exact integer-valued float.
    pub fn cell_count(&self) -> f64 {
        ((self.resolution - 1) as f64).powi(self.dim as i32)
    }

    /// Trapezoidal integral of nodal values over the cube. Weights are
    /// accumulated as multiples of `h^d` and scaled once, so constants
    /// integrate exactly.
    pub fn trapezoid_integrate(&self, values: &[f64]) -> f64 {
        integrate_with(&self.trapezoid_coefficients(), self.cell_count(), values)
    }

    /// Multilinear interpolation stencil of a point: the `2^d` surrounding
    /// nodes and their weights. Zero-weight corners are dropped.
    pub fn stencil(&self, point: &[f64]) -> Result<Vec<(usize, f64)>> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        let last = self.resolution - 1;
        let mut base = Vec::with_capacity(self.dim);
        let mut frac = Vec::with_capacity(self.dim);
        for &x in point {
            if !(0.0..=1.0).contains(&x) {
                return Err(invalid(format!("coordinate {x} outside [0,1]")));
            }
            let scaled = x * last as f64;
            let i = (scaled.floor() as usize).min(last - 1);
            base.push(i);
            frac.push(scaled - i as f64);
        }
        let mut out = Vec::with_capacity(1 << self.dim);
        let mut corner = vec![0usize; self.dim];
        for mask in 0..(1usize << self.dim) {
            let mut w = 1.0;
            for axis in 0..self.dim {
                let up = (mask >> axis) & 1 == 1;
                corner[axis] = base[axis] + up as usize;
                w *= if up { frac[axis] } else { 1.0 - frac[axis] };
            }
            if w > 0.0 {
                out.push((self.flat_index(&corner), w));
            }
        }
        Ok(out)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.dim, self.resolution, other.dim, other.resolution
            )));
        }
        Ok(())
    }
}

pub(crate) fn integrate_with(coefficients: &[f64], cells: f64, values: &[f64]) -> f64 {
    // Neumaier summation; the products are exact since coefficients are powers of 1/2.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for (c, v) in coefficients.iter().zip(values) {
        let x = c * v;
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    (sum + comp) / cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(0, 4).is_err());
        assert!(Grid::new(1, 1).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(3, 5).unwrap();
        for flat in 0..g.node_count() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.node(g.node_count() - 1), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn weights_sum_to_one() {
        for (d, r) in [(1, 2), (1, 64), (2, 7), (3, 4)] {
            let s: f64 = Grid::new(d, r).unwrap().trapezoid_weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stencil_weights_partition_unity() {
        let g = Grid::new(2, 9).unwrap();
        let st = g.stencil(&[0.3, 1.0]).unwrap();
        let s: f64 = st.iter().map(|(_, w)| w).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(g.stencil(&[1.2, 0.0]).is_err());
        assert!(g.stencil(&[0.5]).is_err());
    }
}
