//! Rectangular coordinate lattices, sampled tensor fields, finite differences
//! and trapezoid quadrature.
//!
//! Every model in the catalog lives in a single chart, so a [`Grid`] is a single
//! box. Axes along which a field is known not to vary can be declared
//! *homogeneous*: they carry one sample and a nominal extent, derivatives along
//! them vanish identically and the mollifier is integrated out analytically.

mod fd;
mod field;
mod io;
mod quad;

pub use fd::{fd_partial, gradient, FdScheme};
pub use field::{sample, sample_scalar, SampledField, TensorRank};
pub use io::{read_field, write_field, write_slice_csv};
pub use quad::{gauss_legendre, integrate, lp_norm, trapezoid_weights, Norm, Region};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    bounds: Vec<(f64, f64)>,
    resolution: Vec<usize>,
    spacing: Vec<f64>,
    homogeneous: Vec<bool>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<Self> {
        if bounds.len() != resolution.len() || bounds.is_empty() {
            return Err(Error::InvalidParam(format!(
                "{} intervals but {} resolutions",
                bounds.len(),
                resolution.len()
            )));
        }
        let mut spacing = Vec::with_capacity(bounds.len());
        for (axis, (&(lo, hi), &n)) in bounds.iter().zip(resolution).enumerate() {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::DegenerateInterval { axis, lo, hi });
            }
            if n < 2 {
                return Err(Error::ResolutionTooSmall { axis, got: n });
            }
            spacing.push((hi - lo) / (n - 1) as f64);
        }
        let dim = bounds.len();
        let mut grid = Self {
            bounds: bounds.to_vec(),
            resolution: resolution.to_vec(),
            spacing,
            homogeneous: vec![false; dim],
            strides: vec![0; dim],
        };
        grid.update_strides();
        Ok(grid)
    }

    /// Collapses the listed axes to a single sample at the interval midpoint.
    /// The interval is kept as the nominal extent used by quadrature.
    pub fn with_homogeneous_axes(mut self, axes: &[usize]) -> Result<Self> {
        for &axis in axes {
            if axis >= self.dim() {
                return Err(Error::AxisOutOfRange { axis, dim: self.dim() });
            }
            self.homogeneous[axis] = true;
            self.resolution[axis] = 1;
            self.spacing[axis] = self.bounds[axis].1 - self.bounds[axis].0;
        }
        self.update_strides();
        Ok(self)
    }

    fn update_strides(&mut self) {
        let dim = self.dim();
        let mut stride = 1;
        for axis in (0..dim).rev() {
            self.strides[axis] = stride;
            stride *= self.resolution[axis];
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn homogeneous(&self) -> &[bool] {
        &self.homogeneous
    }

    pub fn is_homogeneous(&self, axis: usize) -> bool {
        self.homogeneous[axis]
    }

    /// Axes that carry more than one sample.
    pub fn regular_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&a| !self.homogeneous[a]).collect()
    }

    /// Largest spacing over the regular axes.
    pub fn max_spacing(&self) -> f64 {
        self.regular_axes()
            .into_iter()
            .map(|a| self.spacing[a])
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        if self.homogeneous[axis] {
            0.5 * (lo + hi)
        } else if i + 1 == self.resolution[axis] {
            hi
        } else {
            lo + i as f64 * self.spacing[axis]
        }
    }

    /// Lattice index of a coordinate, if the coordinate is a lattice point.
    pub fn index_of(&self, axis: usize, x: f64) -> Option<usize> {
        if self.homogeneous[axis] {
            return Some(0);
        }
        let (lo, _) = self.bounds[axis];
        let h = self.spacing[axis];
        let r = ((x - lo) / h).round();
        if r < 0.0 || r as usize >= self.resolution[axis] {
            return None;
        }
        let i = r as usize;
        ((self.coord(axis, i) - x).abs() <= 1e-9 * h).then_some(i)
    }

    pub fn flat(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dim()];
        for axis in 0..self.dim() {
            index[axis] = flat / self.strides[axis];
            flat %= self.strides[axis];
        }
        index
    }

    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        (0..self.dim()).map(|a| self.coord(a, index[a])).collect()
    }

    pub fn point_flat(&self, flat: usize) -> Vec<f64> {
        self.point(&self.unflat(flat))
    }

    pub fn full_box(&self) -> IndexBox {
        IndexBox {
            lo: vec![0; self.dim()],
            hi: self.resolution.iter().map(|n| n - 1).collect(),
        }
    }

    /// Index box of lattice points inside the coordinate box `[lo_a, hi_a]`.
    /// Homogeneous axes are always included.
    pub fn box_from_coords(&self, bounds: &[(f64, f64)]) -> IndexBox {
        let mut lo = vec![0; self.dim()];
        let mut hi = vec![0; self.dim()];
        for axis in 0..self.dim() {
            if self.homogeneous[axis] {
                continue;
            }
            let (a, b) = bounds[axis];
            let (g0, _) = self.bounds[axis];
            let h = self.spacing[axis];
            let first = ((a - g0) / h - 1e-9).ceil().max(0.0) as usize;
            let last = ((b - g0) / h + 1e-9).floor();
            if last < 0.0 || first >= self.resolution[axis] {
                lo[axis] = 1;
                hi[axis] = 0;
                continue;
            }
            lo[axis] = first;
            hi[axis] = (last as usize).min(self.resolution[axis] - 1);
        }
        IndexBox { lo, hi }
    }

    pub fn same_lattice(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Inclusive box of lattice indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl IndexBox {
    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l + 1).product()
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        index
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(i, (l, h))| l <= i && i <= h)
    }

    pub fn intersect(&self, other: &IndexBox) -> IndexBox {
        IndexBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect(),
        }
    }

    /// Shrinks the box by `cells[a]` on both ends of each axis.
    pub fn shrink(&self, cells: &[usize]) -> IndexBox {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for a in 0..lo.len() {
            lo[a] += cells[a];
            if hi[a] >= cells[a] {
                hi[a] -= cells[a];
            } else {
                lo[a] = 1;
                hi[a] = 0;
            }
        }
        IndexBox { lo, hi }
    }

    /// Lattice indices in row-major order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        if self.is_empty() {
            return Vec::new();
        }
        let dim = self.lo.len();
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < self.hi[axis] {
                    cur[axis] += 1;
                    for later in axis + 1..dim {
                        cur[later] = self.lo[later];
                    }
                    break;
                }
            }
        }
    }

    /// Coordinate bounds of the box on `grid`.
    pub fn coords(&self, grid: &Grid) -> Vec<(f64, f64)> {
        (0..grid.dim())
            .map(|a| {
                if grid.is_homogeneous(a) {
                    grid.bounds()[a]
                } else {
                    (grid.coord(a, self.lo[a]), grid.coord(a, self.hi[a]))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_of_square_grid() {
        let g = Grid::new(&[(-1.0, 1.0), (-1.0, 1.0)], &[3, 3]).unwrap();
        assert_eq!(g.spacing(), &[1.0, 1.0]);
        assert_eq!(g.len(), 9);
    }

    #[test]
    fn unit_interval_spacing() {
        let g = Grid::new(&[(0.0, 1.0)], &[101]).unwrap();
        assert!((g.spacing()[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn resolution_floor() {
        assert!(matches!(
            Grid::new(&[(0.0, 1.0)], &[1]),
            Err(Error::ResolutionTooSmall { axis: 0, got: 1 })
        ));
        assert!(matches!(
            Grid::new(&[(1.0, 1.0)], &[4]),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn index_coordinate_round_trip() {
        let g = Grid::new(&[(-0.3, 0.7), (2.0, 5.0)], &[11, 7]).unwrap();
        for idx in g.full_box().indices() {
            let p = g.point(&idx);
            assert_eq!(g.index_of(0, p[0]), Some(idx[0]));
            assert_eq!(g.index_of(1, p[1]), Some(idx[1]));
            assert_eq!(g.unflat(g.flat(&idx)), idx);
        }
        assert_eq!(g.index_of(0, 0.05), None);
    }

    #[test]
    fn homogeneous_axes_collapse() {
        let g = Grid::new(&[(0.0, 1.0), (-2.0, 2.0)], &[5, 9])
            .unwrap()
            .with_homogeneous_axes(&[1])
            .unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.coord(1, 0), 0.0);
        assert_eq!(g.regular_axes(), vec![0]);
        assert_eq!(g.max_spacing(), 0.25);
    }

    #[test]
    fn box_from_coordinates() {
        let g = Grid::new(&[(0.0, 1.0)], &[11]).unwrap();
        let b = g.box_from_coords(&[(0.25, 0.7)]);
        assert_eq!((b.lo[0], b.hi[0]), (3, 7));
        assert_eq!(b.shrink(&[2]).len(), 1);
        assert!(b.shrink(&[3]).is_empty());
    }
}
