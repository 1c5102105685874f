use rayon::prelude::*;

use super::{Grid, IndexBox};
use crate::error::{Error, Result};

/// Tensor type (r, s): `upper` contravariant and `lower` covariant slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TensorRank {
    pub upper: usize,
    pub lower: usize,
}

impl TensorRank {
    pub const SCALAR: Self = Self { upper: 0, lower: 0 };
    pub const COVECTOR: Self = Self { upper: 0, lower: 1 };
    pub const VECTOR: Self = Self { upper: 1, lower: 0 };
    pub const BILINEAR: Self = Self { upper: 0, lower: 2 };
    pub const CONNECTION: Self = Self { upper: 1, lower: 2 };

    pub fn order(self) -> usize {
        self.upper + self.lower
    }

    /// Number of stored components per lattice point in dimension `n`.
    pub fn components(self, n: usize) -> usize {
        n.pow(self.order() as u32)
    }
}

/// Tensor-valued samples on a [`Grid`], row-major over lattice points and then
/// over component indices. `valid` marks the lattice box on which the values
/// are trustworthy (shrinks under convolution).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: Grid,
    rank: TensorRank,
    ncomp: usize,
    symmetric: bool,
    values: Vec<f64>,
    valid: IndexBox,
}

impl SampledField {
    pub fn new(grid: Grid, rank: TensorRank, symmetric: bool, values: Vec<f64>) -> Result<Self> {
        let ncomp = rank.components(grid.dim());
        if values.len() != grid.len() * ncomp {
            return Err(Error::Format(format!(
                "expected {} values, got {}",
                grid.len() * ncomp,
                values.len()
            )));
        }
        if symmetric && rank.order() != 2 {
            return Err(Error::InvalidParam("only rank-2 fields can be symmetric".into()));
        }
        let valid = grid.full_box();
        Ok(Self { grid, rank, ncomp, symmetric, values, valid })
    }

    pub fn scalar(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, TensorRank::SCALAR, false, values)
    }

    pub fn zeros(grid: Grid, rank: TensorRank, symmetric: bool) -> Self {
        let len = grid.len() * rank.components(grid.dim());
        Self::new(grid, rank, symmetric, vec![0.0; len]).expect("consistent length")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> TensorRank {
        self.rank
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn valid(&self) -> &IndexBox {
        &self.valid
    }

    pub fn with_valid(mut self, valid: IndexBox) -> Self {
        self.valid = valid;
        self
    }

    /// Components at a flat lattice index.
    pub fn at(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.ncomp..(flat + 1) * self.ncomp]
    }

    pub fn at_index(&self, index: &[usize]) -> &[f64] {
        self.at(self.grid.flat(index))
    }

    /// Components at a lattice index inside the valid box.
    pub fn checked_at(&self, index: &[usize]) -> Result<&[f64]> {
        if !self.valid.contains(index) {
            return Err(Error::OutsideValidRegion(index.to_vec()));
        }
        Ok(self.at_index(index))
    }

    /// Scalar value of component `comp` at a flat index.
    pub fn get(&self, flat: usize, comp: usize) -> f64 {
        self.values[flat * self.ncomp + comp]
    }

    /// Extracts one component as a scalar field (valid box is kept).
    pub fn component(&self, comp: usize) -> SampledField {
        let values = (0..self.grid.len()).map(|i| self.get(i, comp)).collect();
        SampledField {
            grid: self.grid.clone(),
            rank: TensorRank::SCALAR,
            ncomp: 1,
            symmetric: false,
            values,
            valid: self.valid.clone(),
        }
    }

    /// Pointwise map over component slices; the rank of the output is given.
    pub fn map_points<F>(&self, rank: TensorRank, symmetric: bool, f: F) -> Result<SampledField>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let ncomp = rank.components(self.grid.dim());
        let mut values = vec![0.0; self.grid.len() * ncomp];
        values
            .par_chunks_mut(ncomp)
            .zip(self.values.par_chunks(self.ncomp))
            .for_each(|(out, inp)| f(inp, out));
        Ok(SampledField::new(self.grid.clone(), rank, symmetric, values)?.with_valid(self.valid.clone()))
    }

    /// Largest violation of component symmetry `T_ij = T_ji` over all points.
    pub fn symmetry_defect(&self) -> f64 {
        if self.rank.order() != 2 {
            return 0.0;
        }
        let n = self.grid.dim();
        let mut worst: f64 = 0.0;
        for p in 0..self.grid.len() {
            let v = self.at(p);
            for i in 0..n {
                for j in i + 1..n {
                    worst = worst.max((v[i * n + j] - v[j * n + i]).abs());
                }
            }
        }
        worst
    }

    /// Multilinear interpolation over the regular axes. Coordinates outside
    /// the grid are clamped to the boundary cell.
    pub fn interpolate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncomp];
        self.interpolate_into(x, &mut out);
        out
    }

    /// Allocation-free [`interpolate`](Self::interpolate); `out` must hold
    /// `ncomp` values.
    pub fn interpolate_into(&self, x: &[f64], out: &mut [f64]) {
        const MAX_AXES: usize = 8;
        let grid = &self.grid;
        let dim = grid.dim();
        assert!(dim <= MAX_AXES, "interpolation supports at most {MAX_AXES} axes");
        let mut axes = [0usize; MAX_AXES];
        let mut naxes = 0;
        for a in 0..dim {
            if !grid.is_homogeneous(a) {
                axes[naxes] = a;
                naxes += 1;
            }
        }
        let axes = &axes[..naxes];
        let mut base = [0usize; MAX_AXES];
        let mut frac = [0.0; MAX_AXES];
        for &a in axes {
            let (lo, _) = grid.bounds()[a];
            let n = grid.resolution()[a];
            let mut s = ((x[a] - lo) / grid.spacing()[a]).clamp(0.0, (n - 1) as f64);
            if (s - s.round()).abs() < 1e-10 {
                s = s.round();
            }
            let i = (s.floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = s - i as f64;
        }
        let out = &mut out[..self.ncomp];
        out.fill(0.0);
        let mut idx = base;
        for corner in 0..1usize << axes.len() {
            let mut w = 1.0;
            for (bit, &a) in axes.iter().enumerate() {
                if corner >> bit & 1 == 1 {
                    idx[a] = base[a] + 1;
                    w *= frac[a];
                } else {
                    idx[a] = base[a];
                    w *= 1.0 - frac[a];
                }
            }
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.at_index(&idx[..dim])) {
                *o += w * v;
            }
        }
    }
}

/// Samples `f` at every lattice point. `f` writes the components of its
/// value into the provided slice.
pub fn sample<F>(grid: &Grid, rank: TensorRank, symmetric: bool, f: F) -> Result<SampledField>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let ncomp = rank.components(grid.dim());
    let mut values = vec![0.0; grid.len() * ncomp];
    values
        .par_chunks_mut(ncomp)
        .enumerate()
        .for_each(|(flat, out)| f(&grid.point_flat(flat), out));
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index: grid.unflat(pos / ncomp),
            component: pos % ncomp,
        });
    }
    SampledField::new(grid.clone(), rank, symmetric, values)
}

pub fn sample_scalar<F>(grid: &Grid, f: F) -> Result<SampledField>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    sample(grid, TensorRank::SCALAR, false, |x, out| out[0] = f(x))
}
