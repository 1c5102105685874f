use super::{SampledField, TensorRank};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdScheme {
    Central2,
    Central4,
    OneSided2,
}

impl FdScheme {
    /// Samples needed along the axis for the stencil and its fallbacks.
    pub fn width(self) -> usize {
        match self {
            FdScheme::Central2 | FdScheme::OneSided2 => 3,
            FdScheme::Central4 => 5,
        }
    }
}

// Forward one-sided stencils (coefficients times 1/h); the backward versions
// are the negated mirror images.
const FWD2: [f64; 3] = [-1.5, 2.0, -0.5];
const FWD4_0: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
const FWD4_1: [f64; 5] = [-0.25, -10.0 / 12.0, 1.5, -0.5, 1.0 / 12.0];

/// Partial derivative along `axis`, restricted to the field's valid box.
///
/// Interior points use the named stencil; the outermost points of the valid
/// box fall back to one-sided stencils of the same order, so the output valid
/// box equals the input one. A homogeneous axis yields an identically zero
/// derivative. The output keeps the component layout of the input (the new
/// covariant slot is not added; callers assemble gradients explicitly).
pub fn fd_partial(field: &SampledField, axis: usize, scheme: FdScheme) -> Result<SampledField> {
    let grid = field.grid();
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
    }
    let rank = field.rank();
    let mut out = SampledField::zeros(grid.clone(), rank, field.is_symmetric())
        .with_valid(field.valid().clone());
    if grid.is_homogeneous(axis) || field.valid().is_empty() {
        return Ok(out);
    }
    let valid = field.valid();
    let lo = valid.lo[axis];
    let hi = valid.hi[axis];
    let count = hi - lo + 1;
    if count < scheme.width() {
        return Err(Error::GridTooSmall { axis, need: scheme.width(), got: count });
    }
    let h = grid.spacing()[axis];
    let stride = grid.strides()[axis];
    let ncomp = field.ncomp();
    let src = field.values();

    // Iterate over the valid box with the derivative axis collapsed; each
    // line is processed independently.
    let mut line_box = valid.clone();
    line_box.hi[axis] = lo;
    let dst = out.values_mut();
    for start_idx in line_box.indices() {
        let start = grid.flat(&start_idx);
        for k in 0..count {
            let stencil: (isize, &[f64], f64) = stencil_for(scheme, k, count);
            let (offset, coeffs, sign) = stencil;
            let p = start + k * stride;
            for c in 0..ncomp {
                let mut acc = 0.0;
                for (m, w) in coeffs.iter().enumerate() {
                    let q = (k as isize + offset + sign as isize * m as isize) as usize;
                    acc += w * src[(start + q * stride) * ncomp + c];
                }
                dst[p * ncomp + c] = sign * acc / h;
            }
        }
    }
    Ok(out)
}

/// Returns (first sample offset relative to k, coefficients, direction).
/// Direction −1 walks backwards from the offset and negates the result.
fn stencil_for(scheme: FdScheme, k: usize, count: usize) -> (isize, &'static [f64], f64) {
    const C2: [f64; 3] = [-0.5, 0.0, 0.5];
    const C4: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    let last = count - 1;
    match scheme {
        FdScheme::OneSided2 => {
            if k + 2 <= last {
                (0, &FWD2, 1.0)
            } else {
                (0, &FWD2, -1.0)
            }
        }
        FdScheme::Central2 => {
            if k == 0 {
                (0, &FWD2, 1.0)
            } else if k == last {
                (0, &FWD2, -1.0)
            } else {
                (-1, &C2, 1.0)
            }
        }
        FdScheme::Central4 => {
            if k == 0 {
                (0, &FWD4_0, 1.0)
            } else if k == 1 {
                (-1, &FWD4_1, 1.0)
            } else if k == last {
                (0, &FWD4_0, -1.0)
            } else if k + 1 == last {
                (1, &FWD4_1, -1.0)
            } else {
                (-2, &C4, 1.0)
            }
        }
    }
}

/// Gradient of a scalar field: a covector field with one component per axis.
pub fn gradient(field: &SampledField, scheme: FdScheme) -> Result<SampledField> {
    let grid = field.grid();
    let n = grid.dim();
    let parts: Vec<SampledField> = (0..n)
        .map(|a| fd_partial(field, a, scheme))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; grid.len() * n];
    for p in 0..grid.len() {
        for (a, part) in parts.iter().enumerate() {
            values[p * n + a] = part.get(p, 0);
        }
    }
    Ok(SampledField::new(grid.clone(), TensorRank::COVECTOR, false, values)?
        .with_valid(field.valid().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_scalar, Grid};

    fn line(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::new(&[(lo, hi)], &[n]).unwrap()
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[7, 9]).unwrap();
        let f = sample_scalar(&g, |_| 3.5).unwrap();
        for scheme in [FdScheme::Central2, FdScheme::Central4, FdScheme::OneSided2] {
            for axis in 0..2 {
                let d = fd_partial(&f, axis, scheme).unwrap();
                assert!(d.values().iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn quadratic_is_exact_for_central2() {
        let g = line(0.0, 1.0, 201);
        let f = sample_scalar(&g, |x| x[0] * x[0]).unwrap();
        let d = fd_partial(&f, 0, FdScheme::Central2).unwrap();
        let i = g.index_of(0, 0.5).unwrap();
        assert!((d.get(i, 0) - 1.0).abs() < 1e-12);
        // one-sided fallbacks are also exact on quadratics
        assert!((d.get(0, 0) - 0.0).abs() < 1e-10);
        assert!((d.get(200, 0) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sine_truncation_error() {
        let g = line(-1.0, 1.0, 201);
        let f = sample_scalar(&g, |x| x[0].sin()).unwrap();
        let d = fd_partial(&f, 0, FdScheme::Central2).unwrap();
        let err = (d.get(100, 0) - 1.0).abs();
        // h²/6 with h = 0.01
        assert!(err <= 2.5e-5, "{err}");
        assert!((err - 1e-4 / 6.0).abs() < 1e-8);
    }

    #[test]
    fn polynomial_exactness_by_order() {
        let g = line(-1.0, 2.0, 31);
        let schemes = [(FdScheme::Central2, 2), (FdScheme::OneSided2, 2), (FdScheme::Central4, 4)];
        for (scheme, order) in schemes {
            for deg in 0..=order {
                let f = sample_scalar(&g, |x| x[0].powi(deg as i32) - 0.5).unwrap();
                let d = fd_partial(&f, 0, scheme).unwrap();
                for i in 0..31 {
                    let x = g.coord(0, i);
                    let exact = if deg == 0 { 0.0 } else { deg as f64 * x.powi(deg as i32 - 1) };
                    let scale = 1.0 + exact.abs();
                    assert!(
                        (d.get(i, 0) - exact).abs() <= 1e-10 * scale,
                        "{scheme:?} deg {deg} at {x}: {} vs {exact}",
                        d.get(i, 0)
                    );
                }
            }
        }
    }

    #[test]
    fn stencil_too_wide() {
        let g = line(0.0, 1.0, 4);
        let f = sample_scalar(&g, |x| x[0]).unwrap();
        assert!(matches!(
            fd_partial(&f, 0, FdScheme::Central4),
            Err(Error::GridTooSmall { need: 5, got: 4, .. })
        ));
        assert!(matches!(fd_partial(&f, 1, FdScheme::Central2), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn derivative_along_second_axis() {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 2.0)], &[5, 11]).unwrap();
        let f = sample_scalar(&g, |x| x[0] * x[1] * x[1]).unwrap();
        let d = fd_partial(&f, 1, FdScheme::Central2).unwrap();
        for p in 0..g.len() {
            let x = g.point_flat(p);
            assert!((d.get(p, 0) - 2.0 * x[0] * x[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn restricted_to_valid_box() {
        let g = line(0.0, 1.0, 21);
        let f = sample_scalar(&g, |x| if x[0] < 0.2 { f64::MAX.sqrt() } else { x[0] * x[0] }).unwrap();
        let f = f.with_valid(g.box_from_coords(&[(0.25, 1.0)]));
        let d = fd_partial(&f, 0, FdScheme::Central2).unwrap();
        let first = d.valid().lo[0];
        assert!((d.get(first, 0) - 0.5).abs() < 1e-10);
    }
}
