use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 5;

/// Small dense square matrix stored inline (row-major, up to 5×5).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    a: [f64; MAX_DIM * MAX_DIM],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_DIM, "dimension {n} outside 1..={MAX_DIM}");
        Self { n, a: [0.0; MAX_DIM * MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Minkowski metric diag(−1, 1, …, 1).
    pub fn minkowski(n: usize) -> Self {
        let mut m = Self::identity(n);
        m[(0, 0)] = -1.0;
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Reads an n×n block from a row-major slice.
    pub fn from_slice(n: usize, s: &[f64]) -> Self {
        Self::from_fn(n, |i, j| s[i * n + j])
    }

    pub fn write_to(&self, out: &mut [f64]) {
        for i in 0..self.n {
            for j in 0..self.n {
                out[i * self.n + j] = self[(i, j)];
            }
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n * self.n];
        self.write_to(&mut v);
        v
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_fn(self.n, |i, j| c * self[(i, j)])
    }

    /// Adds `c · θ⊗θ`.
    pub fn add_outer(&self, theta: &[f64], c: f64) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] + c * theta[i] * theta[j])
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// Bilinear form v^T M w.
    pub fn form(&self, v: &[f64], w: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let mut r = 0.0;
            for j in 0..self.n {
                r += self[(i, j)] * w[j];
            }
            s += v[i] * r;
        }
        s
    }

    pub fn quad(&self, v: &[f64]) -> f64 {
        self.form(v, v)
    }

    pub fn max_abs(&self) -> f64 {
        self.a[..].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                d = d.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        d
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut m = *self;
        let mut det = 1.0;
        for c in 0..n {
            let mut piv = c;
            for r in c + 1..n {
                if m[(r, c)].abs() > m[(piv, c)].abs() {
                    piv = r;
                }
            }
            if m[(piv, c)] == 0.0 {
                return 0.0;
            }
            if piv != c {
                for k in 0..n {
                    let t = m[(c, k)];
                    m[(c, k)] = m[(piv, k)];
                    m[(piv, k)] = t;
                }
                det = -det;
            }
            let p = m[(c, c)];
            det *= p;
            for r in c + 1..n {
                let f = m[(r, c)] / p;
                if f != 0.0 {
                    for k in c..n {
                        m[(r, k)] -= f * m[(c, k)];
                    }
                }
            }
        }
        det
    }

    fn minor(&self, row: usize, col: usize) -> Mat {
        let n = self.n - 1;
        Mat::from_fn(n, |i, j| {
            let r = if i < row { i } else { i + 1 };
            let c = if j < col { j } else { j + 1 };
            self[(r, c)]
        })
    }

    /// Inverse by the cofactor formula; refuses |det| ≤ 1e−12 relative to the
    /// Hadamard bound ∏‖row‖, so uniformly scaled metrics are not rejected.
    pub fn inverse(&self) -> Result<Mat> {
        let det = self.det();
        let hadamard: f64 = (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].powi(2)).sum::<f64>().sqrt())
            .product();
        if !(det.abs() > 1e-12 * hadamard) {
            return Err(Error::NearSingular { det });
        }
        let n = self.n;
        if n == 1 {
            return Ok(Mat::diag(&[1.0 / self[(0, 0)]]));
        }
        let mut inv = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                inv[(j, i)] = sign * self.minor(i, j).det() / det;
            }
        }
        Ok(inv)
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Exactly one negative eigenvalue and no (near-)zero ones.
    pub fn is_lorentzian(&self) -> bool {
        let ev = self.sym_eigenvalues();
        let scale = ev.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        ev[0] < 0.0 && ev[1..].iter().all(|&x| x > 1e-12 * scale) && ev[0].abs() > 1e-12 * scale
    }

    /// Cholesky-based positive-definiteness test.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        m.cholesky().is_some()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * MAX_DIM + j]
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, o: Mat) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(i, j)] + o[(i, j)])
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, o: Mat) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(i, j)] - o[(i, j)])
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, o: Mat) -> Mat {
        Mat::from_fn(self.n, |i, j| (0..self.n).map(|k| self[(i, k)] * o[(k, j)]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minkowski_inverse() {
        let m = Mat::minkowski(4);
        assert_eq!(m.inverse().unwrap(), m);
        assert_eq!(m.det(), -1.0);
        assert!(m.is_lorentzian());
    }

    #[test]
    fn diagonal_grw_inverse() {
        let a: f64 = 1.7;
        let m = Mat::diag(&[-1.0, a * a, a * a, a * a]);
        let inv = m.inverse().unwrap();
        for i in 1..4 {
            assert!((inv[(i, i)] - 1.0 / (a * a)).abs() < 1e-15);
        }
        assert_eq!(inv[(0, 0)], -1.0);
    }

    #[test]
    fn singular_is_refused() {
        let m = Mat::diag(&[-1.0, 1.0, 0.0]);
        assert!(matches!(m.inverse(), Err(Error::NearSingular { .. })));
        // tiny but well-conditioned
        assert!(Mat::diag(&[-1.0, 1e-5, 1e-5, 1e-5]).inverse().is_ok());
    }

    #[test]
    fn signature_detection() {
        assert!(!Mat::identity(3).is_lorentzian());
        assert!(!Mat::diag(&[-1.0, -1.0, 1.0]).is_lorentzian());
        assert!(Mat::from_slice(2, &[0.0, -1.0, -1.0, 0.0]).is_lorentzian());
        assert!(Mat::diag(&[2.0, 0.5]).is_positive_definite());
        assert!(!Mat::diag(&[2.0, -0.5]).is_positive_definite());
    }

    proptest! {
        #[test]
        fn random_lorentzian_inverse_residual(
            n in 2usize..=5,
            entries in proptest::collection::vec(-0.4f64..0.4, 25),
        ) {
            // Perturbation of Minkowski, symmetrized.
            let p = Mat::from_fn(n, |i, j| 0.5 * (entries[i * 5 + j] + entries[j * 5 + i]));
            let g = Mat::minkowski(n) + p.scale(0.5);
            prop_assume!(g.det().abs() > 1e-6);
            let inv = g.inverse().unwrap();
            let r = (g * inv - Mat::identity(n)).max_abs();
            prop_assert!(r <= 1e-10, "residual {r}");
        }

        #[test]
        fn det_matches_nalgebra(entries in proptest::collection::vec(-2.0f64..2.0, 16)) {
            let m = Mat::from_slice(4, &entries);
            let d = nalgebra::DMatrix::from_row_slice(4, 4, &entries).determinant();
            prop_assert!((m.det() - d).abs() <= 1e-10 * (1.0 + d.abs()));
        }
    }
}
