//! Minimal dense complex linear algebra.
//!
//! The filter dimensions in this crate are small (tens of coefficients),
//! so a plain column-major matrix with an LU solver is all that is
//! needed. Solves go through [`Lu`] rather than explicit inversion, and
//! conditioning is reported as a reciprocal condition number in the
//! 1-norm so callers can reject near-singular systems.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{FilterError, Result};
use crate::{CVector, Scalar};

/// Dense complex matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = Complex::new(T::one(), T::zero());
        }
        a
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut a = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                a[(r, c)] = f(r, c);
            }
        }
        a
    }

    /// Builds a matrix from row slices (row-major convenience for tests
    /// and literals).
    pub fn from_rows(rows: &[&[Complex<T>]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    /// Column-major construction from a flat slice of length `rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: &[Complex<T>]) -> Self {
        assert_eq!(data.len(), rows * cols, "flat data length mismatch");
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column `c` as a slice (column-major storage makes this free).
    pub fn col(&self, c: usize) -> &[Complex<T>] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Flat column-major data.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> CVector<T> {
        assert_eq!(self.cols, x.len(), "mul_vec shape mismatch");
        let mut y = vec![Complex::zero(); self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            for (yi, &a) in y.iter_mut().zip(self.col(c)) {
                *yi += a * xc;
            }
        }
        y
    }

    /// `y = A x` for a real-valued `x`.
    pub fn mul_vec_real(&self, x: &[T]) -> CVector<T> {
        assert_eq!(self.cols, x.len(), "mul_vec_real shape mismatch");
        let mut y = vec![Complex::zero(); self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            for (yi, &a) in y.iter_mut().zip(self.col(c)) {
                *yi += Complex::new(a.re * xc, a.im * xc);
            }
        }
        y
    }

    /// `y = A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex<T>]) -> CVector<T> {
        assert_eq!(self.rows, x.len(), "adjoint_mul_vec shape mismatch");
        (0..self.cols)
            .map(|c| {
                self.col(c)
                    .iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (&a, &xi)| acc + a.conj() * xi)
            })
            .collect()
    }

    /// `y = A^T x`.
    pub fn transpose_mul_vec(&self, x: &[Complex<T>]) -> CVector<T> {
        assert_eq!(self.rows, x.len(), "transpose_mul_vec shape mismatch");
        (0..self.cols)
            .map(|c| {
                self.col(c)
                    .iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (&a, &xi)| acc + a * xi)
            })
            .collect()
    }

    /// `C = A B`.
    pub fn mul_mat(&self, b: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, b.rows, "mul_mat shape mismatch");
        let mut c = CMatrix::zeros(self.rows, b.cols);
        for j in 0..b.cols {
            let out = c.col_mut(j);
            for k in 0..self.cols {
                let bkj = b[(k, j)];
                for (oi, &a) in out.iter_mut().zip(self.col(k)) {
                    *oi += a * bkj;
                }
            }
        }
        c
    }

    pub fn adjoint(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    /// Real part as a new matrix (imaginary parts zeroed).
    pub fn real_part(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            Complex::new(self[(i, j)].re, T::zero())
        })
    }

    /// `A += alpha * u v^H` (rank-one update).
    pub fn add_scaled_outer(&mut self, alpha: T, u: &[Complex<T>], v: &[Complex<T>]) {
        assert_eq!(self.rows, u.len());
        assert_eq!(self.cols, v.len());
        for c in 0..self.cols {
            let s = v[c].conj() * alpha;
            for (a, &ui) in self.col_mut(c).iter_mut().zip(u) {
                *a += ui * s;
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        for a in &mut self.data {
            *a = Complex::new(a.re * s, a.im * s);
        }
    }

    pub fn add(&self, b: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.shape(), b.shape());
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&b.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, b: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.shape(), b.shape());
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&b.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// `(A + A^H) / 2`; used to keep nominally Hermitian matrices Hermitian
    /// under floating-point drift.
    pub fn hermitian_part(&self) -> CMatrix<T> {
        assert_eq!(self.rows, self.cols);
        let half = T::lit(0.5);
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let s = self[(i, j)] + self[(j, i)].conj();
            Complex::new(s.re * half, s.im * half)
        })
    }

    /// Matrix 1-norm (max absolute column sum, with |z| = |re| + |im|
    /// replaced by the exact modulus).
    pub fn one_norm(&self) -> T {
        (0..self.cols)
            .map(|c| {
                self.col(c)
                    .iter()
                    .map(|z| z.norm_sqr().sqrt())
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Attempted Cholesky factorization; returns `None` when the matrix is
    /// not Hermitian positive definite. Intended as a definiteness oracle.
    pub fn cholesky(&self) -> Option<CMatrix<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            // the negated form also rejects NaN pivots
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let dj = d.sqrt();
            l[(j, j)] = Complex::new(dj, T::zero());
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = Complex::new(s.re / dj, s.im / dj);
            }
        }
        Some(l)
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[c * self.rows + r]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[c * self.rows + r]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu<T> {
    lu: CMatrix<T>,
    piv: Vec<usize>,
    one_norm_a: T,
}

impl<T: Scalar> Lu<T> {
    /// Factors `a`; fails only on exactly zero pivots. Conditioning is
    /// checked separately via [`Lu::rcond`].
    pub fn factor(a: &CMatrix<T>) -> Option<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let one_norm_a = a.one_norm();
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm_sqr();
            for i in k + 1..n {
                let m = lu[(i, k)].norm_sqr();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return None;
            }
            piv.push(p);
            if p != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(p, c)];
                    lu[(p, c)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                for c in k + 1..n {
                    let s = lu[(k, c)];
                    let v = lu[(i, c)] - m * s;
                    lu[(i, c)] = v;
                }
            }
        }
        Some(Self {
            lu,
            piv,
            one_norm_a,
        })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> CVector<T> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        // forward: L y = P b
        for k in 0..n {
            let xk = x[k];
            for i in k + 1..n {
                let m = self.lu[(i, k)];
                x[i] -= m * xk;
            }
        }
        // backward: U x = y
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..n {
                s -= self.lu[(k, c)] * x[c];
            }
            x[k] = s / self.lu[(k, k)];
        }
        x
    }

    /// Explicit inverse (test oracles and Woodbury cross-checks only;
    /// production paths always use [`Lu::solve`]).
    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.lu.rows;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex::zero(); n];
        for j in 0..n {
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.solve(&e);
            inv.col_mut(j).copy_from_slice(&col);
            e[j] = Complex::zero();
        }
        inv
    }

    /// Reciprocal condition number in the 1-norm, computed exactly from
    /// the explicit inverse. The matrices solved in this crate are at
    /// most a few dozen rows, so the O(n^3) cost is irrelevant.
    pub fn rcond(&self) -> T {
        let inv_norm = self.inverse().one_norm();
        if inv_norm == T::zero() || self.one_norm_a == T::zero() {
            return T::zero();
        }
        T::one() / (self.one_norm_a * inv_norm)
    }
}

/// Threshold below which a reciprocal condition number is treated as
/// singular in the block solvers.
pub const RCOND_MIN: f64 = 1e-12;

/// Solves `A x = b`, rejecting singular or ill-conditioned systems.
///
/// `factor` and `iteration` only flavor the error message.
pub fn solve_checked<T: Scalar>(
    a: &CMatrix<T>,
    b: &[Complex<T>],
    factor: &'static str,
    iteration: usize,
) -> Result<CVector<T>> {
    let lu = Lu::factor(a).ok_or(FilterError::Singular {
        factor,
        iteration,
        rcond: 0.0,
    })?;
    let rcond = lu.rcond();
    if rcond < T::lit(RCOND_MIN) {
        return Err(FilterError::Singular {
            factor,
            iteration,
            rcond: rcond.to_f64().unwrap_or(0.0),
        });
    }
    Ok(lu.solve(b))
}

/// Kronecker product of two vectors: `(a ⊗ b)[i*len(b) + j] = a[i] b[j]`.
pub fn kron_vec<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> CVector<T> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        for &bj in b {
            out.push(ai * bj);
        }
    }
    out
}

/// Hermitian inner product `u^H v`.
pub fn inner<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    assert_eq!(u.len(), v.len());
    u.iter()
        .zip(v)
        .fold(Complex::zero(), |acc, (&ui, &vi)| acc + ui.conj() * vi)
}

/// Unconjugated product `u^T v`.
pub fn dotu<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    assert_eq!(u.len(), v.len());
    u.iter()
        .zip(v)
        .fold(Complex::zero(), |acc, (&ui, &vi)| acc + ui * vi)
}

/// Squared Euclidean norm.
pub fn norm_sq<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
}

/// `y += alpha x`.
pub fn axpy<T: Scalar>(alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Elementwise conjugate.
pub fn conj_vec<T: Scalar>(v: &[Complex<T>]) -> CVector<T> {
    v.iter().map(|z| z.conj()).collect()
}

pub fn vec_is_finite<T: Scalar>(v: &[Complex<T>]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Relative error `||a - b|| / max(||b||, eps)` between two vectors.
pub fn rel_err_vec<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    assert_eq!(a.len(), b.len());
    let diff: T = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).norm_sqr())
        .fold(T::zero(), |s, v| s + v);
    let den = norm_sq(b);
    if den == T::zero() {
        diff.sqrt()
    } else {
        (diff / den).sqrt()
    }
}
