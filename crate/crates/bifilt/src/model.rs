//! The bilinear model, its linearization and error metrics.
//!
//! The system under study is `y_k = h^H X_k g + n_k` with `h ∈ C^L`,
//! `g ∈ C^M` and `X_k ∈ C^{L×M}`. Every bilinear model can be rewritten
//! as a linear one, `y_k = f^T vec(X_k) + n_k` with `f = g ⊗ conj(h)`,
//! and since `(ν h, g / conj(ν))` produces the same output for any
//! nonzero complex `ν`, identification error is always measured on `f`.

use num_complex::Complex;

use crate::error::{FilterError, Result};
use crate::linalg::{self, CMatrix};
use crate::{CVector, Scalar};

/// Input signal matrix `X_k` (L×M).
pub type InputMatrix<T> = CMatrix<T>;

/// Ground-truth system: coefficient pair plus per-sample noise level.
#[derive(Debug, Clone)]
pub struct BilinearSystem<T> {
    h: CVector<T>,
    g: CVector<T>,
    noise_std: T,
}

impl<T: Scalar> BilinearSystem<T> {
    pub fn new(h: CVector<T>, g: CVector<T>, noise_std: T) -> Result<Self> {
        if h.is_empty() {
            return Err(FilterError::EmptyInput("h"));
        }
        if g.is_empty() {
            return Err(FilterError::EmptyInput("g"));
        }
        if linalg::norm_sq(&h) == T::zero() {
            return Err(FilterError::ZeroVector("h"));
        }
        if linalg::norm_sq(&g) == T::zero() {
            return Err(FilterError::ZeroVector("g"));
        }
        if noise_std < T::zero() {
            return Err(FilterError::InvalidParameter(format!(
                "noise_std must be nonnegative, got {noise_std}"
            )));
        }
        Ok(Self { h, g, noise_std })
    }

    pub fn h(&self) -> &[Complex<T>] {
        &self.h
    }

    pub fn g(&self) -> &[Complex<T>] {
        &self.g
    }

    pub fn l(&self) -> usize {
        self.h.len()
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn noise_std(&self) -> T {
        self.noise_std
    }

    /// The equivalent linear coefficients `f = g ⊗ conj(h)`.
    pub fn linear_equivalent(&self) -> LinearEquivalent<T> {
        linearize(&self.h, &self.g).expect("system vectors are nonempty")
    }

    /// `y = h^H X g + noise_sample`.
    pub fn output(&self, x: &InputMatrix<T>, noise_sample: Complex<T>) -> Result<Complex<T>> {
        evaluate_bilinear(&self.h, &self.g, x, noise_sample)
    }
}

/// Kronecker-linearized coefficients `f = g ⊗ conj(h)` of a bilinear pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEquivalent<T> {
    pub f: CVector<T>,
}

impl<T: Scalar> LinearEquivalent<T> {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

/// Per-sample error metrics: normalized misalignment (linear and dB)
/// and instantaneous squared error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics<T> {
    pub nm: T,
    pub nm_db: T,
    pub ise: T,
}

/// dB value reported for an exactly zero power ratio, so CSV traces
/// never contain `-inf`.
pub const DB_FLOOR: f64 = -400.0;

/// `10 log10(x)` with exact zeros mapped to [`DB_FLOOR`].
pub fn power_db<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::lit(10.0) * x.portable_log10()
    } else {
        T::lit(DB_FLOOR)
    }
}

impl<T: Scalar> ErrorMetrics<T> {
    pub fn new(nm: T, ise: T) -> Self {
        Self {
            nm,
            nm_db: power_db(nm),
            ise,
        }
    }
}

/// Evaluates `h^H X g + noise_sample`.
pub fn evaluate_bilinear<T: Scalar>(
    h: &[Complex<T>],
    g: &[Complex<T>],
    x: &InputMatrix<T>,
    noise_sample: Complex<T>,
) -> Result<Complex<T>> {
    if x.rows() != h.len() || x.cols() != g.len() {
        return Err(FilterError::DimensionMismatch {
            context: "evaluate_bilinear",
            left: format!("X is {}x{}", x.rows(), x.cols()),
            right: format!("h has {} entries, g has {}", h.len(), g.len()),
        });
    }
    // h^H (X g)
    let xg = x.mul_vec(g);
    Ok(linalg::inner(h, &xg) + noise_sample)
}

/// `f = g ⊗ conj(h)`, the linear coefficients equivalent to `(h, g)`.
pub fn linearize<T: Scalar>(h: &[Complex<T>], g: &[Complex<T>]) -> Result<LinearEquivalent<T>> {
    if h.is_empty() {
        return Err(FilterError::EmptyInput("h"));
    }
    if g.is_empty() {
        return Err(FilterError::EmptyInput("g"));
    }
    let h_conj = linalg::conj_vec(h);
    Ok(LinearEquivalent {
        f: linalg::kron_vec(g, &h_conj),
    })
}

/// Column-stacking vectorization.
pub fn vec_of<T: Scalar>(a: &CMatrix<T>) -> CVector<T> {
    a.as_slice().to_vec()
}

/// Inverse of [`vec_of`]: reshapes a length `L·M` vector into L×M columns.
pub fn mat_m<T: Scalar>(a: &[Complex<T>], m: usize) -> Result<CMatrix<T>> {
    if m == 0 || !a.len().is_multiple_of(m) {
        return Err(FilterError::NotDivisible {
            context: "mat_m",
            len: a.len(),
            divisor: m,
        });
    }
    let l = a.len() / m;
    Ok(CMatrix::from_col_major(l, m, a))
}

/// Normalized misalignment `||f - f_hat||^2 / ||f||^2`.
pub fn normalized_misalignment<T: Scalar>(
    f_true: &LinearEquivalent<T>,
    f_hat: &LinearEquivalent<T>,
) -> Result<ErrorMetrics<T>> {
    if f_true.len() != f_hat.len() {
        return Err(FilterError::DimensionMismatch {
            context: "normalized_misalignment",
            left: format!("f_true has {} entries", f_true.len()),
            right: format!("f_hat has {} entries", f_hat.len()),
        });
    }
    let den = linalg::norm_sq(&f_true.f);
    if den == T::zero() {
        return Err(FilterError::ZeroVector("f_true"));
    }
    let num: T = f_true
        .f
        .iter()
        .zip(&f_hat.f)
        .map(|(&a, &b)| (a - b).norm_sqr())
        .fold(T::zero(), |s, v| s + v);
    Ok(ErrorMetrics::new(num / den, T::zero()))
}

/// Misalignment of a widely linear estimate `y ≈ p^T x + q^T conj(x)`
/// against a strictly linear truth `f`:
/// `(||f - p||^2 + ||q||^2) / ||f||^2`.
///
/// For proper white inputs this is the excess output power ratio, and it
/// reduces to [`normalized_misalignment`] when `q = 0`. It is the metric
/// used to place the split-real filter structures on the same axis as
/// the fully complex ones.
pub fn widely_linear_misalignment<T: Scalar>(
    f_true: &LinearEquivalent<T>,
    p: &[Complex<T>],
    q: &[Complex<T>],
) -> Result<ErrorMetrics<T>> {
    if f_true.len() != p.len() || f_true.len() != q.len() {
        return Err(FilterError::DimensionMismatch {
            context: "widely_linear_misalignment",
            left: format!("f_true has {} entries", f_true.len()),
            right: format!("p has {}, q has {}", p.len(), q.len()),
        });
    }
    let den = linalg::norm_sq(&f_true.f);
    if den == T::zero() {
        return Err(FilterError::ZeroVector("f_true"));
    }
    let direct: T = f_true
        .f
        .iter()
        .zip(p)
        .map(|(&a, &b)| (a - b).norm_sqr())
        .fold(T::zero(), |s, v| s + v);
    let conjugate = linalg::norm_sq(q);
    Ok(ErrorMetrics::new((direct + conjugate) / den, T::zero()))
}

/// Default step for [`fd_wirtinger_gradient`].
pub const FD_STEP: f64 = 1e-5;

/// Numerical conjugate-Wirtinger gradient `∂J/∂conj(v)` of a real-valued
/// cost, computed per coordinate as
/// `(∂J/∂Re[v_i] + j ∂J/∂Im[v_i]) / 2` with central differences.
///
/// This is the verification oracle used against every analytic gradient
/// in the crate; it must stay independent of those implementations.
pub fn fd_wirtinger_gradient<T: Scalar>(
    cost: impl Fn(&[Complex<T>]) -> T,
    point: &[Complex<T>],
    step: T,
) -> CVector<T> {
    assert!(step > T::zero(), "finite-difference step must be positive");
    let two = T::lit(2.0);
    let mut grad = Vec::with_capacity(point.len());
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        let base = point[i];
        probe[i] = base + Complex::new(step, T::zero());
        let jp = cost(&probe);
        probe[i] = base - Complex::new(step, T::zero());
        let jm = cost(&probe);
        let d_re = (jp - jm) / (two * step);
        probe[i] = base + Complex::new(T::zero(), step);
        let jp = cost(&probe);
        probe[i] = base - Complex::new(T::zero(), step);
        let jm = cost(&probe);
        let d_im = (jp - jm) / (two * step);
        probe[i] = base;
        grad.push(Complex::new(d_re / two, d_im / two));
    }
    grad
}
