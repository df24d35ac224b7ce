//! Block estimators: the complex bilinear Wiener filter and the complex
//! bilinear least-squares filter, plus their mixed complex/real variants.
//!
//! Both work by alternating two closed-form updates: solve for `h` with
//! `g` frozen, then for `g` with the fresh `h`. Each half-step minimizes
//! the cost exactly in one variable, so the cost cannot increase across
//! an alternation. With exact statistics of block-diagonal covariance
//! the Wiener filter lands on a scaled version of the true pair after a
//! single alternation.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{FilterError, Result};
use crate::linalg::{self, solve_checked, CMatrix};
use crate::model::InputMatrix;
use crate::stats::{build_rg, build_rh, SecondOrderStats};
use crate::{CVector, Scalar};

/// Training data `{(X_i, y_i)}` collected for the least-squares filter.
#[derive(Debug, Clone)]
pub struct BlockDataset<T> {
    xs: Vec<InputMatrix<T>>,
    ys: CVector<T>,
}

impl<T: Scalar> BlockDataset<T> {
    pub fn new(xs: Vec<InputMatrix<T>>, ys: CVector<T>) -> Result<Self> {
        if xs.is_empty() || ys.is_empty() {
            return Err(FilterError::EmptyInput("block dataset"));
        }
        if xs.len() != ys.len() {
            return Err(FilterError::DimensionMismatch {
                context: "BlockDataset",
                left: format!("{} input matrices", xs.len()),
                right: format!("{} outputs", ys.len()),
            });
        }
        let shape = xs[0].shape();
        if xs.iter().any(|x| x.shape() != shape) {
            return Err(FilterError::DimensionMismatch {
                context: "BlockDataset",
                left: format!("first X is {}x{}", shape.0, shape.1),
                right: "later X differs".to_string(),
            });
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.xs[0].shape()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&InputMatrix<T>, Complex<T>)> {
        self.xs.iter().zip(self.ys.iter().copied())
    }
}

/// Estimate pair carried between alternations.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingEstimate<T> {
    pub h_hat: CVector<T>,
    pub g_hat: CVector<T>,
    pub iteration: usize,
}

impl<T: Scalar> AlternatingEstimate<T> {
    /// Starting point. Only `g_hat` enters the first half-step, and it
    /// must be nonzero; `h_hat` is carried for misalignment reporting.
    pub fn new(h_hat: CVector<T>, g_hat: CVector<T>) -> Result<Self> {
        if g_hat.is_empty() {
            return Err(FilterError::EmptyInput("g_hat"));
        }
        if linalg::norm_sq(&g_hat) == T::zero() {
            return Err(FilterError::ZeroVector("g_hat"));
        }
        Ok(Self {
            h_hat,
            g_hat,
            iteration: 0,
        })
    }
}

/// Wiener `h` half-step: `h = R_g^{-1} R_Xy g`.
pub fn cbwf_h_update<T: Scalar>(
    stats: &SecondOrderStats<T>,
    g_hat: &[Complex<T>],
    iteration: usize,
) -> Result<CVector<T>> {
    let rg = build_rg(stats, g_hat);
    let rhs = stats.r_xy.mul_vec(g_hat);
    solve_checked(&rg, &rhs, "R_g", iteration)
}

/// Wiener `g` half-step: `g = R_h^{-1} R_Xy^H h`.
pub fn cbwf_g_update<T: Scalar>(
    stats: &SecondOrderStats<T>,
    h_hat: &[Complex<T>],
    iteration: usize,
) -> Result<CVector<T>> {
    let rh = build_rh(stats, h_hat);
    let rhs = stats.r_xy.adjoint_mul_vec(h_hat);
    solve_checked(&rh, &rhs, "R_h", iteration)
}

/// One full Wiener alternation.
pub fn cbwf_iterate<T: Scalar>(
    stats: &SecondOrderStats<T>,
    est: &AlternatingEstimate<T>,
) -> Result<AlternatingEstimate<T>> {
    require_nonzero_g(est)?;
    let n = est.iteration + 1;
    let h = cbwf_h_update(stats, &est.g_hat, n)?;
    let g = cbwf_g_update(stats, &h, n)?;
    Ok(AlternatingEstimate {
        h_hat: h,
        g_hat: g,
        iteration: n,
    })
}

/// Mixed-variant Wiener alternation: the `g` update keeps only real
/// parts (`g = Re[R_h]^{-1} Re[R_Xy^H h]`), so `g` stays exactly real.
pub fn crbwf_iterate<T: Scalar>(
    stats: &SecondOrderStats<T>,
    est: &AlternatingEstimate<T>,
) -> Result<AlternatingEstimate<T>> {
    require_nonzero_g(est)?;
    let n = est.iteration + 1;
    let h = cbwf_h_update(stats, &est.g_hat, n)?;
    let rh = build_rh(stats, &h).real_part();
    let rhs: CVector<T> = stats
        .r_xy
        .adjoint_mul_vec(&h)
        .into_iter()
        .map(|z| Complex::new(z.re, T::zero()))
        .collect();
    let g = solve_checked(&rh, &rhs, "Re[R_h]", n)?;
    let g = g
        .into_iter()
        .map(|z| Complex::new(z.re, T::zero()))
        .collect();
    Ok(AlternatingEstimate {
        h_hat: h,
        g_hat: g,
        iteration: n,
    })
}

/// Least-squares `h` half-step:
/// `h = (Σ X_i g g^H X_i^H)^{-1} Σ y_i* X_i g`.
pub fn cbls_h_update<T: Scalar>(
    data: &BlockDataset<T>,
    g_hat: &[Complex<T>],
    iteration: usize,
) -> Result<CVector<T>> {
    let (l, _) = data.shape();
    let mut gram = CMatrix::zeros(l, l);
    let mut rhs = vec![Complex::zero(); l];
    for (x, y) in data.iter() {
        let xg = x.mul_vec(g_hat);
        gram.add_scaled_outer(T::one(), &xg, &xg);
        linalg::axpy(y.conj(), &xg, &mut rhs);
    }
    solve_checked(&gram, &rhs, "LS Gram (h side)", iteration)
}

/// Least-squares `g` half-step:
/// `g = (Σ X_i^H h h^H X_i)^{-1} Σ y_i X_i^H h`.
pub fn cbls_g_update<T: Scalar>(
    data: &BlockDataset<T>,
    h_hat: &[Complex<T>],
    iteration: usize,
) -> Result<CVector<T>> {
    let (_, m) = data.shape();
    let mut gram = CMatrix::zeros(m, m);
    let mut rhs = vec![Complex::zero(); m];
    for (x, y) in data.iter() {
        let xh = x.adjoint_mul_vec(h_hat);
        gram.add_scaled_outer(T::one(), &xh, &xh);
        linalg::axpy(y, &xh, &mut rhs);
    }
    solve_checked(&gram, &rhs, "LS Gram (g side)", iteration)
}

/// One full least-squares alternation.
pub fn cbls_iterate<T: Scalar>(
    data: &BlockDataset<T>,
    est: &AlternatingEstimate<T>,
) -> Result<AlternatingEstimate<T>> {
    require_nonzero_g(est)?;
    let n = est.iteration + 1;
    let h = cbls_h_update(data, &est.g_hat, n)?;
    let g = cbls_g_update(data, &h, n)?;
    Ok(AlternatingEstimate {
        h_hat: h,
        g_hat: g,
        iteration: n,
    })
}

/// Mixed-variant least-squares alternation: real-part Gram and
/// right-hand side for the `g` update.
pub fn crbls_iterate<T: Scalar>(
    data: &BlockDataset<T>,
    est: &AlternatingEstimate<T>,
) -> Result<AlternatingEstimate<T>> {
    require_nonzero_g(est)?;
    let n = est.iteration + 1;
    let h = cbls_h_update(data, &est.g_hat, n)?;
    let (_, m) = data.shape();
    let mut gram = CMatrix::zeros(m, m);
    let mut rhs = vec![Complex::zero(); m];
    for (x, y) in data.iter() {
        let xh = x.adjoint_mul_vec(&h);
        gram.add_scaled_outer(T::one(), &xh, &xh);
        linalg::axpy(y, &xh, &mut rhs);
    }
    let gram = gram.real_part();
    let rhs: CVector<T> = rhs
        .into_iter()
        .map(|z| Complex::new(z.re, T::zero()))
        .collect();
    let g = solve_checked(&gram, &rhs, "Re[LS Gram] (g side)", n)?;
    let g = g
        .into_iter()
        .map(|z| Complex::new(z.re, T::zero()))
        .collect();
    Ok(AlternatingEstimate {
        h_hat: h,
        g_hat: g,
        iteration: n,
    })
}

/// Mean-square error of the estimate pair up to the constant `E[|y|^2]`:
/// `-2 Re[f^T r] + f^T R f*` with `f = g ⊗ conj(h)` and `r = vec(R_Xy)`.
/// Suitable for monotonicity checks, where the additive constant cancels.
pub fn mse_excess<T: Scalar>(
    stats: &SecondOrderStats<T>,
    h_hat: &[Complex<T>],
    g_hat: &[Complex<T>],
) -> T {
    let f = linalg::kron_vec(g_hat, &linalg::conj_vec(h_hat));
    let r = stats.r_xy_vec();
    let cross = linalg::dotu(&f, &r);
    let f_conj = linalg::conj_vec(&f);
    let rf = stats.r_xx.mul_vec(&f_conj);
    let quad = linalg::dotu(&f, &rf);
    -(cross.re + cross.re) + quad.re
}

/// Summed squared error `Σ |y_i - h^H X_i g|^2` over a dataset.
pub fn ls_cost<T: Scalar>(data: &BlockDataset<T>, h_hat: &[Complex<T>], g_hat: &[Complex<T>]) -> T {
    data.iter()
        .map(|(x, y)| {
            let e = y - linalg::inner(h_hat, &x.mul_vec(g_hat));
            e.norm_sqr()
        })
        .fold(T::zero(), |a, b| a + b)
}

fn require_nonzero_g<T: Scalar>(est: &AlternatingEstimate<T>) -> Result<()> {
    if linalg::norm_sq(&est.g_hat) == T::zero() {
        return Err(FilterError::ZeroVector("g_hat"));
    }
    Ok(())
}
