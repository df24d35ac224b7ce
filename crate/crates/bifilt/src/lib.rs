//! Optimum and adaptive complex-valued bilinear filters.
//!
//! This crate implements filters for identifying systems of the form
//!
//! ```text
//! y_k = h^H X_k g + n_k
//! ```
//!
//! where the output is linear in each of the two coefficient vectors
//! `h` (length `L`) and `g` (length `M`) separately, but not jointly.
//! The pair `(h, g)` is only identifiable up to a complex scale, so
//! estimation quality is measured on the Kronecker-linearized
//! coefficients `f = g ⊗ conj(h)`.
//!
//! The filter families provided are:
//!
//! * block estimators obtained by alternating closed-form updates:
//!   the bilinear Wiener filter ([`optimum::cbwf_iterate`]) and the
//!   bilinear least-squares filter ([`optimum::cbls_iterate`]),
//! * streaming fully complex filters: LMS, NLMS and RLS
//!   ([`adaptive`]),
//! * split-real structures that run two or four real bilinear filters
//!   on the real/imaginary signal parts, plus the complex linear NLMS
//!   baseline ([`split_real`]),
//! * mixed filters with complex `h` and real `g` ([`mixed`]),
//! * closed-form and instrumented multiplication counts for the LMS
//!   family ([`complexity`]).
//!
//! All numeric code is generic over the underlying real scalar through
//! the [`Scalar`] trait; `f64` is the intended precision for the
//! simulation harness and is what the crate-level aliases use.

// Index-based loops are the normal idiom in the dense kernels here.
#![allow(clippy::needless_range_loop)]

pub mod adaptive;
pub mod complexity;
pub mod error;
pub mod linalg;
pub mod mixed;
pub mod model;
pub mod optimum;
pub mod signals;
pub mod split_real;
pub mod stats;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub use error::FilterError;

/// Real scalar type underlying all complex arithmetic in this crate.
///
/// The `portable_*` methods route transcendental functions through
/// `libm` so that sample streams and trace files are bit-identical
/// across platforms; plain arithmetic and `sqrt` are already exact
/// under IEEE 754.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    fn portable_ln(self) -> Self;
    fn portable_log10(self) -> Self;
    fn portable_exp(self) -> Self;
    fn portable_sin(self) -> Self;
    fn portable_cos(self) -> Self;

    /// Shorthand for `T::from_f64(v).unwrap()` for literal constants.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }
}

impl Scalar for f64 {
    fn portable_ln(self) -> Self {
        libm::log(self)
    }
    fn portable_log10(self) -> Self {
        libm::log10(self)
    }
    fn portable_exp(self) -> Self {
        libm::exp(self)
    }
    fn portable_sin(self) -> Self {
        libm::sin(self)
    }
    fn portable_cos(self) -> Self {
        libm::cos(self)
    }
}

impl Scalar for f32 {
    fn portable_ln(self) -> Self {
        libm::logf(self)
    }
    fn portable_log10(self) -> Self {
        libm::log10f(self)
    }
    fn portable_exp(self) -> Self {
        libm::expf(self)
    }
    fn portable_sin(self) -> Self {
        libm::sinf(self)
    }
    fn portable_cos(self) -> Self {
        libm::cosf(self)
    }
}

/// Complex vector over the scalar `T`.
pub type CVector<T> = Vec<Complex<T>>;

/// Default double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Default double-precision complex vector.
pub type CVector64 = CVector<f64>;
/// Default double-precision dense matrix.
pub type CMatrix64 = linalg::CMatrix<f64>;
/// Default double-precision input matrix.
pub type InputMatrix64 = model::InputMatrix<f64>;
