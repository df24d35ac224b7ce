//! Streaming fully complex bilinear filters: LMS, NLMS and RLS.
//!
//! All three share the same a priori error
//! `e_k = y_k - h_{k-1}^H X_k g_{k-1}` and update `h` with the old `g`
//! and `g` with the old `h`. Divergence is detected eagerly: any
//! nonfinite coefficient aborts the run with a typed error carrying the
//! step index, so traces never contain NaNs.

use num_complex::Complex;

use crate::error::{FilterError, Result};
use crate::linalg::{self, CMatrix};
use crate::model::InputMatrix;
use crate::{CVector, Scalar};

/// Complex bilinear LMS filter state.
///
/// Updates:
/// `h_k = h_{k-1} + mu_h conj(e_k) X_k g_{k-1}`,
/// `g_k = g_{k-1} + mu_g e_k X_k^H h_{k-1}`.
#[derive(Debug, Clone)]
pub struct LmsState<T> {
    pub h_hat: CVector<T>,
    pub g_hat: CVector<T>,
    pub mu_h: T,
    pub mu_g: T,
    step: usize,
}

impl<T: Scalar> LmsState<T> {
    pub fn new(h_hat: CVector<T>, g_hat: CVector<T>, mu_h: T, mu_g: T) -> Result<Self> {
        require_nonzero(&h_hat, "h_hat")?;
        require_nonzero(&g_hat, "g_hat")?;
        Ok(Self {
            h_hat,
            g_hat,
            mu_h,
            mu_g,
            step: 0,
        })
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// One LMS step; returns the a priori error `e_k`.
    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        assert_eq!(x.rows(), self.h_hat.len(), "X rows vs h");
        assert_eq!(x.cols(), self.g_hat.len(), "X cols vs g");
        let xg = x.mul_vec(&self.g_hat);
        let e = y - linalg::inner(&self.h_hat, &xg);
        let xh = x.adjoint_mul_vec(&self.h_hat);
        linalg::axpy(e.conj() * self.mu_h, &xg, &mut self.h_hat);
        linalg::axpy(e * self.mu_g, &xh, &mut self.g_hat);
        self.step += 1;
        if !linalg::vec_is_finite(&self.h_hat) || !linalg::vec_is_finite(&self.g_hat) {
            return Err(FilterError::NonFinite {
                filter: "CBLMS",
                step: self.step,
            });
        }
        Ok(e)
    }
}

/// Complex bilinear NLMS filter state.
///
/// Each update is the LMS one with its step normalized by the squared
/// norm of its own regressor (`X g` for the `h` side, `X^H h` for the
/// `g` side), which is exactly the a posteriori-error-zeroing step when
/// `alpha = 1` and `delta = 0`.
#[derive(Debug, Clone)]
pub struct NlmsState<T> {
    pub h_hat: CVector<T>,
    pub g_hat: CVector<T>,
    pub alpha_h: T,
    pub alpha_g: T,
    pub delta_h: T,
    pub delta_g: T,
    step: usize,
}

impl<T: Scalar> NlmsState<T> {
    /// Normalized step-sizes must satisfy `0 <= alpha < 2` each and
    /// `alpha_h + alpha_g < 2`. A zero `alpha` freezes that side, which
    /// the convergence bound technically excludes but the tests rely on.
    pub fn new(
        h_hat: CVector<T>,
        g_hat: CVector<T>,
        alpha_h: T,
        alpha_g: T,
        delta_h: T,
        delta_g: T,
    ) -> Result<Self> {
        require_nonzero(&h_hat, "h_hat")?;
        require_nonzero(&g_hat, "g_hat")?;
        let two = T::lit(2.0);
        if alpha_h < T::zero() || alpha_h >= two || alpha_g < T::zero() || alpha_g >= two {
            return Err(FilterError::InvalidParameter(format!(
                "normalized step-sizes must lie in [0, 2): alpha_h = {alpha_h}, alpha_g = {alpha_g}"
            )));
        }
        if alpha_h + alpha_g >= two {
            return Err(FilterError::InvalidParameter(format!(
                "alpha_h + alpha_g must be < 2, got {}",
                alpha_h + alpha_g
            )));
        }
        if delta_h < T::zero() || delta_g < T::zero() {
            return Err(FilterError::InvalidParameter(
                "regularization constants must be nonnegative".to_string(),
            ));
        }
        Ok(Self {
            h_hat,
            g_hat,
            alpha_h,
            alpha_g,
            delta_h,
            delta_g,
            step: 0,
        })
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// One NLMS step; returns the a priori error `e_k`.
    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        assert_eq!(x.rows(), self.h_hat.len(), "X rows vs h");
        assert_eq!(x.cols(), self.g_hat.len(), "X cols vs g");
        let xg = x.mul_vec(&self.g_hat);
        let e = y - linalg::inner(&self.h_hat, &xg);
        let xh = x.adjoint_mul_vec(&self.h_hat);
        let den_h = self.delta_h + linalg::norm_sq(&xg);
        let den_g = self.delta_g + linalg::norm_sq(&xh);
        linalg::axpy(e.conj() * (self.alpha_h / den_h), &xg, &mut self.h_hat);
        linalg::axpy(e * (self.alpha_g / den_g), &xh, &mut self.g_hat);
        self.step += 1;
        if !linalg::vec_is_finite(&self.h_hat) || !linalg::vec_is_finite(&self.g_hat) {
            return Err(FilterError::NonFinite {
                filter: "CBNLMS",
                step: self.step,
            });
        }
        Ok(e)
    }

    /// A posteriori error on the `h` side,
    /// `y - h_k^H X_k g_{k-1}`, for a given pre-step `g`.
    pub fn a_posteriori_h(
        &self,
        x: &InputMatrix<T>,
        y: Complex<T>,
        g_prev: &[Complex<T>],
    ) -> Complex<T> {
        y - linalg::inner(&self.h_hat, &x.mul_vec(g_prev))
    }

    /// A posteriori error on the `g` side,
    /// `y - h_{k-1}^H X_k g_k`, for a given pre-step `h`.
    pub fn a_posteriori_g(
        &self,
        x: &InputMatrix<T>,
        y: Complex<T>,
        h_prev: &[Complex<T>],
    ) -> Complex<T> {
        y - linalg::inner(h_prev, &x.mul_vec(&self.g_hat))
    }
}

/// Complex bilinear RLS filter state. `p_g` (L×L) feeds the `h` update,
/// `p_h` (M×M) the `g` update; both are kept Hermitian by
/// re-symmetrization after every rank-one downdate.
#[derive(Debug, Clone)]
pub struct RlsState<T> {
    pub h_hat: CVector<T>,
    pub g_hat: CVector<T>,
    p_g: CMatrix<T>,
    p_h: CMatrix<T>,
    lambda: T,
    step: usize,
}

impl<T: Scalar> RlsState<T> {
    /// `P_g,0 = nu_g I_L`, `P_h,0 = nu_h I_M`, forgetting factor
    /// `0 < lambda <= 1`; both coefficient vectors must be nonzero.
    pub fn new(h_hat: CVector<T>, g_hat: CVector<T>, nu_g: T, nu_h: T, lambda: T) -> Result<Self> {
        require_nonzero(&h_hat, "h_hat")?;
        require_nonzero(&g_hat, "g_hat")?;
        if !(lambda > T::zero() && lambda <= T::one()) {
            return Err(FilterError::InvalidParameter(format!(
                "forgetting factor must satisfy 0 < lambda <= 1, got {lambda}"
            )));
        }
        if !(nu_g > T::zero() && nu_h > T::zero()) {
            return Err(FilterError::InvalidParameter(
                "initial inverse-correlation scales must be positive".to_string(),
            ));
        }
        let l = h_hat.len();
        let m = g_hat.len();
        let mut p_g = CMatrix::identity(l);
        p_g.scale(nu_g);
        let mut p_h = CMatrix::identity(m);
        p_h.scale(nu_h);
        Ok(Self {
            h_hat,
            g_hat,
            p_g,
            p_h,
            lambda,
            step: 0,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn p_g(&self) -> &CMatrix<T> {
        &self.p_g
    }

    pub fn p_h(&self) -> &CMatrix<T> {
        &self.p_h
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// One RLS step; returns the a priori error `e_k`.
    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        assert_eq!(x.rows(), self.h_hat.len(), "X rows vs h");
        assert_eq!(x.cols(), self.g_hat.len(), "X cols vs g");
        let lambda = self.lambda;
        let inv_lambda = T::one() / lambda;

        let xg = x.mul_vec(&self.g_hat);
        let e = y - linalg::inner(&self.h_hat, &xg);
        let xh = x.adjoint_mul_vec(&self.h_hat); // uses h_{k-1}

        // h side: gain from P_g
        let pg_xg = self.p_g.mul_vec(&xg);
        let den = lambda + linalg::inner(&xg, &pg_xg).re;
        let k_g: CVector<T> = pg_xg
            .iter()
            .map(|&z| Complex::new(z.re / den, z.im / den))
            .collect();
        self.p_g.add_scaled_outer(-T::one(), &k_g, &pg_xg);
        self.p_g.scale(inv_lambda);
        self.p_g = self.p_g.hermitian_part();
        linalg::axpy(e.conj(), &k_g, &mut self.h_hat);

        // g side: gain from P_h
        let ph_xh = self.p_h.mul_vec(&xh);
        let den = lambda + linalg::inner(&xh, &ph_xh).re;
        let k_h: CVector<T> = ph_xh
            .iter()
            .map(|&z| Complex::new(z.re / den, z.im / den))
            .collect();
        self.p_h.add_scaled_outer(-T::one(), &k_h, &ph_xh);
        self.p_h.scale(inv_lambda);
        self.p_h = self.p_h.hermitian_part();
        linalg::axpy(e, &k_h, &mut self.g_hat);

        self.step += 1;
        let finite = linalg::vec_is_finite(&self.h_hat)
            && linalg::vec_is_finite(&self.g_hat)
            && self.p_g.is_finite()
            && self.p_h.is_finite();
        if !finite {
            return Err(FilterError::NonFinite {
                filter: "CBRLS",
                step: self.step,
            });
        }
        Ok(e)
    }
}

/// LMS step-size admissibility report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBoundReport<T> {
    pub mu_h_max: T,
    pub mu_g_max: T,
    pub delta_value: T,
    pub stable: bool,
}

/// Mean-square step-size bounds for the bilinear LMS under white inputs:
/// `mu_h < 2 / (L sigma_x^2 E[||g_hat||^2])`,
/// `mu_g < 2 / (M sigma_x^2 E[||h_hat||^2])`,
/// plus the steady-state margin
/// `delta = 2 - sigma_x^2 (mu_h L ||g||^2 / |nu|^2 + mu_g M |nu|^2 ||h||^2)`.
/// `stable` requires both step-sizes strictly inside their open
/// intervals and `delta > 0`.
#[allow(clippy::too_many_arguments)]
pub fn lms_step_bounds<T: Scalar>(
    l: usize,
    m: usize,
    sigma_x: T,
    g_norm_sq: T,
    h_norm_sq: T,
    mu_h: T,
    mu_g: T,
    nu_abs_sq: T,
    g_true_norm_sq: T,
    h_true_norm_sq: T,
) -> StepBoundReport<T> {
    let two = T::lit(2.0);
    let var = sigma_x * sigma_x;
    let mu_h_max = two / (T::lit(l as f64) * var * g_norm_sq);
    let mu_g_max = two / (T::lit(m as f64) * var * h_norm_sq);
    let delta_value = two
        - var
            * (mu_h * T::lit(l as f64) * g_true_norm_sq / nu_abs_sq
                + mu_g * T::lit(m as f64) * nu_abs_sq * h_true_norm_sq);
    let stable = mu_h > T::zero()
        && mu_h < mu_h_max
        && mu_g > T::zero()
        && mu_g < mu_g_max
        && delta_value > T::zero();
    StepBoundReport {
        mu_h_max,
        mu_g_max,
        delta_value,
        stable,
    }
}

/// Input power self-calibration for bound reports when `sigma_x` is not
/// known: root mean square of `|x|` over the first 1000 samples (or all
/// of them, if fewer).
pub fn estimate_sigma_x<T: Scalar>(samples: &[Complex<T>]) -> T {
    let n = samples.len().min(1000);
    if n == 0 {
        return T::zero();
    }
    let power: T = samples[..n]
        .iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |a, b| a + b);
    (power / T::lit(n as f64)).sqrt()
}

fn require_nonzero<T: Scalar>(v: &[Complex<T>], name: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(FilterError::EmptyInput(name));
    }
    if linalg::norm_sq(v) == T::zero() {
        return Err(FilterError::ZeroVector(name));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, norm_sq, rel_err_vec, Lu};
    use crate::model::fd_wirtinger_gradient;
    use crate::signals::Rng;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn random_x(rng: &mut Rng, l: usize, m: usize) -> InputMatrix<f64> {
        InputMatrix::from_fn(l, m, |_, _| rng.proper_gaussian(1.0))
    }

    #[test]
    fn lms_zero_step_is_identity() {
        let mut rng = Rng::new(50);
        let mut st = LmsState::new(
            rng.proper_gaussian_vec(1.0, 3),
            rng.proper_gaussian_vec(1.0, 2),
            0.0,
            0.0,
        )
        .unwrap();
        let h0 = st.h_hat.clone();
        let g0 = st.g_hat.clone();
        let x = random_x(&mut rng, 3, 2);
        let e = st.step(&x, c(1.0, -1.0)).unwrap();
        assert_eq!(st.h_hat, h0);
        assert_eq!(st.g_hat, g0);
        assert!((e - (c(1.0, -1.0) - inner(&h0, &x.mul_vec(&g0)))).norm() < 1e-15);
    }

    #[test]
    fn lms_hand_worked_scalar_step() {
        let mut st = LmsState::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)], 0.1, 0.1).unwrap();
        let x = InputMatrix::from_rows(&[&[c(2.0, 0.0)]]);
        let e = st.step(&x, c(3.0, 0.0)).unwrap();
        assert!((e - c(1.0, 0.0)).norm() < 1e-15);
        assert!((st.h_hat[0] - c(1.2, 0.0)).norm() < 1e-15);
        assert!((st.g_hat[0] - c(1.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lms_update_is_negative_wirtinger_gradient() {
        let mut rng = Rng::new(51);
        for _ in 0..20 {
            let l = 4;
            let m = 3;
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = rng.proper_gaussian_vec(1.0, m);
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            let e = y - inner(&h, &x.mul_vec(&g));

            let grad_h =
                fd_wirtinger_gradient(|hv| (y - inner(hv, &x.mul_vec(&g))).norm_sqr(), &h, 1e-5);
            let analytic_h: Vec<C> = x.mul_vec(&g).iter().map(|&v| -(e.conj() * v)).collect();
            assert!(rel_err_vec(&grad_h, &analytic_h) < 1e-6);

            let grad_g =
                fd_wirtinger_gradient(|gv| (y - inner(&h, &x.mul_vec(gv))).norm_sqr(), &g, 1e-5);
            let analytic_g: Vec<C> = x.adjoint_mul_vec(&h).iter().map(|&v| -(e * v)).collect();
            assert!(rel_err_vec(&grad_g, &analytic_g) < 1e-6);
        }
    }

    #[test]
    fn lms_reduces_to_classical_complex_lms_when_g_frozen() {
        let mut rng = Rng::new(52);
        let l = 6;
        let h0 = rng.proper_gaussian_vec(1.0, l);
        let mut st = LmsState::new(h0.clone(), vec![c(1.0, 0.0)], 0.05, 0.0).unwrap();
        let mut w = h0; // classical complex LMS taps
        for _ in 0..200 {
            let xcol = rng.proper_gaussian_vec(1.0, l);
            let x = InputMatrix::from_fn(l, 1, |i, _| xcol[i]);
            let y = rng.proper_gaussian(1.0);
            let e = st.step(&x, y).unwrap();
            // classical: e = y - w^H x; w += mu conj(e) x
            let e_ref = y - inner(&w, &xcol);
            for (wi, &xi) in w.iter_mut().zip(&xcol) {
                *wi += e_ref.conj() * 0.05 * xi;
            }
            assert!((e - e_ref).norm() <= 1e-12 * e_ref.norm().max(1.0));
            assert!(rel_err_vec(&st.h_hat, &w) <= 1e-12);
        }
    }

    #[test]
    fn step_bounds_closed_forms() {
        let r = lms_step_bounds(1, 1, 1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 1.0);
        assert_eq!(r.mu_h_max, 2.0);
        assert_eq!(r.mu_g_max, 2.0);
        assert!((r.delta_value - 1.0f64).abs() < 1e-15);
        assert!(r.stable);

        let boundary = lms_step_bounds(1, 1, 1.0, 1.0, 1.0, 2.0, 0.5, 1.0, 1.0, 1.0);
        assert!(!boundary.stable, "open interval excludes the bound itself");

        let zero = lms_step_bounds(1, 1, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        assert!((zero.delta_value - 2.0f64).abs() < 1e-15);
        assert!(!zero.stable);
    }

    #[test]
    fn nlms_zeroes_a_posteriori_error() {
        let mut rng = Rng::new(53);
        let l = 5;
        let m = 3;
        let mut st = NlmsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            1.0,
            0.0,
            0.0,
            0.0,
        )
        .unwrap();
        for _ in 0..100 {
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            let g_prev = st.g_hat.clone();
            let e = st.step(&x, y).unwrap();
            let post = st.a_posteriori_h(&x, y, &g_prev);
            assert!(post.norm() <= 1e-12 * e.norm().max(1e-30));
        }
    }

    #[test]
    fn nlms_no_error_no_update() {
        let mut rng = Rng::new(54);
        let l = 3;
        let m = 2;
        let mut st = NlmsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            0.9,
            0.9,
            1e-4,
            1e-4,
        )
        .unwrap();
        let x = random_x(&mut rng, l, m);
        let y = inner(&st.h_hat, &x.mul_vec(&st.g_hat)); // e = 0 exactly
        let h0 = st.h_hat.clone();
        let g0 = st.g_hat.clone();
        st.step(&x, y).unwrap();
        assert_eq!(st.h_hat, h0);
        assert_eq!(st.g_hat, g0);
    }

    #[test]
    fn nlms_huge_delta_freezes_updates() {
        let mut rng = Rng::new(55);
        let l = 4;
        let m = 2;
        let mut st = NlmsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            1.0,
            0.0,
            1e12,
            0.0,
        )
        .unwrap();
        let x = random_x(&mut rng, l, m);
        let y = rng.proper_gaussian(1.0);
        let h0 = st.h_hat.clone();
        let xg = x.mul_vec(&st.g_hat);
        let e = st.step(&x, y).unwrap();
        let moved: f64 = st
            .h_hat
            .iter()
            .zip(&h0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let bound = 1e-9 * (norm_sq(&xg).sqrt() * e.norm());
        assert!(moved <= bound, "moved {moved} vs bound {bound}");
    }

    #[test]
    fn nlms_rejects_bad_alphas() {
        let h = vec![c(1.0, 0.0)];
        let g = vec![c(1.0, 0.0)];
        assert!(NlmsState::new(h.clone(), g.clone(), 1.2, 0.9, 0.0, 0.0).is_err());
        assert!(NlmsState::new(h.clone(), g.clone(), 2.0, 0.0, 0.0, 0.0).is_err());
        assert!(NlmsState::new(h, g, 0.5, 0.5, 1e-4, 1e-4).is_ok());
    }

    #[test]
    fn rls_constructor_contract() {
        let h = vec![c(1.0, 0.0); 3];
        let g = vec![c(1.0, 0.0); 2];
        let st = RlsState::new(h.clone(), g.clone(), 10.0, 10.0, 63.0 / 64.0).unwrap();
        for i in 0..3 {
            assert_eq!(st.p_g()[(i, i)], c(10.0, 0.0));
        }
        assert!(RlsState::new(h.clone(), g.clone(), 10.0, 10.0, 0.0).is_err());
        assert!(RlsState::new(h.clone(), g.clone(), 10.0, 10.0, 1.1).is_err());
        assert!(RlsState::new(h, g, -1.0, 10.0, 0.9).is_err());
    }

    #[test]
    fn rls_scalar_hand_recursion() {
        // L = M = 1 with lambda = 1: the three update formulas reduce to
        // scalar arithmetic we can replay directly.
        let nu = 2.0;
        let mut st = RlsState::new(vec![c(0.5, 0.0)], vec![c(1.0, 0.25)], nu, nu, 1.0).unwrap();
        let x_val = c(1.5, -0.5);
        let x = InputMatrix::from_rows(&[&[x_val]]);
        let y = c(0.7, 0.3);

        let g0 = st.g_hat[0];
        let h0 = st.h_hat[0];
        let e = y - (h0.conj() * x_val * g0);
        let u = x_val * g0; // X g
        let den = 1.0 + u.norm_sqr() * nu;
        let k_g = u * nu / den;
        let p_g_expect = (nu - (k_g * u.conj() * nu).re) / 1.0;
        let h1 = h0 + e.conj() * k_g;

        let e_step = st.step(&x, y).unwrap();
        assert!((e_step - e).norm() < 1e-14);
        assert!((st.h_hat[0] - h1).norm() < 1e-14);
        assert!((st.p_g()[(0, 0)].re - p_g_expect).abs() < 1e-14);
        assert!(st.p_g()[(0, 0)].im.abs() < 1e-16);
    }

    #[test]
    fn rls_woodbury_consistency() {
        // P_k must match the direct inverse of
        // (X g g^H X^H + lambda P_{k-1}^{-1}) at every step.
        let mut rng = Rng::new(56);
        let l = 5;
        let m = 3;
        let lambda = 0.95;
        let mut st = RlsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            10.0,
            10.0,
            lambda,
        )
        .unwrap();
        for _ in 0..50 {
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            let g_prev = st.g_hat.clone();
            let p_prev = st.p_g().clone();
            st.step(&x, y).unwrap();

            let xg = x.mul_vec(&g_prev);
            let mut direct = Lu::factor(&p_prev).unwrap().inverse();
            direct.scale(lambda);
            direct.add_scaled_outer(1.0, &xg, &xg);
            let direct_inv = Lu::factor(&direct).unwrap().inverse();
            let err = st.p_g().sub(&direct_inv).frobenius_norm() / direct_inv.frobenius_norm();
            assert!(err < 1e-8, "woodbury mismatch {err}");
        }
    }

    #[test]
    fn rls_zero_error_keeps_coefficients_but_updates_p() {
        let mut rng = Rng::new(57);
        let l = 3;
        let m = 2;
        let mut st = RlsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            5.0,
            5.0,
            0.9,
        )
        .unwrap();
        let x = random_x(&mut rng, l, m);
        let y = inner(&st.h_hat, &x.mul_vec(&st.g_hat));
        let h0 = st.h_hat.clone();
        let g0 = st.g_hat.clone();
        let p0 = st.p_g().clone();
        st.step(&x, y).unwrap();
        assert_eq!(st.h_hat, h0);
        assert_eq!(st.g_hat, g0);
        assert!(st.p_g().sub(&p0).frobenius_norm() > 0.0);
    }

    #[test]
    fn rls_p_matrices_stay_hermitian_pd() {
        let mut rng = Rng::new(58);
        let l = 6;
        let m = 4;
        let mut st = RlsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            10.0,
            10.0,
            0.97,
        )
        .unwrap();
        for k in 0..400 {
            let x = random_x(&mut rng, l, m);
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = rng.proper_gaussian_vec(1.0, m);
            let y = crate::model::evaluate_bilinear(&h, &g, &x, rng.proper_gaussian(0.01)).unwrap();
            st.step(&x, y).unwrap();
            for i in 0..l {
                for j in 0..l {
                    assert_eq!(st.p_g()[(i, j)], st.p_g()[(j, i)].conj());
                }
            }
            assert!(
                st.p_g().cholesky().is_some(),
                "P_g lost definiteness at {k}"
            );
            assert!(
                st.p_h().cholesky().is_some(),
                "P_h lost definiteness at {k}"
            );
        }
    }

    #[test]
    fn rls_weighted_normal_equations_stationarity() {
        // The h produced by the weighted least-squares interpretation of
        // the recursion must make the regularized cost gradient vanish;
        // checked analytically and against the finite-difference oracle.
        let mut rng = Rng::new(59);
        let l = 3;
        let m = 2;
        let lambda: f64 = 0.9;
        let nu = 4.0;
        let steps = 30;
        let mut g_hist = Vec::new();
        let mut x_hist = Vec::new();
        let mut y_hist = Vec::new();
        let mut st = RlsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            nu,
            nu,
            lambda,
        )
        .unwrap();
        for _ in 0..steps {
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            g_hist.push(st.g_hat.clone());
            x_hist.push(x.clone());
            y_hist.push(y);
            st.step(&x, y).unwrap();
        }
        // Accumulate R~ and r~ of the h-side weighted problem, including
        // the lambda^k / nu regularizer the P_0 initialization implies.
        let mut r = CMatrix::<f64>::identity(l);
        r.scale(lambda.powi(steps as i32) / nu);
        let mut rhs = vec![C::new(0.0, 0.0); l];
        for i in 0..steps {
            let w = lambda.powi((steps - 1 - i) as i32);
            let xg = x_hist[i].mul_vec(&g_hist[i]);
            r.add_scaled_outer(w, &xg, &xg);
            linalg::axpy(y_hist[i].conj() * w, &xg, &mut rhs);
        }
        let h_ls = Lu::factor(&r).unwrap().solve(&rhs);

        let cost = |hv: &[C]| {
            let mut acc = lambda.powi(steps as i32) / nu * norm_sq(hv);
            for i in 0..steps {
                let w = lambda.powi((steps - 1 - i) as i32);
                let e = y_hist[i] - inner(hv, &x_hist[i].mul_vec(&g_hist[i]));
                acc += w * e.norm_sqr();
            }
            acc
        };
        let analytic: Vec<C> = {
            let mut v = r.mul_vec(&h_ls);
            for (vi, b) in v.iter_mut().zip(&rhs) {
                *vi -= b;
            }
            v
        };
        assert!(analytic.iter().all(|z| z.norm() < 1e-10));
        let fd = fd_wirtinger_gradient(cost, &h_ls, 1e-5);
        assert!(fd.iter().all(|z| z.norm() < 1e-7), "fd gradient {fd:?}");
        // and the two agree at a random (non-stationary) point too
        let probe = rng.proper_gaussian_vec(1.0, l);
        let fd_probe = fd_wirtinger_gradient(cost, &probe, 1e-5);
        let analytic_probe: Vec<C> = {
            let mut v = r.mul_vec(&probe);
            for (vi, b) in v.iter_mut().zip(&rhs) {
                *vi -= b;
            }
            v
        };
        assert!(rel_err_vec(&fd_probe, &analytic_probe) < 1e-6);
    }

    #[test]
    fn sigma_estimate_recovers_input_power() {
        let mut rng = Rng::new(61);
        let xs = rng.proper_gaussian_vec(0.01, 5000);
        let est: f64 = estimate_sigma_x(&xs);
        assert!((est / 0.01 - 1.0).abs() < 0.1, "estimate {est}");
        assert_eq!(estimate_sigma_x::<f64>(&[]), 0.0);
    }

    #[test]
    fn divergence_is_reported_with_step_index() {
        let mut rng = Rng::new(60);
        let l = 4;
        let m = 2;
        // absurd step size forces overflow quickly
        let mut st = LmsState::new(
            rng.proper_gaussian_vec(1.0, l),
            rng.proper_gaussian_vec(1.0, m),
            1e150,
            1e150,
        )
        .unwrap();
        let mut seen = None;
        for _ in 0..50 {
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            match st.step(&x, y) {
                Ok(_) => {}
                Err(FilterError::NonFinite { filter, step }) => {
                    assert_eq!(filter, "CBLMS");
                    seen = Some(step);
                    break;
                }
                Err(other) => panic!("unexpected {other:?}"),
            }
        }
        assert!(seen.is_some(), "expected divergence");
    }
}
