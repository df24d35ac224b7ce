//! Mixed complex/real streaming filters: complex `h`, real `g`.
//!
//! The `h` updates are identical to the fully complex filters. The `g`
//! updates keep the estimate real: the LMS and NLMS take `2 Re[...]`
//! gradient directions, and the RLS works on the augmented error
//! `[e, conj(e)]` with a two-column gain whose combination is real by
//! conjugate symmetry (verified numerically and tracked as a residual).

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{FilterError, Result};
use crate::linalg::{self, CMatrix};
use crate::model::InputMatrix;
use crate::{CVector, Scalar};

/// Mixed LMS: `h += mu_h conj(e) X g`, `g += mu_g 2 Re[e X^H h]`.
#[derive(Debug, Clone)]
pub struct CrblmsState<T> {
    pub h_hat: CVector<T>,
    pub g_hat: Vec<T>,
    pub mu_h: T,
    pub mu_g: T,
    step: usize,
}

impl<T: Scalar> CrblmsState<T> {
    pub fn new(h_hat: CVector<T>, g_hat: Vec<T>, mu_h: T, mu_g: T) -> Result<Self> {
        require_nonzero_c(&h_hat, "h_hat")?;
        require_nonzero_r(&g_hat, "g_hat")?;
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

    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        let xg = x.mul_vec_real(&self.g_hat);
        let e = y - linalg::inner(&self.h_hat, &xg);
        let xh = x.adjoint_mul_vec(&self.h_hat); // uses h_{k-1}
        linalg::axpy(e.conj() * self.mu_h, &xg, &mut self.h_hat);
        let two = T::lit(2.0);
        for (gi, &xhm) in self.g_hat.iter_mut().zip(&xh) {
            *gi += self.mu_g * two * (e * xhm).re;
        }
        self.step += 1;
        if !linalg::vec_is_finite(&self.h_hat) || !self.g_hat.iter().all(|v| v.is_finite()) {
            return Err(FilterError::NonFinite {
                filter: "CRBLMS",
                step: self.step,
            });
        }
        Ok(e)
    }
}

/// Mixed NLMS. The `h` side normalizes by `||X g||^2` as usual; the `g`
/// side scales the real direction `w = Re[e X^H h]` by the quotient
/// `||w||^2 / (delta + |h^H X w|^2)` that minimizes the a posteriori
/// error magnitude over real step sizes.
#[derive(Debug, Clone)]
pub struct CrbnlmsState<T> {
    pub h_hat: CVector<T>,
    pub g_hat: Vec<T>,
    pub alpha_h: T,
    pub alpha_g: T,
    pub delta_h: T,
    pub delta_g: T,
    step: usize,
}

impl<T: Scalar> CrbnlmsState<T> {
    pub fn new(
        h_hat: CVector<T>,
        g_hat: Vec<T>,
        alpha_h: T,
        alpha_g: T,
        delta_h: T,
        delta_g: T,
    ) -> Result<Self> {
        require_nonzero_c(&h_hat, "h_hat")?;
        require_nonzero_r(&g_hat, "g_hat")?;
        let two = T::lit(2.0);
        if alpha_h < T::zero() || alpha_h >= two || alpha_g < T::zero() || alpha_g >= two {
            return Err(FilterError::InvalidParameter(format!(
                "normalized step-sizes must lie in [0, 2): alpha_h = {alpha_h}, alpha_g = {alpha_g}"
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

    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        let xg = x.mul_vec_real(&self.g_hat);
        let e = y - linalg::inner(&self.h_hat, &xg);
        let xh = x.adjoint_mul_vec(&self.h_hat);
        let (w, quotient) = g_direction_and_quotient(&self.h_hat, x, &xh, e, self.delta_g);

        let den_h = self.delta_h + linalg::norm_sq(&xg);
        linalg::axpy(e.conj() * (self.alpha_h / den_h), &xg, &mut self.h_hat);

        let two = T::lit(2.0);
        let scale = self.alpha_g * two * quotient;
        for (gi, &wm) in self.g_hat.iter_mut().zip(&w) {
            *gi += scale * wm;
        }
        self.step += 1;
        if !linalg::vec_is_finite(&self.h_hat) || !self.g_hat.iter().all(|v| v.is_finite()) {
            return Err(FilterError::NonFinite {
                filter: "CRBNLMS",
                step: self.step,
            });
        }
        Ok(e)
    }
}

/// The real update direction `w = Re[e X^H h]` and the optimal real step
/// for `g += mu w`: `mu* = ||w||^2 / |h^H X w|^2` (regularized by
/// `delta` in the denominator). `mu*` minimizes `|y - h^H X (g + mu w)|^2`
/// over real `mu`.
pub fn crbnlms_g_quotient<T: Scalar>(
    h_hat: &[Complex<T>],
    x: &InputMatrix<T>,
    e: Complex<T>,
) -> (Vec<T>, T) {
    let xh = x.adjoint_mul_vec(h_hat);
    g_direction_and_quotient(h_hat, x, &xh, e, T::zero())
}

fn g_direction_and_quotient<T: Scalar>(
    h_hat: &[Complex<T>],
    x: &InputMatrix<T>,
    xh: &[Complex<T>],
    e: Complex<T>,
    delta: T,
) -> (Vec<T>, T) {
    let w: Vec<T> = xh.iter().map(|&v| (e * v).re).collect();
    let xw = x.mul_vec_real(&w);
    let s = linalg::inner(h_hat, &xw); // h^H X w
    let num = w.iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b);
    let den = delta + s.norm_sqr();
    let quotient = if den > T::zero() {
        num / den
    } else {
        T::zero()
    };
    (w, quotient)
}

/// Mixed RLS per the two-column-gain recursion. `p_g` is the usual
/// complex L×L inverse correlation; `p_h_tilde` is the real symmetric
/// M×M matrix tracking `P_h + conj(P_h)`.
#[derive(Debug, Clone)]
pub struct CrbrlsState<T> {
    pub h_hat: CVector<T>,
    pub g_hat: Vec<T>,
    p_g: CMatrix<T>,
    p_h_tilde: CMatrix<T>,
    lambda: T,
    step: usize,
    im_residual: T,
}

impl<T: Scalar> CrbrlsState<T> {
    /// `P_g,0 = nu_g I`, `P~_h,0 = nu_h I` (real symmetric), `0 < lambda <= 1`.
    pub fn new(h_hat: CVector<T>, g_hat: Vec<T>, nu_g: T, nu_h: T, lambda: T) -> Result<Self> {
        require_nonzero_c(&h_hat, "h_hat")?;
        require_nonzero_r(&g_hat, "g_hat")?;
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
        let mut p_h_tilde = CMatrix::identity(m);
        p_h_tilde.scale(nu_h);
        Ok(Self {
            h_hat,
            g_hat,
            p_g,
            p_h_tilde,
            lambda,
            step: 0,
            im_residual: T::zero(),
        })
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Largest imaginary magnitude seen in the nominally real `g` update
    /// before projection; stays at rounding level by conjugate symmetry.
    pub fn im_residual(&self) -> T {
        self.im_residual
    }

    pub fn p_g(&self) -> &CMatrix<T> {
        &self.p_g
    }

    pub fn p_h_tilde(&self) -> &CMatrix<T> {
        &self.p_h_tilde
    }

    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        let lambda = self.lambda;
        let inv_lambda = T::one() / lambda;

        let xg = x.mul_vec_real(&self.g_hat);
        let e = y - linalg::inner(&self.h_hat, &xg);
        let xh = x.adjoint_mul_vec(&self.h_hat); // uses h_{k-1}

        // h side: identical to the fully complex RLS
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

        // g side: augmented regressor [X^H h, conj(X^H h)] and error [e, conj(e)]
        let m = self.g_hat.len();
        let xt = CMatrix::from_fn(m, 2, |i, c| if c == 0 { xh[i] } else { xh[i].conj() });
        let pt_xt = self.p_h_tilde.mul_mat(&xt);
        // gain normalization: B = I_2 + X~^H (P~/lambda) X~
        let mut b = CMatrix::<T>::identity(2);
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = Complex::<T>::zero();
                for i in 0..m {
                    acc += xt[(i, r)].conj() * pt_xt[(i, c)];
                }
                b[(r, c)] += Complex::new(acc.re * inv_lambda, acc.im * inv_lambda);
            }
        }
        let det: Complex<T> = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        if det.norm_sqr() == T::zero() {
            return Err(FilterError::Singular {
                factor: "augmented gain normalization",
                iteration: self.step + 1,
                rcond: 0.0,
            });
        }
        let b_inv = {
            let mut inv = CMatrix::zeros(2, 2);
            inv[(0, 0)] = b[(1, 1)] / det;
            inv[(1, 1)] = b[(0, 0)] / det;
            inv[(0, 1)] = -b[(0, 1)] / det;
            inv[(1, 0)] = -b[(1, 0)] / det;
            inv
        };
        let mut k_h = pt_xt.mul_mat(&b_inv); // M×2, missing the 1/lambda
        k_h.scale(inv_lambda);

        // P~ update: P~ = (P~ - K X~^H P~) / lambda, with X~^H P~ = (P~ X~)^H
        let correction = k_h.mul_mat(&pt_xt.adjoint());
        let mut p_new = self.p_h_tilde.sub(&correction);
        p_new.scale(inv_lambda);
        self.p_h_tilde = p_new.hermitian_part().real_part();

        // g update on the augmented error; real by conjugate symmetry
        let mut max_im = T::zero();
        for i in 0..m {
            let upd = k_h[(i, 0)] * e + k_h[(i, 1)] * e.conj();
            max_im = max_im.max(upd.im.abs());
            self.g_hat[i] += upd.re;
        }
        self.im_residual = self.im_residual.max(max_im);

        self.step += 1;
        let finite = linalg::vec_is_finite(&self.h_hat)
            && self.g_hat.iter().all(|v| v.is_finite())
            && self.p_g.is_finite()
            && self.p_h_tilde.is_finite();
        if !finite {
            return Err(FilterError::NonFinite {
                filter: "CRBRLS",
                step: self.step,
            });
        }
        Ok(e)
    }
}

/// Real vector lifted to complex, for misalignment evaluation against
/// complex truths.
pub fn complexify<T: Scalar>(v: &[T]) -> CVector<T> {
    v.iter().map(|&x| Complex::new(x, T::zero())).collect()
}

fn require_nonzero_c<T: Scalar>(v: &[Complex<T>], name: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(FilterError::EmptyInput(name));
    }
    if linalg::norm_sq(v) == T::zero() {
        return Err(FilterError::ZeroVector(name));
    }
    Ok(())
}

fn require_nonzero_r<T: Scalar>(v: &[T], name: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(FilterError::EmptyInput(name));
    }
    if v.iter().all(|&x| x == T::zero()) {
        return Err(FilterError::ZeroVector(name));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;
    use crate::signals::Rng;
    use num_complex::Complex64 as C;

    fn random_x(rng: &mut Rng, l: usize, m: usize) -> InputMatrix<f64> {
        InputMatrix::from_fn(l, m, |_, _| rng.proper_gaussian(1.0))
    }

    fn real_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| rng.proper_gaussian::<f64>(1.0).re * 2.0f64.sqrt())
            .collect()
    }

    #[test]
    fn zero_steps_are_identity() {
        let mut rng = Rng::new(90);
        let mut lms = CrblmsState::new(
            rng.proper_gaussian_vec(1.0, 3),
            real_vec(&mut rng, 2),
            0.0,
            0.0,
        )
        .unwrap();
        let h0 = lms.h_hat.clone();
        let g0 = lms.g_hat.clone();
        let x = random_x(&mut rng, 3, 2);
        lms.step(&x, rng.proper_gaussian(1.0)).unwrap();
        assert_eq!(lms.h_hat, h0);
        assert_eq!(lms.g_hat, g0);

        let mut nlms = CrbnlmsState::new(
            rng.proper_gaussian_vec(1.0, 3),
            real_vec(&mut rng, 2),
            0.0,
            0.0,
            1e-4,
            1e-4,
        )
        .unwrap();
        let h0 = nlms.h_hat.clone();
        let g0 = nlms.g_hat.clone();
        nlms.step(&x, rng.proper_gaussian(1.0)).unwrap();
        assert_eq!(nlms.h_hat, h0);
        assert_eq!(nlms.g_hat, g0);
    }

    #[test]
    fn crblms_g_update_matches_real_finite_differences() {
        let mut rng = Rng::new(91);
        let l = 4;
        let m = 3;
        for _ in 0..20 {
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = real_vec(&mut rng, m);
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            let xg = x.mul_vec_real(&g);
            let e = y - inner(&h, &xg);
            let xh = x.adjoint_mul_vec(&h);

            let cost = |gv: &[f64]| {
                let e = y - inner(&h, &x.mul_vec_real(gv));
                e.norm_sqr()
            };
            let step = 1e-6;
            let mut probe = g.clone();
            for i in 0..m {
                probe[i] += step;
                let jp = cost(&probe);
                probe[i] -= 2.0 * step;
                let jm = cost(&probe);
                probe[i] = g[i];
                let fd = (jp - jm) / (2.0 * step);
                let analytic = -2.0 * (e * xh[i]).re;
                assert!(
                    (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                    "fd {fd} vs analytic {analytic}"
                );
            }
        }
    }

    #[test]
    fn crbnlms_quotient_is_a_local_minimum() {
        let mut rng = Rng::new(92);
        let l = 5;
        let m = 3;
        for _ in 0..50 {
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = real_vec(&mut rng, m);
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            let e = y - inner(&h, &x.mul_vec_real(&g));
            let (w, mu) = crbnlms_g_quotient(&h, &x, e);
            if w.iter().map(|v| v * v).sum::<f64>() < 1e-20 {
                continue; // zero gradient direction, nothing to minimize
            }
            let posterior = |mu: f64| {
                let g_new: Vec<f64> = g.iter().zip(&w).map(|(&gi, &wi)| gi + mu * wi).collect();
                (y - inner(&h, &x.mul_vec_real(&g_new))).norm_sqr()
            };
            let at_opt = posterior(mu);
            assert!(
                posterior(mu * 1.1) > at_opt,
                "up-perturbation must increase"
            );
            assert!(
                posterior(mu * 0.9) > at_opt,
                "down-perturbation must increase"
            );
        }
    }

    #[test]
    fn crbnlms_quotient_matches_wirtinger_oracle() {
        // Extended to a complex step v, the a posteriori cost
        // |e - v s|^2 has conjugate-Wirtinger gradient -conj(s)(e - v s);
        // at the real quotient its real part vanishes.
        use crate::model::fd_wirtinger_gradient;
        let mut rng = Rng::new(93);
        let l = 4;
        let m = 2;
        for _ in 0..20 {
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = real_vec(&mut rng, m);
            let x = random_x(&mut rng, l, m);
            let y = rng.proper_gaussian(1.0);
            let e = y - inner(&h, &x.mul_vec_real(&g));
            let (w, mu) = crbnlms_g_quotient(&h, &x, e);
            let xw = x.mul_vec_real(&w);
            let s = inner(&h, &xw);
            if s.norm() < 1e-10 {
                continue;
            }
            let cost = |v: &[C]| (e - v[0] * s).norm_sqr();
            let probe = vec![C::new(rng.uniform::<f64>(), rng.uniform::<f64>())];
            let fd = fd_wirtinger_gradient(cost, &probe, 1e-6);
            let analytic = -(s.conj()) * (e - probe[0] * s);
            assert!((fd[0] - analytic).norm() <= 1e-6 * analytic.norm().max(1e-6));
            let fd_at_opt = fd_wirtinger_gradient(cost, &[C::new(mu, 0.0)], 1e-6);
            assert!(
                fd_at_opt[0].re.abs() <= 1e-6 * s.norm_sqr().max(1.0),
                "real direction not stationary: {}",
                fd_at_opt[0].re
            );
        }
    }

    #[test]
    fn crbrls_updates_stay_real() {
        let mut rng = Rng::new(94);
        let l = 6;
        let m = 3;
        let mut st = CrbrlsState::new(
            rng.proper_gaussian_vec(1.0, l),
            real_vec(&mut rng, m),
            10.0,
            10.0,
            0.97,
        )
        .unwrap();
        let h_true = rng.proper_gaussian_vec(1.0, l);
        let g_true = real_vec(&mut rng, m);
        for _ in 0..500 {
            let x = random_x(&mut rng, l, m);
            let y = crate::model::evaluate_bilinear(
                &h_true,
                &complexify(&g_true),
                &x,
                rng.proper_gaussian(1e-3),
            )
            .unwrap();
            st.step(&x, y).unwrap();
        }
        assert!(
            st.im_residual() <= 1e-12,
            "imag residual {}",
            st.im_residual()
        );
        // and it actually identifies the real-g system
        let f_true = crate::model::linearize(&h_true, &complexify(&g_true)).unwrap();
        let f_hat = crate::model::linearize(&st.h_hat, &complexify(&st.g_hat)).unwrap();
        let nm = crate::model::normalized_misalignment(&f_true, &f_hat).unwrap();
        assert!(nm.nm_db < -40.0, "NM {} dB", nm.nm_db);
    }

    #[test]
    fn crblms_identifies_real_g_system() {
        let mut rng = Rng::new(95);
        let l = 4;
        let m = 2;
        let h_true = rng.proper_gaussian_vec(1.0, l);
        let g_true = real_vec(&mut rng, m);
        let mut st = CrblmsState::new(
            rng.proper_gaussian_vec(0.5, l),
            real_vec(&mut rng, m),
            0.02,
            0.01,
        )
        .unwrap();
        let mut last_nm = f64::INFINITY;
        for k in 0..20_000 {
            let x = random_x(&mut rng, l, m);
            let y = crate::model::evaluate_bilinear(
                &h_true,
                &complexify(&g_true),
                &x,
                rng.proper_gaussian(1e-3),
            )
            .unwrap();
            st.step(&x, y).unwrap();
            if k == 19_999 {
                let f_true = crate::model::linearize(&h_true, &complexify(&g_true)).unwrap();
                let f_hat = crate::model::linearize(&st.h_hat, &complexify(&st.g_hat)).unwrap();
                last_nm = crate::model::normalized_misalignment(&f_true, &f_hat)
                    .unwrap()
                    .nm_db;
            }
        }
        assert!(last_nm < -30.0, "NM {last_nm} dB");
    }
}
