//! Split-real bilinear filter structures and the complex linear NLMS
//! baseline.
//!
//! The 2R structure runs one real bilinear filter on the real signal
//! parts and one on the imaginary parts:
//! `y_hat = h_re^T Re[X] g_re + j h_im^T Im[X] g_im`.
//! The 4R structure uses four filters so both output parts see both
//! signal parts. Expanding a fully complex bilinear system into real
//! parts produces eight bilinear summands, so neither structure can
//! represent a general complex system; the gap is what the experiments
//! measure.
//!
//! NLMS versions normalize each path's update by the squared norm of
//! that path's own regressor, which zeroes the path's a posteriori
//! error contribution at `alpha = 1`, `delta = 0` exactly as in the
//! fully complex case.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{FilterError, Result};
use crate::linalg::{self};
use crate::model::InputMatrix;
use crate::{CVector, Scalar};

/// Per-path step sizes of the 2R structure.
#[derive(Debug, Clone, Copy)]
pub struct Steps2r<T> {
    pub h_re: T,
    pub h_im: T,
    pub g_re: T,
    pub g_im: T,
}

impl<T: Scalar> Steps2r<T> {
    pub fn uniform(v: T) -> Self {
        Self {
            h_re: v,
            h_im: v,
            g_re: v,
            g_im: v,
        }
    }
}

/// Per-path normalized step sizes and regularizers of the 2R NLMS.
#[derive(Debug, Clone, Copy)]
pub struct Nlms2rParams<T> {
    pub alpha: Steps2r<T>,
    pub delta: Steps2r<T>,
}

impl<T: Scalar> Nlms2rParams<T> {
    pub fn uniform(alpha: T, delta: T) -> Self {
        Self {
            alpha: Steps2r::uniform(alpha),
            delta: Steps2r::uniform(delta),
        }
    }
}

/// State of the 2R bilinear filter: two real coefficient pairs.
#[derive(Debug, Clone)]
pub struct SplitReal2r<T> {
    pub h_re: Vec<T>,
    pub h_im: Vec<T>,
    pub g_re: Vec<T>,
    pub g_im: Vec<T>,
    step: usize,
}

impl<T: Scalar> SplitReal2r<T> {
    pub fn new(h_re: Vec<T>, h_im: Vec<T>, g_re: Vec<T>, g_im: Vec<T>) -> Result<Self> {
        if h_re.len() != h_im.len() || g_re.len() != g_im.len() {
            return Err(FilterError::DimensionMismatch {
                context: "SplitReal2r",
                left: format!("h parts {}/{}", h_re.len(), h_im.len()),
                right: format!("g parts {}/{}", g_re.len(), g_im.len()),
            });
        }
        Ok(Self {
            h_re,
            h_im,
            g_re,
            g_im,
            step: 0,
        })
    }

    /// Starts both real pairs from the parts of a complex pair.
    pub fn from_complex(h0: &[Complex<T>], g0: &[Complex<T>]) -> Self {
        Self {
            h_re: h0.iter().map(|z| z.re).collect(),
            h_im: h0.iter().map(|z| z.im).collect(),
            g_re: g0.iter().map(|z| z.re).collect(),
            g_im: g0.iter().map(|z| z.im).collect(),
            step: 0,
        }
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Filter output before any update.
    pub fn output(&self, x: &InputMatrix<T>) -> Complex<T> {
        let y_re = dot(&self.h_re, &re_mul(x, &self.g_re));
        let y_im = dot(&self.h_im, &im_mul(x, &self.g_im));
        Complex::new(y_re, y_im)
    }

    /// One gradient-descent step; returns the complex error `e_k`.
    pub fn lms_step(
        &mut self,
        steps: &Steps2r<T>,
        x: &InputMatrix<T>,
        y: Complex<T>,
    ) -> Result<Complex<T>> {
        let rxg = re_mul(x, &self.g_re);
        let ixg = im_mul(x, &self.g_im);
        let e_re = y.re - dot(&self.h_re, &rxg);
        let e_im = y.im - dot(&self.h_im, &ixg);
        let rxh = re_tmul(x, &self.h_re);
        let ixh = im_tmul(x, &self.h_im);
        axpy_real(steps.h_re * e_re, &rxg, &mut self.h_re);
        axpy_real(steps.h_im * e_im, &ixg, &mut self.h_im);
        axpy_real(steps.g_re * e_re, &rxh, &mut self.g_re);
        axpy_real(steps.g_im * e_im, &ixh, &mut self.g_im);
        self.finish_step("2R BL LMS")?;
        Ok(Complex::new(e_re, e_im))
    }

    /// One per-path normalized step; returns the complex error `e_k`.
    pub fn nlms_step(
        &mut self,
        p: &Nlms2rParams<T>,
        x: &InputMatrix<T>,
        y: Complex<T>,
    ) -> Result<Complex<T>> {
        let rxg = re_mul(x, &self.g_re);
        let ixg = im_mul(x, &self.g_im);
        let e_re = y.re - dot(&self.h_re, &rxg);
        let e_im = y.im - dot(&self.h_im, &ixg);
        let rxh = re_tmul(x, &self.h_re);
        let ixh = im_tmul(x, &self.h_im);
        axpy_real(
            p.alpha.h_re * e_re / (p.delta.h_re + nsq(&rxg)),
            &rxg,
            &mut self.h_re,
        );
        axpy_real(
            p.alpha.h_im * e_im / (p.delta.h_im + nsq(&ixg)),
            &ixg,
            &mut self.h_im,
        );
        axpy_real(
            p.alpha.g_re * e_re / (p.delta.g_re + nsq(&rxh)),
            &rxh,
            &mut self.g_re,
        );
        axpy_real(
            p.alpha.g_im * e_im / (p.delta.g_im + nsq(&ixh)),
            &ixh,
            &mut self.g_im,
        );
        self.finish_step("2R BL NLMS")?;
        Ok(Complex::new(e_re, e_im))
    }

    /// Equivalent widely linear coefficients `(p, q)` with
    /// `y_hat = p^T vec(X) + q^T conj(vec(X))`.
    pub fn widely_linear(&self) -> (CVector<T>, CVector<T>) {
        let a = kron_real(&self.g_re, &self.h_re);
        let b = kron_real(&self.g_im, &self.h_im);
        let half = T::lit(0.5);
        let p = a
            .iter()
            .zip(&b)
            .map(|(&ai, &bi)| Complex::new((ai + bi) * half, T::zero()))
            .collect();
        let q = a
            .iter()
            .zip(&b)
            .map(|(&ai, &bi)| Complex::new((ai - bi) * half, T::zero()))
            .collect();
        (p, q)
    }

    fn finish_step(&mut self, filter: &'static str) -> Result<()> {
        self.step += 1;
        let finite = all_finite(&self.h_re)
            && all_finite(&self.h_im)
            && all_finite(&self.g_re)
            && all_finite(&self.g_im);
        if !finite {
            return Err(FilterError::NonFinite {
                filter,
                step: self.step,
            });
        }
        Ok(())
    }
}

/// Per-path step sizes of the 4R structure. Path order matches the
/// output expansion: 1 = (Re out, Re X), 2 = (Re out, Im X),
/// 3 = (Im out, Re X), 4 = (Im out, Im X).
#[derive(Debug, Clone, Copy)]
pub struct Steps4r<T> {
    pub h: [T; 4],
    pub g: [T; 4],
}

impl<T: Scalar> Steps4r<T> {
    pub fn uniform(v: T) -> Self {
        Self {
            h: [v; 4],
            g: [v; 4],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Nlms4rParams<T> {
    pub alpha: Steps4r<T>,
    pub delta: Steps4r<T>,
}

impl<T: Scalar> Nlms4rParams<T> {
    pub fn uniform(alpha: T, delta: T) -> Self {
        Self {
            alpha: Steps4r::uniform(alpha),
            delta: Steps4r::uniform(delta),
        }
    }
}

/// State of the 4R bilinear filter: four real coefficient pairs.
#[derive(Debug, Clone)]
pub struct SplitReal4r<T> {
    pub h: [Vec<T>; 4],
    pub g: [Vec<T>; 4],
    step: usize,
}

impl<T: Scalar> SplitReal4r<T> {
    pub fn new(h: [Vec<T>; 4], g: [Vec<T>; 4]) -> Result<Self> {
        let l = h[0].len();
        let m = g[0].len();
        if h.iter().any(|v| v.len() != l) || g.iter().any(|v| v.len() != m) {
            return Err(FilterError::DimensionMismatch {
                context: "SplitReal4r",
                left: "h paths".to_string(),
                right: "g paths".to_string(),
            });
        }
        Ok(Self { h, g, step: 0 })
    }

    /// Starts every path from the parts of a complex pair: real parts on
    /// the Re[X] paths, imaginary parts on the Im[X] paths.
    pub fn from_complex(h0: &[Complex<T>], g0: &[Complex<T>]) -> Self {
        let hr: Vec<T> = h0.iter().map(|z| z.re).collect();
        let hi: Vec<T> = h0.iter().map(|z| z.im).collect();
        let gr: Vec<T> = g0.iter().map(|z| z.re).collect();
        let gi: Vec<T> = g0.iter().map(|z| z.im).collect();
        Self {
            h: [hr.clone(), hi.clone(), hr, hi],
            g: [gr.clone(), gi.clone(), gr, gi],
            step: 0,
        }
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn output(&self, x: &InputMatrix<T>) -> Complex<T> {
        let y_re =
            dot(&self.h[0], &re_mul(x, &self.g[0])) + dot(&self.h[1], &im_mul(x, &self.g[1]));
        let y_im =
            dot(&self.h[2], &re_mul(x, &self.g[2])) + dot(&self.h[3], &im_mul(x, &self.g[3]));
        Complex::new(y_re, y_im)
    }

    pub fn lms_step(
        &mut self,
        steps: &Steps4r<T>,
        x: &InputMatrix<T>,
        y: Complex<T>,
    ) -> Result<Complex<T>> {
        let r = [
            re_mul(x, &self.g[0]),
            im_mul(x, &self.g[1]),
            re_mul(x, &self.g[2]),
            im_mul(x, &self.g[3]),
        ];
        let e_re = y.re - (dot(&self.h[0], &r[0]) + dot(&self.h[1], &r[1]));
        let e_im = y.im - (dot(&self.h[2], &r[2]) + dot(&self.h[3], &r[3]));
        let t = [
            re_tmul(x, &self.h[0]),
            im_tmul(x, &self.h[1]),
            re_tmul(x, &self.h[2]),
            im_tmul(x, &self.h[3]),
        ];
        let errs = [e_re, e_re, e_im, e_im];
        for i in 0..4 {
            axpy_real(steps.h[i] * errs[i], &r[i], &mut self.h[i]);
        }
        for i in 0..4 {
            axpy_real(steps.g[i] * errs[i], &t[i], &mut self.g[i]);
        }
        self.finish_step("4R BL LMS")?;
        Ok(Complex::new(e_re, e_im))
    }

    pub fn nlms_step(
        &mut self,
        p: &Nlms4rParams<T>,
        x: &InputMatrix<T>,
        y: Complex<T>,
    ) -> Result<Complex<T>> {
        let r = [
            re_mul(x, &self.g[0]),
            im_mul(x, &self.g[1]),
            re_mul(x, &self.g[2]),
            im_mul(x, &self.g[3]),
        ];
        let e_re = y.re - (dot(&self.h[0], &r[0]) + dot(&self.h[1], &r[1]));
        let e_im = y.im - (dot(&self.h[2], &r[2]) + dot(&self.h[3], &r[3]));
        let t = [
            re_tmul(x, &self.h[0]),
            im_tmul(x, &self.h[1]),
            re_tmul(x, &self.h[2]),
            im_tmul(x, &self.h[3]),
        ];
        let errs = [e_re, e_re, e_im, e_im];
        for i in 0..4 {
            let c = p.alpha.h[i] * errs[i] / (p.delta.h[i] + nsq(&r[i]));
            axpy_real(c, &r[i], &mut self.h[i]);
        }
        for i in 0..4 {
            let c = p.alpha.g[i] * errs[i] / (p.delta.g[i] + nsq(&t[i]));
            axpy_real(c, &t[i], &mut self.g[i]);
        }
        self.finish_step("4R BL NLMS")?;
        Ok(Complex::new(e_re, e_im))
    }

    /// Equivalent widely linear coefficients, with
    /// `p = ((a1 + a4) + j (a3 - a2)) / 2`,
    /// `q = ((a1 - a4) + j (a2 + a3)) / 2` and `a_i = g_i ⊗ h_i`.
    pub fn widely_linear(&self) -> (CVector<T>, CVector<T>) {
        let a1 = kron_real(&self.g[0], &self.h[0]);
        let a2 = kron_real(&self.g[1], &self.h[1]);
        let a3 = kron_real(&self.g[2], &self.h[2]);
        let a4 = kron_real(&self.g[3], &self.h[3]);
        let half = T::lit(0.5);
        let mut p = Vec::with_capacity(a1.len());
        let mut q = Vec::with_capacity(a1.len());
        for i in 0..a1.len() {
            p.push(Complex::new((a1[i] + a4[i]) * half, (a3[i] - a2[i]) * half));
            q.push(Complex::new((a1[i] - a4[i]) * half, (a2[i] + a3[i]) * half));
        }
        (p, q)
    }

    fn finish_step(&mut self, filter: &'static str) -> Result<()> {
        self.step += 1;
        let finite = self.h.iter().all(|v| all_finite(v)) && self.g.iter().all(|v| all_finite(v));
        if !finite {
            return Err(FilterError::NonFinite {
                filter,
                step: self.step,
            });
        }
        Ok(())
    }
}

/// Classical complex NLMS on the linearized model `y = f^T vec(X)`.
///
/// The update conjugates the regressor so that the noiseless truth is a
/// fixed point: `f += alpha e conj(vec(X)) / (delta + ||vec(X)||^2)`.
#[derive(Debug, Clone)]
pub struct LinearNlmsState<T> {
    pub f_hat: CVector<T>,
    pub alpha: T,
    pub delta: T,
    step: usize,
}

impl<T: Scalar> LinearNlmsState<T> {
    pub fn new(f_hat: CVector<T>, alpha: T, delta: T) -> Result<Self> {
        if f_hat.is_empty() {
            return Err(FilterError::EmptyInput("f_hat"));
        }
        let two = T::lit(2.0);
        if alpha < T::zero() || alpha >= two || delta < T::zero() {
            return Err(FilterError::InvalidParameter(format!(
                "linear NLMS needs 0 <= alpha < 2 and delta >= 0, got alpha = {alpha}, delta = {delta}"
            )));
        }
        Ok(Self {
            f_hat,
            alpha,
            delta,
            step: 0,
        })
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn step(&mut self, x: &InputMatrix<T>, y: Complex<T>) -> Result<Complex<T>> {
        let xt = crate::model::vec_of(x);
        assert_eq!(xt.len(), self.f_hat.len(), "vec(X) vs f");
        let e = y - linalg::dotu(&self.f_hat, &xt);
        let den = self.delta + linalg::norm_sq(&xt);
        let coeff = e * (self.alpha / den);
        for (fi, &xi) in self.f_hat.iter_mut().zip(&xt) {
            *fi += coeff * xi.conj();
        }
        self.step += 1;
        if !linalg::vec_is_finite(&self.f_hat) {
            return Err(FilterError::NonFinite {
                filter: "linear NLMS",
                step: self.step,
            });
        }
        Ok(e)
    }

    pub fn widely_linear(&self) -> (CVector<T>, CVector<T>) {
        (self.f_hat.clone(), vec![Complex::zero(); self.f_hat.len()])
    }
}

/// `g ⊗ h` for real vectors, same layout as the complex Kronecker
/// product: index `m * L + i` holds `g[m] h[i]`.
fn kron_real<T: Scalar>(g: &[T], h: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(g.len() * h.len());
    for &gm in g {
        for &hi in h {
            out.push(gm * hi);
        }
    }
    out
}

fn re_mul<T: Scalar>(x: &InputMatrix<T>, v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); x.rows()];
    for c in 0..x.cols() {
        let vc = v[c];
        for (o, z) in out.iter_mut().zip(x.col(c)) {
            *o += z.re * vc;
        }
    }
    out
}

fn im_mul<T: Scalar>(x: &InputMatrix<T>, v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); x.rows()];
    for c in 0..x.cols() {
        let vc = v[c];
        for (o, z) in out.iter_mut().zip(x.col(c)) {
            *o += z.im * vc;
        }
    }
    out
}

fn re_tmul<T: Scalar>(x: &InputMatrix<T>, v: &[T]) -> Vec<T> {
    (0..x.cols())
        .map(|c| {
            x.col(c)
                .iter()
                .zip(v)
                .map(|(z, &vi)| z.re * vi)
                .fold(T::zero(), |a, b| a + b)
        })
        .collect()
}

fn im_tmul<T: Scalar>(x: &InputMatrix<T>, v: &[T]) -> Vec<T> {
    (0..x.cols())
        .map(|c| {
            x.col(c)
                .iter()
                .zip(v)
                .map(|(z, &vi)| z.im * vi)
                .fold(T::zero(), |a, b| a + b)
        })
        .collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x * y)
        .fold(T::zero(), |s, v| s + v)
}

fn nsq<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).fold(T::zero(), |s, v| s + v)
}

fn axpy_real<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn all_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}
