//! Seedable signal generation and input-matrix construction.
//!
//! All randomness flows through [`Rng`], a counter-based generator
//! (ChaCha8 keyed by a 64-bit seed, with independent substreams selected
//! by a stream id). Gaussian variates use the Marsaglia polar method
//! with the logarithm taken from `libm`, so a given `(seed, stream)`
//! produces a bit-identical sample sequence on every platform.

use num_complex::Complex;
use num_traits::Zero;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMatrix;
use crate::model::InputMatrix;
use crate::{CVector, Scalar};

/// Deterministic random source. Identical `(seed, stream)` pairs yield
/// identical sample streams.
#[derive(Debug, Clone)]
pub struct Rng {
    chacha: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent substream of the same seed; used to give systems,
    /// initial estimates, signals and noise their own streams.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut chacha = ChaCha8Rng::seed_from_u64(seed);
        chacha.set_stream(stream);
        Self {
            chacha,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 significant bits.
    pub fn uniform<T: Scalar>(&mut self) -> T {
        let bits = self.next_u64() >> 11;
        T::lit(bits as f64 * (1.0 / 9007199254740992.0))
    }

    /// One proper complex Gaussian sample with `E[|z|^2] = sigma^2`
    /// (real and imaginary parts independent, each of variance
    /// `sigma^2 / 2`), via the Marsaglia polar method.
    pub fn proper_gaussian<T: Scalar>(&mut self, sigma: T) -> Complex<T> {
        let one = T::one();
        let two = T::lit(2.0);
        loop {
            let u = two * self.uniform::<T>() - one;
            let v = two * self.uniform::<T>() - one;
            let s = u * u + v * v;
            if s > T::zero() && s < one {
                let scale = sigma * (-s.portable_ln() / s).sqrt();
                return Complex::new(u * scale, v * scale);
            }
        }
    }

    pub fn proper_gaussian_vec<T: Scalar>(&mut self, sigma: T, count: usize) -> CVector<T> {
        (0..count).map(|_| self.proper_gaussian(sigma)).collect()
    }
}

/// Stochastic input-signal models used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalModel<T> {
    /// I.i.d. proper complex Gaussian samples, `E[|x|^2] = sigma^2`.
    WhiteProperGaussian { sigma: T },
    /// First-order moving average `x_k = u_k + u_{k-1}` with `u` proper
    /// Gaussian of standard deviation `sigma`; output variance is
    /// `2 sigma^2`.
    MovingAverage1 { sigma: T },
}

impl<T: Scalar> SignalModel<T> {
    pub fn sigma(&self) -> T {
        match *self {
            SignalModel::WhiteProperGaussian { sigma } => sigma,
            SignalModel::MovingAverage1 { sigma } => sigma,
        }
    }

    pub fn generate(&self, rng: &mut Rng, count: usize) -> CVector<T> {
        match *self {
            SignalModel::WhiteProperGaussian { sigma } => sample_proper_gaussian(rng, sigma, count),
            SignalModel::MovingAverage1 { sigma } => generate_ma1(rng, sigma, count),
        }
    }

    /// Per-channel lag covariance matrix `R_xx[i][j] = E[x_{k-i} conj(x_{k-j})]`
    /// of size `l`. For `m` independent channels the full covariance of
    /// `vec(X_k)` is block diagonal: `I_m ⊗ R_xx` (see [`SignalModel::stacked_covariance`]).
    pub fn lag_covariance(&self, l: usize) -> CMatrix<T> {
        match *self {
            SignalModel::WhiteProperGaussian { sigma } => {
                let mut r = CMatrix::identity(l);
                r.scale(sigma * sigma);
                r
            }
            SignalModel::MovingAverage1 { sigma } => {
                let var = sigma * sigma;
                CMatrix::from_fn(l, l, |i, j| {
                    let lag = i.abs_diff(j);
                    if lag == 0 {
                        Complex::new(var + var, T::zero())
                    } else if lag == 1 {
                        Complex::new(var, T::zero())
                    } else {
                        Complex::zero()
                    }
                })
            }
        }
    }

    /// Covariance of `vec(X_k)` for `m` i.i.d. channels stacked with `l`
    /// lags each: `I_m ⊗ R_xx`.
    pub fn stacked_covariance(&self, l: usize, m: usize) -> CMatrix<T> {
        let rxx = self.lag_covariance(l);
        let mut r = CMatrix::zeros(l * m, l * m);
        for b in 0..m {
            for j in 0..l {
                for i in 0..l {
                    r[(b * l + i, b * l + j)] = rxx[(i, j)];
                }
            }
        }
        r
    }
}

/// Transmitter IQ imbalance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqImbalance<T> {
    /// Amplitude imbalance factor.
    pub gain: T,
    /// Phase imbalance in radians.
    pub phase: T,
}

/// The direct/image coefficients of the imbalance model
/// `u_k = g1 x_k + g2 conj(x_k)`:
/// `g1 = (1 + gain e^{-j phase}) / 2`, `g2 = (1 - gain e^{+j phase}) / 2`.
pub fn iq_coefficients<T: Scalar>(imb: IqImbalance<T>) -> (Complex<T>, Complex<T>) {
    let half = T::lit(0.5);
    let c = imb.phase.portable_cos();
    let s = imb.phase.portable_sin();
    let rot_neg = Complex::new(c, -s) * imb.gain;
    let rot_pos = Complex::new(c, s) * imb.gain;
    let one = Complex::new(T::one(), T::zero());
    let g1 = (one + rot_neg) * half;
    let g2 = (one - rot_pos) * half;
    (g1, g2)
}

/// I.i.d. proper complex Gaussian samples with `E[|x|^2] = sigma^2`.
pub fn sample_proper_gaussian<T: Scalar>(rng: &mut Rng, sigma: T, count: usize) -> CVector<T> {
    rng.proper_gaussian_vec(sigma, count)
}

/// First-order moving average `x_k = u_k + u_{k-1}` with `u` proper
/// Gaussian of standard deviation `u_sigma`. One extra driving sample is
/// drawn so the output is stationary from the first entry.
pub fn generate_ma1<T: Scalar>(rng: &mut Rng, u_sigma: T, count: usize) -> CVector<T> {
    let u = rng.proper_gaussian_vec(u_sigma, count + 1);
    (0..count).map(|k| u[k + 1] + u[k]).collect()
}

/// MISO input matrix at time `k` (0-based): row `i` holds the `M`
/// channel samples at time `k - i`, so column `m` is the last `L`
/// samples of channel `m`. Indices before the start of the record read
/// as zero.
pub fn build_miso_matrix<T: Scalar>(channels: &[CVector<T>], l: usize, k: usize) -> InputMatrix<T> {
    let m = channels.len();
    InputMatrix::from_fn(l, m, |i, c| {
        if k >= i && k - i < channels[c].len() {
            channels[c][k - i]
        } else {
            Complex::zero()
        }
    })
}

/// Memory-free basis function for Hammerstein models.
pub type BasisFn<T> = fn(Complex<T>) -> Complex<T>;

/// The identity/conjugate basis of the IQ-imbalance transmitter model.
pub fn iq_basis<T: Scalar>() -> [BasisFn<T>; 2] {
    [|z| z, |z| z.conj()]
}

/// Hammerstein input matrix at time `k`: entry `(i, m)` is
/// `basis[m](x_{k-i})`, with the input reading as zero before the start
/// of the record.
pub fn build_hammerstein_matrix<T: Scalar>(
    x: &[Complex<T>],
    basis: &[BasisFn<T>],
    l: usize,
    k: usize,
) -> InputMatrix<T> {
    assert!(!basis.is_empty(), "basis must be non-empty");
    InputMatrix::from_fn(l, basis.len(), |i, m| {
        let sample = if k >= i && k - i < x.len() {
            x[k - i]
        } else {
            Complex::zero()
        };
        basis[m](sample)
    })
}

/// Random multipath channel with exponentially decaying tap power:
/// `h_i = a_i e^{-decay * i}` with `a_i` proper Gaussian, normalized to
/// unit Euclidean norm.
pub fn synthetic_multipath_channel<T: Scalar>(rng: &mut Rng, l: usize, decay: T) -> CVector<T> {
    assert!(l >= 1);
    let mut h: CVector<T> = (0..l)
        .map(|i| {
            let w = (-decay * T::lit(i as f64)).portable_exp();
            rng.proper_gaussian(T::one()) * w
        })
        .collect();
    let norm = crate::linalg::norm_sq(&h).sqrt();
    for v in &mut h {
        *v = Complex::new(v.re / norm, v.im / norm);
    }
    h
}
