//! Second-order statistics: sample estimators and the Kronecker-structured
//! correlation matrices consumed by the bilinear Wiener filter.

use num_complex::Complex;
use num_traits::Zero;

use crate::linalg::CMatrix;
use crate::model::{mat_m, vec_of, InputMatrix};
use crate::optimum::BlockDataset;
use crate::{CVector, Scalar};

/// Covariance `R = E[vec(X) vec(X)^H]` (Hermitian, L·M square) together
/// with the cross-correlation `R_Xy = E[X y*]` (L×M).
#[derive(Debug, Clone)]
pub struct SecondOrderStats<T> {
    pub r_xx: CMatrix<T>,
    pub r_xy: CMatrix<T>,
}

impl<T: Scalar> SecondOrderStats<T> {
    /// Dimensions `(L, M)` implied by the cross-correlation matrix.
    pub fn dims(&self) -> (usize, usize) {
        self.r_xy.shape()
    }

    /// Exact statistics of a known system: `r_xy = mat_M(R f*)`.
    pub fn from_covariance_and_truth(r_xx: CMatrix<T>, f_true: &[Complex<T>], m: usize) -> Self {
        let f_conj: CVector<T> = f_true.iter().map(|z| z.conj()).collect();
        let r = r_xx.mul_vec(&f_conj);
        let r_xy = mat_m(&r, m).expect("f length divisible by M");
        Self { r_xx, r_xy }
    }

    /// `vec(R_Xy)`, the stacked cross-correlation.
    pub fn r_xy_vec(&self) -> CVector<T> {
        vec_of(&self.r_xy)
    }
}

/// Sample estimates `R = (1/N) Σ x̃_i x̃_i^H` and `r = (1/N) Σ x̃_i y_i*`.
///
/// Only the lower triangle of `R` is accumulated; the upper triangle is
/// the mirrored conjugate, so the result is Hermitian by construction.
/// Accumulation order is fixed (sample by sample) for determinism.
pub fn estimate_stats<T: Scalar>(data: &BlockDataset<T>) -> SecondOrderStats<T> {
    let (l, m) = data.shape();
    let dim = l * m;
    let mut r = CMatrix::zeros(dim, dim);
    let mut rxy = vec![Complex::zero(); dim];
    for (x, y) in data.iter() {
        let xt = vec_of(x);
        for j in 0..dim {
            let xj_conj = xt[j].conj();
            for i in j..dim {
                r[(i, j)] += xt[i] * xj_conj;
            }
        }
        let y_conj = y.conj();
        for (acc, &xi) in rxy.iter_mut().zip(&xt) {
            *acc += xi * y_conj;
        }
    }
    let scale = T::one() / T::lit(data.len() as f64);
    for j in 0..dim {
        for i in j..dim {
            let v = r[(i, j)];
            let v = Complex::new(v.re * scale, v.im * scale);
            r[(i, j)] = v;
            if i != j {
                r[(j, i)] = v.conj();
            }
        }
    }
    for v in &mut rxy {
        *v = Complex::new(v.re * scale, v.im * scale);
    }
    SecondOrderStats {
        r_xx: r,
        r_xy: mat_m(&rxy, m).expect("dims divide"),
    }
}

/// Threshold (in matrix entries) above which the Kronecker factors of
/// the sandwich products are no longer materialized.
const KRON_MATERIALIZE_MAX: usize = 4096;

/// `R_g = (g ⊗ I)^T R (g ⊗ I)*  = E[X g g^H X^H]`, the L×L correlation
/// seen by the `h` update.
pub fn build_rg<T: Scalar>(stats: &SecondOrderStats<T>, g_hat: &[Complex<T>]) -> CMatrix<T> {
    let (l, m) = stats.dims();
    assert_eq!(g_hat.len(), m, "g_hat length");
    if l * m <= KRON_MATERIALIZE_MAX {
        // literal form with the Kronecker factor materialized
        let k = kron_factor_g(g_hat, l);
        let kt = transpose(&k);
        kt.mul_mat(&stats.r_xx).mul_mat(&k.conj())
    } else {
        build_rg_blocked(stats, g_hat)
    }
}

/// Blocked contraction equivalent to [`build_rg`] without forming `g ⊗ I`:
/// `R_g = Σ_{m,m'} g_m conj(g_{m'}) R[block(m, m')]`.
fn build_rg_blocked<T: Scalar>(stats: &SecondOrderStats<T>, g_hat: &[Complex<T>]) -> CMatrix<T> {
    let (l, m) = stats.dims();
    let mut rg = CMatrix::zeros(l, l);
    for bm in 0..m {
        for bn in 0..m {
            let w = g_hat[bm] * g_hat[bn].conj();
            for j in 0..l {
                for i in 0..l {
                    rg[(i, j)] += stats.r_xx[(bm * l + i, bn * l + j)] * w;
                }
            }
        }
    }
    rg
}

/// `R_h = (I ⊗ h)^T R* (I ⊗ h)* = E[X^H h h^H X]`, the M×M correlation
/// seen by the `g` update.
pub fn build_rh<T: Scalar>(stats: &SecondOrderStats<T>, h_hat: &[Complex<T>]) -> CMatrix<T> {
    let (l, m) = stats.dims();
    assert_eq!(h_hat.len(), l, "h_hat length");
    if l * m <= KRON_MATERIALIZE_MAX {
        let k = kron_factor_h(h_hat, m);
        let kt = transpose(&k);
        kt.mul_mat(&stats.r_xx.conj()).mul_mat(&k.conj())
    } else {
        build_rh_blocked(stats, h_hat)
    }
}

/// Blocked form of [`build_rh`]:
/// `R_h[m][m'] = conj(h^H R[block(m, m')] h)`.
fn build_rh_blocked<T: Scalar>(stats: &SecondOrderStats<T>, h_hat: &[Complex<T>]) -> CMatrix<T> {
    let (l, m) = stats.dims();
    let mut rh = CMatrix::zeros(m, m);
    for bm in 0..m {
        for bn in 0..m {
            let mut acc = Complex::<T>::zero();
            for j in 0..l {
                let hj = h_hat[j];
                for i in 0..l {
                    acc += h_hat[i].conj() * stats.r_xx[(bm * l + i, bn * l + j)] * hj;
                }
            }
            rh[(bm, bn)] = acc.conj();
        }
    }
    rh
}

/// `g ⊗ I_L`, shape (L·M)×L.
fn kron_factor_g<T: Scalar>(g: &[Complex<T>], l: usize) -> CMatrix<T> {
    let m = g.len();
    let mut k = CMatrix::zeros(l * m, l);
    for (bm, &gm) in g.iter().enumerate() {
        for i in 0..l {
            k[(bm * l + i, i)] = gm;
        }
    }
    k
}

/// `I_M ⊗ h`, shape (L·M)×M.
fn kron_factor_h<T: Scalar>(h: &[Complex<T>], m: usize) -> CMatrix<T> {
    let l = h.len();
    let mut k = CMatrix::zeros(l * m, m);
    for bm in 0..m {
        for (i, &hi) in h.iter().enumerate() {
            k[(bm * l + i, bm)] = hi;
        }
    }
    k
}

fn transpose<T: Scalar>(a: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)])
}

/// Validates the Kronecker consistency `f^T vec(X) = h^H X g` at the
/// dataset level; used by tests, exposed for harness assertions.
pub fn dataset_from_system<T: Scalar>(xs: Vec<InputMatrix<T>>, ys: CVector<T>) -> BlockDataset<T> {
    BlockDataset::new(xs, ys).expect("consistent dataset")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm_sq, rel_err_vec};
    use crate::model::linearize;
    use crate::optimum::BlockDataset;
    use crate::signals::Rng;
    use num_complex::Complex64 as C;

    fn random_dataset(rng: &mut Rng, l: usize, m: usize, n: usize) -> BlockDataset<f64> {
        let xs: Vec<_> = (0..n)
            .map(|_| InputMatrix::from_fn(l, m, |_, _| rng.proper_gaussian(1.0)))
            .collect();
        let ys = rng.proper_gaussian_vec(1.0, n);
        BlockDataset::new(xs, ys).unwrap()
    }

    #[test]
    fn single_sample_estimates() {
        let x = InputMatrix::from_rows(&[&[C::new(1.0, 0.0)]]);
        let data = BlockDataset::new(vec![x], vec![C::new(2.0, 0.0)]).unwrap();
        let s = estimate_stats(&data);
        assert_eq!(s.r_xx[(0, 0)], C::new(1.0, 0.0));
        assert_eq!(s.r_xy[(0, 0)], C::new(2.0, 0.0));
    }

    #[test]
    fn estimate_is_hermitian_exactly() {
        let mut rng = Rng::new(4);
        let data = random_dataset(&mut rng, 3, 2, 50);
        let s = estimate_stats(&data);
        let dim = 6;
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(s.r_xx[(i, j)], s.r_xx[(j, i)].conj());
            }
        }
    }

    #[test]
    fn white_estimate_approaches_identity() {
        let mut rng = Rng::new(7);
        let data = random_dataset(&mut rng, 4, 2, 100_000);
        let s = estimate_stats(&data);
        for i in 0..8 {
            for j in 0..8 {
                let target = if i == j {
                    C::new(1.0, 0.0)
                } else {
                    C::new(0.0, 0.0)
                };
                assert!(
                    (s.r_xx[(i, j)] - target).norm() < 0.05,
                    "entry ({i},{j}) = {}",
                    s.r_xx[(i, j)]
                );
            }
        }
    }

    #[test]
    fn rg_identity_covariance() {
        let mut rng = Rng::new(8);
        let g = rng.proper_gaussian_vec(1.0, 3);
        let stats = SecondOrderStats {
            r_xx: CMatrix::identity(12),
            r_xy: CMatrix::zeros(4, 3),
        };
        let rg = build_rg(&stats, &g);
        let gn = norm_sq(&g);
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j {
                    C::new(gn, 0.0)
                } else {
                    C::new(0.0, 0.0)
                };
                assert!((rg[(i, j)] - target).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rg_block_diagonal_covariance_scales_rxx() {
        let mut rng = Rng::new(9);
        let l = 3;
        let m = 2;
        // random Hermitian PD R_xx
        let a = CMatrix::from_fn(l, l, |_, _| rng.proper_gaussian(1.0));
        let mut rxx = a.mul_mat(&a.adjoint());
        for i in 0..l {
            rxx[(i, i)] += C::new(0.5, 0.0);
        }
        let mut r = CMatrix::zeros(l * m, l * m);
        for b in 0..m {
            for j in 0..l {
                for i in 0..l {
                    r[(b * l + i, b * l + j)] = rxx[(i, j)];
                }
            }
        }
        let g = rng.proper_gaussian_vec(1.0, m);
        let stats = SecondOrderStats {
            r_xx: r,
            r_xy: CMatrix::zeros(l, m),
        };
        let rg = build_rg(&stats, &g);
        let gn = norm_sq(&g);
        for i in 0..l {
            for j in 0..l {
                let want = rxx[(i, j)] * gn;
                assert!((rg[(i, j)] - want).norm() < 1e-12 * gn.max(1.0));
            }
        }
    }

    #[test]
    fn rg_rh_match_monte_carlo_expectation() {
        let mut rng = Rng::new(10);
        let l = 3;
        let m = 2;
        let g = rng.proper_gaussian_vec(1.0, m);
        let h = rng.proper_gaussian_vec(1.0, l);
        let n = 100_000;
        let mut rg_mc = CMatrix::zeros(l, l);
        let mut rh_mc = CMatrix::zeros(m, m);
        for _ in 0..n {
            let x = InputMatrix::from_fn(l, m, |_, _| rng.proper_gaussian(1.0));
            let xg = x.mul_vec(&g);
            rg_mc.add_scaled_outer(1.0, &xg, &xg);
            let xh = x.adjoint_mul_vec(&h);
            rh_mc.add_scaled_outer(1.0, &xh, &xh);
        }
        rg_mc.scale(1.0 / n as f64);
        rh_mc.scale(1.0 / n as f64);
        let stats = SecondOrderStats {
            r_xx: CMatrix::identity(l * m),
            r_xy: CMatrix::zeros(l, m),
        };
        let rg = build_rg(&stats, &g);
        let rh = build_rh(&stats, &h);
        for i in 0..l {
            for j in 0..l {
                assert!((rg[(i, j)] - rg_mc[(i, j)]).norm() < 0.05);
            }
        }
        for i in 0..m {
            for j in 0..m {
                assert!((rh[(i, j)] - rh_mc[(i, j)]).norm() < 0.05);
            }
        }
    }

    #[test]
    fn blocked_and_materialized_paths_agree() {
        let mut rng = Rng::new(11);
        let l = 4;
        let m = 3;
        let data = random_dataset(&mut rng, l, m, 200);
        let stats = estimate_stats(&data);
        let g = rng.proper_gaussian_vec(1.0, m);
        let h = rng.proper_gaussian_vec(1.0, l);
        let rg_lit = build_rg(&stats, &g);
        let rg_blk = build_rg_blocked(&stats, &g);
        assert!(rg_lit.sub(&rg_blk).frobenius_norm() < 1e-12 * rg_lit.frobenius_norm());
        let rh_lit = build_rh(&stats, &h);
        let rh_blk = build_rh_blocked(&stats, &h);
        assert!(rh_lit.sub(&rh_blk).frobenius_norm() < 1e-12 * rh_lit.frobenius_norm());
    }

    #[test]
    fn rg_rh_stay_psd() {
        let mut rng = Rng::new(12);
        for _ in 0..10 {
            let l = 3;
            let m = 2;
            let data = random_dataset(&mut rng, l, m, 40);
            let stats = estimate_stats(&data);
            let g = rng.proper_gaussian_vec(1.0, m);
            let h = rng.proper_gaussian_vec(1.0, l);
            // PSD up to rounding: shifted Cholesky must succeed
            let mut rg = build_rg(&stats, &g).hermitian_part();
            for i in 0..l {
                rg[(i, i)] += C::new(1e-10, 0.0);
            }
            assert!(rg.cholesky().is_some());
            let mut rh = build_rh(&stats, &h).hermitian_part();
            for i in 0..m {
                rh[(i, i)] += C::new(1e-10, 0.0);
            }
            assert!(rh.cholesky().is_some());
        }
    }

    #[test]
    fn exact_stats_consistent_with_linear_form() {
        let mut rng = Rng::new(13);
        let h = rng.proper_gaussian_vec(1.0, 3);
        let g = rng.proper_gaussian_vec(1.0, 2);
        let f = linearize(&h, &g).unwrap();
        let stats = SecondOrderStats::from_covariance_and_truth(CMatrix::identity(6), &f.f, 2);
        // R = I: r_xy = mat(f*), so vec(r_xy) = conj(f)
        let r = stats.r_xy_vec();
        let expect: Vec<C> = f.f.iter().map(|z| z.conj()).collect();
        assert!(rel_err_vec(&r, &expect) < 1e-14);
    }
}
