//! Real-multiplication counts for one error-plus-update step of the
//! bilinear LMS family.
//!
//! Only multiplications are counted (additions are free), and a complex
//! product is charged three real multiplications. Each family has two
//! counts depending on which side of the bilinear form is evaluated
//! first when computing the error: `v1` starts from `h^T X` (cheaper for
//! `L > M`), `v2` from `X g`.
//!
//! [`instrumented_count`] cross-checks the closed forms by actually
//! executing one step on dummy data through counting arithmetic.

use num_complex::Complex64;

/// Filter family and error-evaluation ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    TwoRealV1,
    TwoRealV2,
    FourRealV1,
    FourRealV2,
    FullyCvV1,
    FullyCvV2,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::TwoRealV1,
        Variant::TwoRealV2,
        Variant::FourRealV1,
        Variant::FourRealV2,
        Variant::FullyCvV1,
        Variant::FullyCvV2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TwoRealV1 => "two_r_v1",
            Variant::TwoRealV2 => "two_r_v2",
            Variant::FourRealV1 => "four_r_v1",
            Variant::FourRealV2 => "four_r_v2",
            Variant::FullyCvV1 => "fully_cv_v1",
            Variant::FullyCvV2 => "fully_cv_v2",
        }
    }
}

/// A closed-form multiplication count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultCount {
    pub variant: Variant,
    pub count: u64,
    pub big_o: &'static str,
}

/// Per-step real multiplications of the given variant.
pub fn mult_count(variant: Variant, l: usize, m: usize) -> MultCount {
    assert!(l >= 1 && m >= 1, "dimensions must be at least 1");
    let (l, m) = (l as u64, m as u64);
    let count = match variant {
        Variant::TwoRealV1 => 6 * l * m + 2 * l + 4 * m + 4,
        Variant::TwoRealV2 => 6 * l * m + 4 * l + 2 * m + 4,
        Variant::FourRealV1 => 2 * (6 * l * m + 2 * l + 4 * m + 4),
        Variant::FourRealV2 => 2 * (6 * l * m + 4 * l + 2 * m + 4),
        Variant::FullyCvV1 => 9 * l * m + 3 * l + 6 * m + 4,
        Variant::FullyCvV2 => 9 * l * m + 6 * l + 3 * m + 4,
    };
    MultCount {
        variant,
        count,
        big_o: "O(LM)",
    }
}

/// Counting arithmetic: every real scalar multiplication bumps the tally.
struct Tally(u64);

impl Tally {
    fn rmul(&mut self, a: f64, b: f64) -> f64 {
        self.0 += 1;
        a * b
    }

    /// Complex product via the three-real-multiplication scheme.
    fn cmul(&mut self, a: Complex64, b: Complex64) -> Complex64 {
        self.0 += 3;
        let k1 = b.re * (a.re + a.im);
        let k2 = a.re * (b.im - b.re);
        let k3 = a.im * (b.re + b.im);
        Complex64::new(k1 - k3, k1 + k2)
    }

    /// Real-by-complex product: two real multiplications.
    fn rcmul(&mut self, r: f64, z: Complex64) -> Complex64 {
        self.0 += 2;
        Complex64::new(r * z.re, r * z.im)
    }
}

/// Executes one error-plus-update step of the variant on arbitrary data
/// and returns how many real multiplications it performed.
pub fn instrumented_count(variant: Variant, l: usize, m: usize) -> u64 {
    assert!(l >= 1 && m >= 1, "dimensions must be at least 1");
    let mut t = Tally(0);
    // representative data; the values are irrelevant to the tally
    let x: Vec<Vec<Complex64>> = (0..l)
        .map(|i| {
            (0..m)
                .map(|j| Complex64::new(0.3 + i as f64, 0.7 - j as f64))
                .collect()
        })
        .collect();
    let y = Complex64::new(1.1, -0.4);
    match variant {
        Variant::FullyCvV1 | Variant::FullyCvV2 => {
            let h: Vec<Complex64> = (0..l)
                .map(|i| Complex64::new(1.0, i as f64 * 0.1))
                .collect();
            let g: Vec<Complex64> = (0..m)
                .map(|j| Complex64::new(0.5, -(j as f64) * 0.2))
                .collect();
            fully_cv_step(&mut t, &x, &h, &g, y, variant == Variant::FullyCvV1);
        }
        Variant::TwoRealV1 | Variant::TwoRealV2 => {
            split_step(&mut t, &x, l, m, 2, variant == Variant::TwoRealV1);
        }
        Variant::FourRealV1 | Variant::FourRealV2 => {
            split_step(&mut t, &x, l, m, 4, variant == Variant::FourRealV1);
        }
    }
    t.0
}

fn fully_cv_step(
    t: &mut Tally,
    x: &[Vec<Complex64>],
    h: &[Complex64],
    g: &[Complex64],
    y: Complex64,
    h_side_first: bool,
) {
    let l = h.len();
    let m = g.len();
    let mu_h = 0.01;
    let mu_g = 0.02;
    // error
    let y_hat = if h_side_first {
        // u = h^H X (L·M complex products), then u g (M products)
        let mut u = vec![Complex64::new(0.0, 0.0); m];
        for (j, uj) in u.iter_mut().enumerate() {
            for i in 0..l {
                *uj += t.cmul(h[i].conj(), x[i][j]);
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            acc += t.cmul(u[j], g[j]);
        }
        acc
    } else {
        // v = X g (L·M products), then h^H v (L products)
        let mut v = vec![Complex64::new(0.0, 0.0); l];
        for (i, vi) in v.iter_mut().enumerate() {
            for j in 0..m {
                *vi += t.cmul(x[i][j], g[j]);
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..l {
            acc += t.cmul(h[i].conj(), v[i]);
        }
        acc
    };
    let e = y - y_hat;
    // h update: h += (mu_h e*) (X g)
    let mut xg = vec![Complex64::new(0.0, 0.0); l];
    for (i, v) in xg.iter_mut().enumerate() {
        for j in 0..m {
            *v += t.cmul(x[i][j], g[j]);
        }
    }
    let se = t.rcmul(mu_h, e.conj());
    let mut h_new = h.to_vec();
    for i in 0..l {
        h_new[i] += t.cmul(se, xg[i]);
    }
    // g update: g += (mu_g e) (X^H h)
    let mut xh = vec![Complex64::new(0.0, 0.0); m];
    for (j, v) in xh.iter_mut().enumerate() {
        for i in 0..l {
            *v += t.cmul(x[i][j].conj(), h[i]);
        }
    }
    let se = t.rcmul(mu_g, e);
    let mut g_new = g.to_vec();
    for j in 0..m {
        g_new[j] += t.cmul(se, xh[j]);
    }
    std::hint::black_box((h_new, g_new));
}

/// One step of the split-real structure with `paths` ∈ {2, 4} real
/// bilinear filters. Every path costs the same, so the 4R tally is twice
/// the 2R one by construction.
fn split_step(
    t: &mut Tally,
    x: &[Vec<Complex64>],
    l: usize,
    m: usize,
    paths: usize,
    h_side_first: bool,
) {
    let part = |i: usize, j: usize, use_im: bool| -> f64 {
        if use_im {
            x[i][j].im
        } else {
            x[i][j].re
        }
    };
    // path table: (uses Im[X], weight placeholder vectors)
    let path_im: &[bool] = if paths == 2 {
        &[false, true]
    } else {
        &[false, true, false, true]
    };
    let y_parts: Vec<f64> = if paths == 2 {
        vec![y_part(0), y_part(1)]
    } else {
        vec![y_part(0), y_part(0), y_part(1), y_part(1)]
    };

    let mut tally_one_path = |use_im: bool, y_target: f64| {
        let hv: Vec<f64> = (0..l).map(|i| 0.5 + i as f64 * 0.1).collect();
        let gv: Vec<f64> = (0..m).map(|j| 0.25 - j as f64 * 0.05).collect();
        let mu = 0.01;
        // error contribution of this path
        let y_hat = if h_side_first {
            // u = h^T X_part (LM real mults), then u·g (M)
            let mut u = vec![0.0; m];
            for (j, uj) in u.iter_mut().enumerate() {
                for i in 0..l {
                    *uj += t.rmul(hv[i], part(i, j, use_im));
                }
            }
            let mut acc = 0.0;
            for j in 0..m {
                acc += t.rmul(u[j], gv[j]);
            }
            acc
        } else {
            // v = X_part g (LM), then h·v (L)
            let mut v = vec![0.0; l];
            for (i, vi) in v.iter_mut().enumerate() {
                for j in 0..m {
                    *vi += t.rmul(part(i, j, use_im), gv[j]);
                }
            }
            let mut acc = 0.0;
            for i in 0..l {
                acc += t.rmul(hv[i], v[i]);
            }
            acc
        };
        let e = y_target - y_hat;
        // h update: LM (regressor) + 1 (mu·e) + L (scale)
        let mut reg = vec![0.0; l];
        for (i, ri) in reg.iter_mut().enumerate() {
            for j in 0..m {
                *ri += t.rmul(part(i, j, use_im), gv[j]);
            }
        }
        let c = t.rmul(mu, e);
        let mut h_new = hv.clone();
        for i in 0..l {
            h_new[i] += t.rmul(c, reg[i]);
        }
        // g update: LM + 1 + M
        let mut reg_g = vec![0.0; m];
        for (j, rj) in reg_g.iter_mut().enumerate() {
            for i in 0..l {
                *rj += t.rmul(part(i, j, use_im), hv[i]);
            }
        }
        let c = t.rmul(mu, e);
        let mut g_new = gv.clone();
        for j in 0..m {
            g_new[j] += t.rmul(c, reg_g[j]);
        }
        std::hint::black_box((h_new, g_new));
    };

    for (k, &use_im) in path_im.iter().enumerate() {
        tally_one_path(use_im, y_parts[k]);
    }
}

fn y_part(which: usize) -> f64 {
    if which == 0 {
        1.1
    } else {
        -0.4
    }
}
