//! Verification suite: every claim the simulations are expected to
//! reproduce, executed with pinned thresholds and pass/fail reporting.
//!
//! Each criterion is seeded from a base seed so `--seed` can probe
//! robustness; the default seed is 1. Thresholds are properties
//! (orderings, floors, zeroings), not figure lookups, since exact dB
//! values depend on the random draw.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use bifilt::adaptive::{lms_step_bounds, LmsState, NlmsState, RlsState};
use bifilt::complexity::{instrumented_count, mult_count, Variant};
use bifilt::linalg::{inner, norm_sq, rel_err_vec, Lu};
use bifilt::mixed::{complexify, crbnlms_g_quotient, CrblmsState, CrbnlmsState, CrbrlsState};
use bifilt::model::{
    evaluate_bilinear, fd_wirtinger_gradient, linearize, normalized_misalignment, power_db,
    InputMatrix,
};
use bifilt::optimum::{cbls_iterate, cbwf_iterate, mse_excess, AlternatingEstimate, BlockDataset};
use bifilt::signals::{build_miso_matrix, Rng, SignalModel};
use bifilt::stats::{build_rg, build_rh, estimate_stats, SecondOrderStats};

use crate::runner::{curve_db, first_crossing_db, run_scenario};
use crate::scenario::builtin;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub threshold: String,
    pub seconds: f64,
}

type CriterionFn = fn(u64) -> (bool, String, String);

pub const CRITERIA: [(usize, &str, CriterionFn); 12] = [
    (1, "cbwf-one-step", c01_wiener_one_step),
    (2, "cbls-ordering", c02_ls_ordering),
    (3, "cbls-equals-cbwf", c03_ls_equals_wiener),
    (4, "cblms-stability", c04_lms_stability),
    (5, "cbnlms-posterior", c05_nlms_posterior),
    (6, "cbrls-woodbury", c06_rls_woodbury),
    (7, "miso-roster-ordering", c07_roster_ordering),
    (8, "hammerstein-iq-floors", c08_hammerstein_floors),
    (9, "bilinear-vs-linear", c09_bilinear_vs_linear),
    (10, "complexity-table", c10_complexity_table),
    (11, "gradient-oracle", c11_gradient_oracle),
    (12, "mixed-realness", c12_mixed_realness),
];

/// Runs all criteria (optionally filtered by id or name substring).
pub fn run_criteria(seed: u64, filter: Option<&str>) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .filter(|(id, name, _)| match filter {
            None => true,
            Some(f) => id.to_string() == f || name.contains(f),
        })
        .map(|&(id, name, f)| {
            let start = Instant::now();
            let (pass, measured, threshold) = f(seed);
            CriterionReport {
                id,
                name,
                pass,
                measured,
                threshold,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn format_report(reports: &[CriterionReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "[{}] {:2}. {:<24} measured: {:<42} threshold: {:<34} ({:.2}s)\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.measured,
            r.threshold,
            r.seconds,
        ));
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    out.push_str(&format!(
        "{} criteria, {} passed, {} failed\n",
        reports.len(),
        reports.len() - failed,
        failed
    ));
    out
}

fn gaussian_matrix(rng: &mut Rng, l: usize, m: usize, sigma: f64) -> InputMatrix<f64> {
    InputMatrix::from_fn(l, m, |_, _| rng.proper_gaussian(sigma))
}

/// Criterion 1: One Wiener alternation with exact block-diagonal statistics lands
/// at the numerical floor for both white and MA(1) inputs.
fn c01_wiener_one_step(seed: u64) -> (bool, String, String) {
    let l = 64;
    let m = 5;
    let models = [
        SignalModel::WhiteProperGaussian { sigma: 1.0 },
        SignalModel::MovingAverage1 {
            sigma: 0.5f64.sqrt(),
        },
    ];
    let mut worst: f64 = f64::NEG_INFINITY;
    for (i, model) in models.iter().enumerate() {
        let mut rng = Rng::with_stream(seed, 100 + i as u64);
        let h = rng.proper_gaussian_vec(10.0, l);
        let g = rng.proper_gaussian_vec(10.0, m);
        let f = linearize(&h, &g).unwrap();
        let stats =
            SecondOrderStats::from_covariance_and_truth(model.stacked_covariance(l, m), &f.f, m);
        let g0 = rng.proper_gaussian_vec(10.0, m);
        let est = AlternatingEstimate::new(vec![C64::new(0.0, 0.0); l], g0).unwrap();
        let next = cbwf_iterate(&stats, &est).unwrap();
        let f_hat = linearize(&next.h_hat, &next.g_hat).unwrap();
        let nm = normalized_misalignment(&f, &f_hat).unwrap();
        worst = worst.max(nm.nm_db);
    }
    (
        worst <= -200.0,
        format!("worst NM after one alternation = {worst:.1} dB"),
        "<= -200 dB (white and MA1)".into(),
    )
}

/// Criterion 2: Noiseless least squares after 40 alternations: mean misalignment
/// over 10 seeds improves with the dataset size and is below -80 dB.
fn c02_ls_ordering(seed: u64) -> (bool, String, String) {
    let l = 64;
    let m = 5;
    let factors = [1usize, 2, 8];
    let seeds: Vec<u64> = (0..10).collect();
    let per_seed: Vec<[f64; 3]> = seeds
        .par_iter()
        .map(|&s| {
            let mut sys = Rng::with_stream(seed, 200 + s * 4);
            let h = sys.proper_gaussian_vec(10.0, l);
            let g = sys.proper_gaussian_vec(10.0, m);
            let mut sig = Rng::with_stream(seed, 201 + s * 4);
            let n_max = 8 * l * m;
            let channels: Vec<Vec<C64>> = (0..m)
                .map(|_| sig.proper_gaussian_vec(1.0, n_max))
                .collect();
            let mut init = Rng::with_stream(seed, 202 + s * 4);
            let h0 = init.proper_gaussian_vec(10.0, l);
            let g0 = init.proper_gaussian_vec(10.0, m);
            let f = linearize(&h, &g).unwrap();
            let mut out = [0.0f64; 3];
            for (fi, &factor) in factors.iter().enumerate() {
                let n = factor * l * m;
                let xs: Vec<InputMatrix<f64>> =
                    (0..n).map(|k| build_miso_matrix(&channels, l, k)).collect();
                let ys: Vec<C64> = xs
                    .iter()
                    .map(|x| evaluate_bilinear(&h, &g, x, C64::new(0.0, 0.0)).unwrap())
                    .collect();
                let data = BlockDataset::new(xs, ys).unwrap();
                let mut est = AlternatingEstimate::new(h0.clone(), g0.clone()).unwrap();
                let mut prev = f64::INFINITY;
                for _ in 0..40 {
                    est = cbls_iterate(&data, &est).unwrap();
                    let f_hat = linearize(&est.h_hat, &est.g_hat).unwrap();
                    let nm = normalized_misalignment(&f, &f_hat).unwrap().nm;
                    if (nm - prev).abs() < 1e-14 {
                        prev = nm;
                        break;
                    }
                    prev = nm;
                }
                out[fi] = prev;
            }
            out
        })
        .collect();
    let mean = |idx: usize| -> f64 {
        power_db(per_seed.iter().map(|v| v[idx]).sum::<f64>() / per_seed.len() as f64)
    };
    let (nm1, nm2, nm8) = (mean(0), mean(1), mean(2));
    let pass = nm8 <= nm2 && nm2 <= nm1 && nm1 <= -80.0 && nm2 <= -80.0 && nm8 <= -80.0;
    (
        pass,
        format!("mean NM: N=1ML {nm1:.1} dB, N=2ML {nm2:.1} dB, N=8ML {nm8:.1} dB"),
        "NM(8ML) <= NM(2ML) <= NM(1ML), each <= -80 dB".into(),
    )
}

/// Criterion 3: Least squares and the Wiener filter on the sample statistics
/// produce the same iterate sequence to 1e-10 relative.
fn c03_ls_equals_wiener(seed: u64) -> (bool, String, String) {
    let l = 8;
    let m = 3;
    let n = 4 * l * m;
    let mut rng = Rng::with_stream(seed, 300);
    let xs: Vec<InputMatrix<f64>> = (0..n)
        .map(|_| gaussian_matrix(&mut rng, l, m, 1.0))
        .collect();
    let ys = rng.proper_gaussian_vec(1.0, n);
    let data = BlockDataset::new(xs, ys).unwrap();
    let stats = estimate_stats(&data);
    let mut ls = AlternatingEstimate::new(
        rng.proper_gaussian_vec(1.0, l),
        rng.proper_gaussian_vec(1.0, m),
    )
    .unwrap();
    let mut wf = ls.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        ls = cbls_iterate(&data, &ls).unwrap();
        wf = cbwf_iterate(&stats, &wf).unwrap();
        worst = worst.max(rel_err_vec(&ls.h_hat, &wf.h_hat));
        worst = worst.max(rel_err_vec(&ls.g_hat, &wf.g_hat));
    }
    (
        worst <= 1e-10,
        format!("max relative iterate deviation = {worst:.2e}"),
        "<= 1e-10 over 20 alternations".into(),
    )
}

/// Criterion 4: Step sizes at 10% of the mean-square bounds keep windowed
/// misalignment non-increasing; 4x the h bound diverges.
fn c04_lms_stability(seed: u64) -> (bool, String, String) {
    let l = 64;
    let m = 5;
    let sigma_x = 0.01;
    let runs = 50usize;
    let window = 500usize;
    let horizon = 10_000usize;
    let burn_in_windows = 2usize;

    let stable_ok: usize = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = Rng::with_stream(seed, 400 + run as u64);
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = rng.proper_gaussian_vec(1.0, m);
            let f = linearize(&h, &g).unwrap();
            let bounds = lms_step_bounds(
                l,
                m,
                sigma_x,
                norm_sq(&g),
                norm_sq(&h),
                0.0,
                0.0,
                1.0,
                norm_sq(&g),
                norm_sq(&h),
            );
            let mut st = LmsState::new(
                rng.proper_gaussian_vec(1.0, l),
                rng.proper_gaussian_vec(1.0, m),
                0.1 * bounds.mu_h_max,
                0.1 * bounds.mu_g_max,
            )
            .unwrap();
            let mut windows = Vec::new();
            let mut acc = 0.0;
            for k in 0..horizon {
                let x = gaussian_matrix(&mut rng, l, m, sigma_x);
                let y = evaluate_bilinear(&h, &g, &x, C64::new(0.0, 0.0)).unwrap();
                if st.step(&x, y).is_err() {
                    return 0; // divergence in the stable regime is a failure
                }
                let f_hat = linearize(&st.h_hat, &st.g_hat).unwrap();
                acc += normalized_misalignment(&f, &f_hat).unwrap().nm;
                if (k + 1) % window == 0 {
                    windows.push(acc / window as f64);
                    acc = 0.0;
                }
            }
            let tail = &windows[burn_in_windows..];
            let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
            usize::from(monotone)
        })
        .sum();

    let diverged: usize = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = Rng::with_stream(seed, 450 + run as u64);
            let h = rng.proper_gaussian_vec(1.0, l);
            let g = rng.proper_gaussian_vec(1.0, m);
            let bounds = lms_step_bounds(
                l,
                m,
                sigma_x,
                norm_sq(&g),
                norm_sq(&h),
                0.0,
                0.0,
                1.0,
                norm_sq(&g),
                norm_sq(&h),
            );
            let mut st = LmsState::new(
                rng.proper_gaussian_vec(1.0, l),
                rng.proper_gaussian_vec(1.0, m),
                4.0 * bounds.mu_h_max,
                0.1 * bounds.mu_g_max,
            )
            .unwrap();
            for _ in 0..100_000 {
                let x = gaussian_matrix(&mut rng, l, m, sigma_x);
                let y = evaluate_bilinear(&h, &g, &x, C64::new(0.0, 0.0)).unwrap();
                if st.step(&x, y).is_err() {
                    return 1;
                }
            }
            0
        })
        .sum();

    let pass = stable_ok >= 48 && diverged >= 45;
    (
        pass,
        format!(
            "{stable_ok}/50 runs monotone at 10% bounds; {diverged}/50 diverged at 4x mu_h bound"
        ),
        ">= 48/50 monotone, >= 45/50 diverged".into(),
    )
}

/// Criterion 5: Unit normalized step with zero regularization zeroes the matching
/// a posteriori error on every step.
fn c05_nlms_posterior(seed: u64) -> (bool, String, String) {
    let l = 8;
    let m = 4;
    let steps = 10_000;
    let mut rng = Rng::with_stream(seed, 500);
    let mut worst: f64 = 0.0;

    let mut h_side = NlmsState::new(
        rng.proper_gaussian_vec(1.0, l),
        rng.proper_gaussian_vec(1.0, m),
        1.0,
        0.0,
        0.0,
        0.0,
    )
    .unwrap();
    for _ in 0..steps {
        let x = gaussian_matrix(&mut rng, l, m, 1.0);
        let y = rng.proper_gaussian(1.0);
        let g_prev = h_side.g_hat.clone();
        let e = h_side.step(&x, y).unwrap();
        let post = h_side.a_posteriori_h(&x, y, &g_prev);
        if e.norm() > 0.0 {
            worst = worst.max(post.norm() / e.norm());
        }
    }

    let mut g_side = NlmsState::new(
        rng.proper_gaussian_vec(1.0, l),
        rng.proper_gaussian_vec(1.0, m),
        0.0,
        1.0,
        0.0,
        0.0,
    )
    .unwrap();
    for _ in 0..steps {
        let x = gaussian_matrix(&mut rng, l, m, 1.0);
        let y = rng.proper_gaussian(1.0);
        let h_prev = g_side.h_hat.clone();
        let e = g_side.step(&x, y).unwrap();
        let post = g_side.a_posteriori_g(&x, y, &h_prev);
        if e.norm() > 0.0 {
            worst = worst.max(post.norm() / e.norm());
        }
    }

    (
        worst <= 1e-10,
        format!("max |posterior| / |prior| = {worst:.2e} over 2x{steps} steps"),
        "<= 1e-10".into(),
    )
}

/// Criterion 6: The rank-one inverse recursion matches a direct inverse oracle at
/// every step.
fn c06_rls_woodbury(seed: u64) -> (bool, String, String) {
    let l = 6;
    let m = 3;
    let lambda = 0.95;
    let mut rng = Rng::with_stream(seed, 600);
    let h = rng.proper_gaussian_vec(1.0, l);
    let g = rng.proper_gaussian_vec(1.0, m);
    let mut st = RlsState::new(
        rng.proper_gaussian_vec(1.0, l),
        rng.proper_gaussian_vec(1.0, m),
        10.0,
        10.0,
        lambda,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = gaussian_matrix(&mut rng, l, m, 1.0);
        let y = evaluate_bilinear(&h, &g, &x, rng.proper_gaussian(0.01)).unwrap();
        let g_prev = st.g_hat.clone();
        let p_prev = st.p_g().clone();
        st.step(&x, y).unwrap();
        let xg = x.mul_vec(&g_prev);
        let mut direct = Lu::factor(&p_prev).unwrap().inverse();
        direct.scale(lambda);
        direct.add_scaled_outer(1.0, &xg, &xg);
        let oracle = Lu::factor(&direct).unwrap().inverse();
        let err = st.p_g().sub(&oracle).frobenius_norm() / oracle.frobenius_norm();
        worst = worst.max(err);
    }
    (
        worst <= 1e-8,
        format!("max relative P_g deviation = {worst:.2e} over 1000 steps"),
        "<= 1e-8".into(),
    )
}

/// Criterion 7: Streaming roster on the MISO system: RLS converges to -20 dB
/// before NLMS, both before and after the abrupt change; the split-real
/// structures never reach -10 dB.
fn c07_roster_ordering(seed: u64) -> (bool, String, String) {
    let mut cfg = builtin("miso-roster").expect("builtin exists");
    cfg.seed = seed;
    let cp = cfg.change_point.unwrap_or(cfg.horizon);
    let out = run_scenario(&cfg).expect("scenario runs");

    let rls = curve_db(&out.nm_curve("cbrls"));
    let nlms = curve_db(&out.nm_curve("cbnlms"));
    let rls_before = first_crossing_db(&rls, -20.0, 0, cp);
    let nlms_before = first_crossing_db(&nlms, -20.0, 0, cp);
    let rls_after = first_crossing_db(&rls, -20.0, cp, cfg.horizon);
    let nlms_after = first_crossing_db(&nlms, -20.0, cp, cfg.horizon);

    let ordering = matches!(
        (rls_before, nlms_before, rls_after, nlms_after),
        (Some(rb), Some(nb), Some(ra), Some(na)) if rb < nb && ra < na
    );
    let min_2r = curve_db(&out.nm_curve("nlms_2r"))
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let min_4r = curve_db(&out.nm_curve("nlms_4r"))
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let split_high = min_2r > -10.0 && min_4r > -10.0;

    (
        ordering && split_high,
        format!(
            "-20 dB hits: rls {:?}/{:?}, nlms {:?}/{:?} (before/after); split minima {:.1}/{:.1} dB",
            rls_before, rls_after, nlms_before, nlms_after, min_2r, min_4r
        ),
        "rls < nlms both segments; 2R/4R stay above -10 dB".into(),
    )
}

/// Criterion 8: IQ-imbalance identification: fully complex filters reach the noise
/// floor region; split-real structures stay at least 30 dB above it.
fn c08_hammerstein_floors(seed: u64) -> (bool, String, String) {
    let mut cfg = builtin("hammerstein-iq").expect("builtin exists");
    cfg.seed = seed;
    let out = run_scenario(&cfg).expect("scenario runs");
    let floor_db = power_db(cfg.noise_std * cfg.noise_std); // -80 dB
    let ss = |name: &str| {
        out.summary(name)
            .map(|s| s.steady_ise_db)
            .unwrap_or(f64::NAN)
    };
    let (cbnlms, cbrls, r2, r4) = (ss("cbnlms"), ss("cbrls"), ss("nlms_2r"), ss("nlms_4r"));
    let pass = cbnlms <= floor_db + 10.0
        && cbrls <= floor_db + 10.0
        && r2 >= floor_db + 30.0
        && r4 >= floor_db + 30.0;
    (
        pass,
        format!(
            "steady ISE: cbnlms {cbnlms:.1}, cbrls {cbrls:.1}, 2R {r2:.1}, 4R {r4:.1} dB (floor {floor_db:.0})"
        ),
        "CV within 10 dB of floor; 2R/4R at least 30 dB above".into(),
    )
}

/// Criterion 9: Estimating L+M coefficients beats estimating L*M: the bilinear
/// NLMS reaches -20 dB in fewer steps than the linear NLMS (median
/// hitting time over the runs).
fn c09_bilinear_vs_linear(seed: u64) -> (bool, String, String) {
    let mut cfg = builtin("bilinear-vs-linear").expect("builtin exists");
    cfg.seed = seed;
    let out = run_scenario(&cfg).expect("scenario runs");
    let hit_median = |filter: &str| -> f64 {
        let mut hits = Vec::new();
        for run in 0..cfg.runs {
            let mut curve: Vec<f64> = Vec::new();
            for r in out
                .rows
                .iter()
                .filter(|r| r.filter == filter && r.run == run)
            {
                if r.index >= curve.len() {
                    curve.resize(r.index + 1, f64::INFINITY);
                }
                curve[r.index] = r.nm_db;
            }
            let hit = first_crossing_db(&curve, -20.0, 0, curve.len())
                .map(|v| v as f64)
                .unwrap_or(cfg.horizon as f64 + 1.0);
            hits.push(hit);
        }
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hits[hits.len() / 2]
    };
    let bl = hit_median("cbnlms");
    let lin = hit_median("linear_nlms");
    (
        bl < lin,
        format!("median steps to -20 dB: bilinear {bl}, linear {lin}"),
        "bilinear strictly fewer".into(),
    )
}

/// Criterion 10: Closed-form multiplication counts equal the instrumented shadow
/// execution for every variant on the 1..8 grid.
fn c10_complexity_table(_seed: u64) -> (bool, String, String) {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for l in 1..=8 {
        for m in 1..=8 {
            for v in Variant::ALL {
                checked += 1;
                if instrumented_count(v, l, m) != mult_count(v, l, m).count {
                    mismatches += 1;
                }
            }
        }
    }
    (
        mismatches == 0,
        format!("{checked} grid points checked, {mismatches} mismatches"),
        "exact equality everywhere".into(),
    )
}

/// Criterion 11: Every analytic conjugate-Wirtinger gradient matches the
/// finite-difference oracle to 1e-6 relative on 100 random instances.
fn c11_gradient_oracle(seed: u64) -> (bool, String, String) {
    let mut rng = Rng::with_stream(seed, 1100);
    let mut worst: f64 = 0.0;
    let instances = 100;

    // Wiener gradients from sample statistics
    for _ in 0..instances {
        let l = 4;
        let m = 3;
        let n = 60;
        let xs: Vec<InputMatrix<f64>> = (0..n)
            .map(|_| gaussian_matrix(&mut rng, l, m, 1.0))
            .collect();
        let ys = rng.proper_gaussian_vec(1.0, n);
        let data = BlockDataset::new(xs, ys).unwrap();
        let stats = estimate_stats(&data);
        let h = rng.proper_gaussian_vec(1.0, l);
        let g = rng.proper_gaussian_vec(1.0, m);

        let rg = build_rg(&stats, &g);
        let mut grad_h = rg.mul_vec(&h);
        let rhs = stats.r_xy.mul_vec(&g);
        for (gi, r) in grad_h.iter_mut().zip(&rhs) {
            *gi -= r;
        }
        let fd_h = fd_wirtinger_gradient(|hv| mse_excess(&stats, hv, &g), &h, 1e-5);
        worst = worst.max(rel_err_vec(&fd_h, &grad_h));

        let rh = build_rh(&stats, &h);
        let mut grad_g = rh.mul_vec(&g);
        let rhs = stats.r_xy.adjoint_mul_vec(&h);
        for (gi, r) in grad_g.iter_mut().zip(&rhs) {
            *gi -= r;
        }
        let fd_g = fd_wirtinger_gradient(|gv| mse_excess(&stats, &h, gv), &g, 1e-5);
        worst = worst.max(rel_err_vec(&fd_g, &grad_g));
    }

    // instantaneous LMS gradients
    for _ in 0..instances {
        let l = 5;
        let m = 3;
        let h = rng.proper_gaussian_vec(1.0, l);
        let g = rng.proper_gaussian_vec(1.0, m);
        let x = gaussian_matrix(&mut rng, l, m, 1.0);
        let y = rng.proper_gaussian(1.0);
        let e = y - inner(&h, &x.mul_vec(&g));
        let analytic_h: Vec<C64> = x.mul_vec(&g).iter().map(|&v| -(e.conj() * v)).collect();
        let fd_h = fd_wirtinger_gradient(|hv| (y - inner(hv, &x.mul_vec(&g))).norm_sqr(), &h, 1e-5);
        worst = worst.max(rel_err_vec(&fd_h, &analytic_h));
        let analytic_g: Vec<C64> = x.adjoint_mul_vec(&h).iter().map(|&v| -(e * v)).collect();
        let fd_g = fd_wirtinger_gradient(|gv| (y - inner(&h, &x.mul_vec(gv))).norm_sqr(), &g, 1e-5);
        worst = worst.max(rel_err_vec(&fd_g, &analytic_g));
    }

    // mixed-NLMS optimal-step quotient: gradient of the scalar
    // a posteriori cost and stationarity of its real direction
    let mut worst_stationarity: f64 = 0.0;
    for _ in 0..instances {
        let l = 5;
        let m = 3;
        let h = rng.proper_gaussian_vec(1.0, l);
        let g: Vec<f64> = (0..m)
            .map(|_| rng.proper_gaussian::<f64>(1.0).re * 2.0)
            .collect();
        let x = gaussian_matrix(&mut rng, l, m, 1.0);
        let y = rng.proper_gaussian(1.0);
        let e = y - inner(&h, &x.mul_vec_real(&g));
        let (w, mu) = crbnlms_g_quotient(&h, &x, e);
        let xw = x.mul_vec_real(&w);
        let s = inner(&h, &xw);
        if s.norm() < 1e-9 {
            continue;
        }
        let cost = |v: &[C64]| (e - v[0] * s).norm_sqr();
        let probe = vec![rng.proper_gaussian(1.0)];
        let fd = fd_wirtinger_gradient(cost, &probe, 1e-6);
        let analytic = -(s.conj()) * (e - probe[0] * s);
        worst = worst.max((fd[0] - analytic).norm() / analytic.norm().max(1e-12));
        let fd_opt = fd_wirtinger_gradient(cost, &[C64::new(mu, 0.0)], 1e-6);
        worst_stationarity = worst_stationarity.max(fd_opt[0].re.abs() / s.norm_sqr());
    }
    worst = worst.max(worst_stationarity);

    (
        worst <= 1e-6,
        format!("max relative gradient deviation = {worst:.2e}"),
        "<= 1e-6 on 100 instances per gradient".into(),
    )
}

/// Criterion 12: Mixed filters keep g real (RLS residual at rounding level) and
/// the mixed LMS matches the fully complex LMS floor on real-g systems.
fn c12_mixed_realness(seed: u64) -> (bool, String, String) {
    // realness over 10^4 steps of identification
    let l = 8;
    let m = 4;
    let mut rng = Rng::with_stream(seed, 1200);
    let h_true = rng.proper_gaussian_vec(1.0, l);
    let g_true: Vec<f64> = (0..m)
        .map(|_| rng.proper_gaussian::<f64>(1.0).re * 2.0)
        .collect();
    let g_true_c = complexify(&g_true);

    let mut crblms = CrblmsState::new(
        rng.proper_gaussian_vec(1.0, l),
        (0..m).map(|_| rng.uniform::<f64>() + 0.5).collect(),
        0.01,
        0.005,
    )
    .unwrap();
    let mut crbnlms = CrbnlmsState::new(
        rng.proper_gaussian_vec(1.0, l),
        (0..m).map(|_| rng.uniform::<f64>() + 0.5).collect(),
        0.5,
        0.25,
        1e-4,
        1e-4,
    )
    .unwrap();
    let mut crbrls = CrbrlsState::new(
        rng.proper_gaussian_vec(1.0, l),
        (0..m).map(|_| rng.uniform::<f64>() + 0.5).collect(),
        10.0,
        10.0,
        0.98,
    )
    .unwrap();
    for _ in 0..10_000 {
        let x = gaussian_matrix(&mut rng, l, m, 1.0);
        let y = evaluate_bilinear(&h_true, &g_true_c, &x, rng.proper_gaussian(1e-3)).unwrap();
        crblms.step(&x, y).unwrap();
        crbnlms.step(&x, y).unwrap();
        crbrls.step(&x, y).unwrap();
    }
    // g is stored real for all three; the RLS additionally combines a
    // complex gain pair, so its pre-projection residual is the live check
    let residual = crbrls.im_residual();
    let realness_ok = residual <= 1e-12;

    // floor comparison on a real-g system, same steps and data
    let seeds = 10;
    let diffs: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut rng = Rng::with_stream(seed, 1250 + s as u64);
            let h = rng.proper_gaussian_vec(1.0, l);
            let g: Vec<f64> = (0..m)
                .map(|_| rng.proper_gaussian::<f64>(1.0).re * 2.0)
                .collect();
            let gc = complexify(&g);
            let f = linearize(&h, &gc).unwrap();
            let bounds = lms_step_bounds(
                l,
                m,
                1.0,
                norm_sq(&gc),
                norm_sq(&h),
                0.0,
                0.0,
                1.0,
                norm_sq(&gc),
                norm_sq(&h),
            );
            let mu_h = 0.05 * bounds.mu_h_max;
            let mu_g = 0.05 * bounds.mu_g_max;
            let h0 = rng.proper_gaussian_vec(0.5, l);
            let g0: Vec<f64> = (0..m).map(|_| rng.uniform::<f64>() + 0.5).collect();
            let mut full = LmsState::new(h0.clone(), complexify(&g0), mu_h, mu_g).unwrap();
            let mut mixd = CrblmsState::new(h0, g0, mu_h, mu_g).unwrap();
            let horizon = 30_000;
            let tail = horizon / 10;
            let mut acc_full = 0.0;
            let mut acc_mixd = 0.0;
            for k in 0..horizon {
                let x = gaussian_matrix(&mut rng, l, m, 1.0);
                let y = evaluate_bilinear(&h, &gc, &x, rng.proper_gaussian(1e-2)).unwrap();
                full.step(&x, y).unwrap();
                mixd.step(&x, y).unwrap();
                if k >= horizon - tail {
                    let f_full = linearize(&full.h_hat, &full.g_hat).unwrap();
                    acc_full += normalized_misalignment(&f, &f_full).unwrap().nm;
                    let f_mixd = linearize(&mixd.h_hat, &complexify(&mixd.g_hat)).unwrap();
                    acc_mixd += normalized_misalignment(&f, &f_mixd).unwrap().nm;
                }
            }
            power_db(acc_mixd / tail as f64) - power_db(acc_full / tail as f64)
        })
        .collect();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let floor_ok = mean_diff.abs() <= 3.0;

    (
        realness_ok && floor_ok,
        format!("RLS imag residual {residual:.2e}; mixed-vs-full LMS floor gap {mean_diff:.2} dB"),
        "residual <= 1e-12; |gap| <= 3 dB".into(),
    )
}

pub fn verify_exit_code(reports: &[CriterionReport]) -> i32 {
    if reports.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}
