//! Scenario execution: builds systems and signals, streams every
//! configured filter over identical per-run data, and collects
//! misalignment/error traces with Monte-Carlo averaging helpers.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use bifilt::adaptive::{LmsState, NlmsState, RlsState};
use bifilt::linalg::{kron_vec, norm_sq};
use bifilt::mixed::{complexify, CrblmsState, CrbnlmsState, CrbrlsState};
use bifilt::model::{
    linearize, power_db, widely_linear_misalignment, BilinearSystem, InputMatrix, LinearEquivalent,
    DB_FLOOR,
};
use bifilt::optimum::{
    cbls_iterate, cbwf_iterate, ls_cost, mse_excess, AlternatingEstimate, BlockDataset,
};
use bifilt::signals::{
    build_hammerstein_matrix, build_miso_matrix, iq_basis, iq_coefficients,
    synthetic_multipath_channel, IqImbalance, Rng, SignalModel,
};
use bifilt::split_real::{
    LinearNlmsState, Nlms2rParams, Nlms4rParams, SplitReal2r, SplitReal4r, Steps2r, Steps4r,
};
use bifilt::stats::SecondOrderStats;

use crate::scenario::{ScenarioConfig, SignalKind, SystemKind};

/// One trace record; the CSV schema adds the scenario name up front.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub filter: String,
    pub run: usize,
    pub index: usize,
    pub nm_db: f64,
    pub ise_db: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct FilterSummary {
    pub filter: String,
    pub steady_nm_db: f64,
    pub steady_ise_db: f64,
    pub diverged_runs: usize,
}

#[derive(Debug)]
pub struct ScenarioOutput {
    pub name: String,
    pub runs: usize,
    pub rows: Vec<TraceRow>,
    pub summaries: Vec<FilterSummary>,
}

/// Fraction of the horizon used for steady-state metrics.
const STEADY_FRACTION: f64 = 0.1;

/// Early-stop threshold for block filters: once the misalignment moves
/// less than this between alternations the remaining trace is padded
/// with the converged value.
const BLOCK_EARLY_STOP: f64 = 1e-14;

fn signal_model(cfg: &ScenarioConfig) -> SignalModel<f64> {
    match cfg.signal.kind {
        SignalKind::White => SignalModel::WhiteProperGaussian {
            sigma: cfg.signal.sigma,
        },
        SignalKind::Ma1 => SignalModel::MovingAverage1 {
            sigma: cfg.signal.sigma,
        },
    }
}

/// Truth of one stationarity segment.
struct Segment {
    start: usize,
    system: BilinearSystem<f64>,
    f: LinearEquivalent<f64>,
}

/// Streams used by one Monte-Carlo run; ids are documented in the README.
struct RunStreams {
    system: Rng,
    init: Rng,
    signal: Rng,
    noise: Rng,
    channel: Rng,
}

impl RunStreams {
    fn new(seed: u64, run: usize) -> Self {
        let base = run as u64 * 8;
        Self {
            system: Rng::with_stream(seed, base),
            init: Rng::with_stream(seed, base + 1),
            signal: Rng::with_stream(seed, base + 2),
            noise: Rng::with_stream(seed, base + 3),
            channel: Rng::with_stream(seed, base + 4),
        }
    }
}

fn draw_truth(cfg: &ScenarioConfig, streams: &mut RunStreams, start: usize) -> Segment {
    let (h, g) = match cfg.kind {
        SystemKind::Miso => (
            streams.system.proper_gaussian_vec(cfg.init_std, cfg.l),
            streams.system.proper_gaussian_vec(cfg.init_std, cfg.m),
        ),
        SystemKind::HammersteinIq => {
            let h =
                synthetic_multipath_channel(&mut streams.channel, cfg.l, cfg.system.channel_decay);
            let (g1, g2) = iq_coefficients(IqImbalance {
                gain: cfg.system.iq_gain,
                phase: cfg.system.iq_phase,
            });
            (h, vec![g1, g2])
        }
    };
    let system = BilinearSystem::new(h, g, cfg.noise_std).expect("valid random system");
    let f = system.linear_equivalent();
    Segment { start, system, f }
}

/// Per-run sample record: channel streams plus noise, shared by every
/// filter in the roster.
struct RunData {
    segments: Vec<Segment>,
    channels: Vec<Vec<C64>>,
    noise: Vec<C64>,
}

impl RunData {
    fn generate(cfg: &ScenarioConfig, run: usize, samples: usize) -> (Self, RunStreams) {
        let mut streams = RunStreams::new(cfg.seed, run);
        let mut segments = vec![draw_truth(cfg, &mut streams, 0)];
        if let Some(cp) = cfg.change_point {
            segments.push(draw_truth(cfg, &mut streams, cp));
        }
        let model = signal_model(cfg);
        let n_channels = match cfg.kind {
            SystemKind::Miso => cfg.m,
            SystemKind::HammersteinIq => 1,
        };
        let channels: Vec<Vec<C64>> = (0..n_channels)
            .map(|_| model.generate(&mut streams.signal, samples))
            .collect();
        let noise = streams.noise.proper_gaussian_vec(cfg.noise_std, samples);
        (
            Self {
                segments,
                channels,
                noise,
            },
            streams,
        )
    }

    fn segment_at(&self, k: usize) -> &Segment {
        self.segments
            .iter()
            .rev()
            .find(|s| s.start <= k)
            .expect("segment 0 starts at 0")
    }

    fn matrix_at(&self, cfg: &ScenarioConfig, k: usize) -> InputMatrix<f64> {
        match cfg.kind {
            SystemKind::Miso => build_miso_matrix(&self.channels, cfg.l, k),
            SystemKind::HammersteinIq => {
                build_hammerstein_matrix(&self.channels[0], &iq_basis(), cfg.l, k)
            }
        }
    }

    fn output_at(&self, x: &InputMatrix<f64>, k: usize) -> C64 {
        self.segment_at(k)
            .system
            .output(x, self.noise[k])
            .expect("consistent shapes")
    }
}

/// Streaming filter instances built from the roster.
enum StreamFilter {
    Cblms(LmsState<f64>),
    Cbnlms(NlmsState<f64>),
    Cbrls(RlsState<f64>),
    LinearNlms(LinearNlmsState<f64>),
    Lms2r(SplitReal2r<f64>, Steps2r<f64>),
    Lms4r(SplitReal4r<f64>, Steps4r<f64>),
    Nlms2r(SplitReal2r<f64>, Nlms2rParams<f64>),
    Nlms4r(SplitReal4r<f64>, Nlms4rParams<f64>),
    Crblms(CrblmsState<f64>),
    Crbnlms(CrbnlmsState<f64>),
    Crbrls(CrbrlsState<f64>),
}

impl StreamFilter {
    fn name(&self) -> &'static str {
        match self {
            StreamFilter::Cblms(_) => "cblms",
            StreamFilter::Cbnlms(_) => "cbnlms",
            StreamFilter::Cbrls(_) => "cbrls",
            StreamFilter::LinearNlms(_) => "linear_nlms",
            StreamFilter::Lms2r(..) => "lms_2r",
            StreamFilter::Lms4r(..) => "lms_4r",
            StreamFilter::Nlms2r(..) => "nlms_2r",
            StreamFilter::Nlms4r(..) => "nlms_4r",
            StreamFilter::Crblms(_) => "crblms",
            StreamFilter::Crbnlms(_) => "crbnlms",
            StreamFilter::Crbrls(_) => "crbrls",
        }
    }

    fn step(&mut self, x: &InputMatrix<f64>, y: C64) -> Result<C64, bifilt::FilterError> {
        match self {
            StreamFilter::Cblms(s) => s.step(x, y),
            StreamFilter::Cbnlms(s) => s.step(x, y),
            StreamFilter::Cbrls(s) => s.step(x, y),
            StreamFilter::LinearNlms(s) => s.step(x, y),
            StreamFilter::Lms2r(s, p) => s.lms_step(p, x, y),
            StreamFilter::Lms4r(s, p) => s.lms_step(p, x, y),
            StreamFilter::Nlms2r(s, p) => s.nlms_step(p, x, y),
            StreamFilter::Nlms4r(s, p) => s.nlms_step(p, x, y),
            StreamFilter::Crblms(s) => s.step(x, y),
            StreamFilter::Crbnlms(s) => s.step(x, y),
            StreamFilter::Crbrls(s) => s.step(x, y),
        }
    }

    /// Widely linear equivalent `(p, q)` of the current estimate.
    fn widely_linear(&self) -> (Vec<C64>, Vec<C64>) {
        match self {
            StreamFilter::Cblms(s) => strict_linear(&s.h_hat, &s.g_hat),
            StreamFilter::Cbnlms(s) => strict_linear(&s.h_hat, &s.g_hat),
            StreamFilter::Cbrls(s) => strict_linear(&s.h_hat, &s.g_hat),
            StreamFilter::LinearNlms(s) => s.widely_linear(),
            StreamFilter::Lms2r(s, _) => s.widely_linear(),
            StreamFilter::Lms4r(s, _) => s.widely_linear(),
            StreamFilter::Nlms2r(s, _) => s.widely_linear(),
            StreamFilter::Nlms4r(s, _) => s.widely_linear(),
            StreamFilter::Crblms(s) => strict_linear(&s.h_hat, &complexify(&s.g_hat)),
            StreamFilter::Crbnlms(s) => strict_linear(&s.h_hat, &complexify(&s.g_hat)),
            StreamFilter::Crbrls(s) => strict_linear(&s.h_hat, &complexify(&s.g_hat)),
        }
    }
}

fn strict_linear(h: &[C64], g: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let hc: Vec<C64> = h.iter().map(|z| z.conj()).collect();
    let p = kron_vec(g, &hc);
    let q = vec![C64::new(0.0, 0.0); p.len()];
    (p, q)
}

fn build_stream_filters(
    cfg: &ScenarioConfig,
    h0: &[C64],
    g0: &[C64],
    f0: &[C64],
) -> Vec<StreamFilter> {
    let r = &cfg.filters;
    let mut out = Vec::new();
    let g0_real: Vec<f64> = g0.iter().map(|z| z.re).collect();
    if let Some(p) = r.cblms {
        out.push(StreamFilter::Cblms(
            LmsState::new(h0.to_vec(), g0.to_vec(), p.mu_h, p.mu_g).expect("valid LMS init"),
        ));
    }
    if let Some(p) = r.cbnlms {
        out.push(StreamFilter::Cbnlms(
            NlmsState::new(
                h0.to_vec(),
                g0.to_vec(),
                p.alpha_h,
                p.alpha_g,
                p.delta_h,
                p.delta_g,
            )
            .expect("valid NLMS init"),
        ));
    }
    if let Some(p) = r.cbrls {
        out.push(StreamFilter::Cbrls(
            RlsState::new(h0.to_vec(), g0.to_vec(), p.nu, p.nu, p.lambda).expect("valid RLS init"),
        ));
    }
    if let Some(p) = r.linear_nlms {
        out.push(StreamFilter::LinearNlms(
            LinearNlmsState::new(f0.to_vec(), p.alpha, p.delta).expect("valid linear NLMS init"),
        ));
    }
    if let Some(p) = r.lms_2r {
        out.push(StreamFilter::Lms2r(
            SplitReal2r::from_complex(h0, g0),
            Steps2r::uniform(p.mu),
        ));
    }
    if let Some(p) = r.lms_4r {
        out.push(StreamFilter::Lms4r(
            SplitReal4r::from_complex(h0, g0),
            Steps4r::uniform(p.mu),
        ));
    }
    if let Some(p) = r.nlms_2r {
        out.push(StreamFilter::Nlms2r(
            SplitReal2r::from_complex(h0, g0),
            Nlms2rParams::uniform(p.alpha, p.delta),
        ));
    }
    if let Some(p) = r.nlms_4r {
        out.push(StreamFilter::Nlms4r(
            SplitReal4r::from_complex(h0, g0),
            Nlms4rParams::uniform(p.alpha, p.delta),
        ));
    }
    if let Some(p) = r.crblms {
        out.push(StreamFilter::Crblms(
            CrblmsState::new(h0.to_vec(), g0_real.clone(), p.mu_h, p.mu_g)
                .expect("valid CRBLMS init"),
        ));
    }
    if let Some(p) = r.crbnlms {
        out.push(StreamFilter::Crbnlms(
            CrbnlmsState::new(
                h0.to_vec(),
                g0_real.clone(),
                p.alpha_h,
                p.alpha_g,
                p.delta_h,
                p.delta_g,
            )
            .expect("valid CRBNLMS init"),
        ));
    }
    if let Some(p) = r.crbrls {
        out.push(StreamFilter::Crbrls(
            CrbrlsState::new(h0.to_vec(), g0_real, p.nu, p.nu, p.lambda)
                .expect("valid CRBRLS init"),
        ));
    }
    out
}

/// Trace of one filter within one run.
struct FilterTrace {
    filter: String,
    rows: Vec<(usize, f64, f64)>, // (index, nm_db, ise_db)
    diverged: bool,
}

/// Executes the full scenario. Runs are independent and execute in
/// parallel; rows are merged deterministically by (filter, run, index).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, crate::scenario::ConfigError> {
    cfg.validate()?;
    let has_stream = stream_filter_count(cfg) > 0;
    let block_samples = block_sample_count(cfg);
    let samples = block_samples.max(if has_stream { cfg.horizon } else { 0 });

    let per_run: Vec<Vec<FilterTrace>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| execute_run(cfg, run, samples))
        .collect();

    // deterministic order: filters in roster order, then run, then index
    let filter_names: Vec<String> = per_run[0].iter().map(|t| t.filter.clone()).collect();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for name in &filter_names {
        let mut diverged_runs = 0;
        for (run, traces) in per_run.iter().enumerate() {
            let t = traces
                .iter()
                .find(|t| &t.filter == name)
                .expect("every run produces every filter");
            if t.diverged {
                diverged_runs += 1;
            }
            for &(index, nm_db, ise_db) in &t.rows {
                rows.push(TraceRow {
                    filter: name.clone(),
                    run,
                    index,
                    nm_db,
                    ise_db,
                    diverged: t.diverged,
                });
            }
        }
        let nm_curve = averaged_curve(&rows, name, CurveKind::Nm);
        let ise_curve = averaged_curve(&rows, name, CurveKind::Ise);
        summaries.push(FilterSummary {
            filter: name.clone(),
            steady_nm_db: steady_state_db(&nm_curve),
            steady_ise_db: steady_state_db(&ise_curve),
            diverged_runs,
        });
    }
    Ok(ScenarioOutput {
        name: cfg.name.clone(),
        runs: cfg.runs,
        rows,
        summaries,
    })
}

fn stream_filter_count(cfg: &ScenarioConfig) -> usize {
    let r = &cfg.filters;
    [
        r.cblms.is_some(),
        r.cbnlms.is_some(),
        r.cbrls.is_some(),
        r.linear_nlms.is_some(),
        r.lms_2r.is_some(),
        r.lms_4r.is_some(),
        r.nlms_2r.is_some(),
        r.nlms_4r.is_some(),
        r.crblms.is_some(),
        r.crbnlms.is_some(),
        r.crbrls.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count()
}

fn block_sample_count(cfg: &ScenarioConfig) -> usize {
    cfg.filters
        .cbls
        .as_ref()
        .map(|c| c.n_factors.iter().max().copied().unwrap_or(0) * cfg.l * cfg.m)
        .unwrap_or(0)
}

fn execute_run(cfg: &ScenarioConfig, run: usize, samples: usize) -> Vec<FilterTrace> {
    let (data, mut streams) = RunData::generate(cfg, run, samples);
    let h0 = streams.init.proper_gaussian_vec(cfg.init_std, cfg.l);
    let g0 = streams.init.proper_gaussian_vec(cfg.init_std, cfg.m);
    let hc: Vec<C64> = h0.iter().map(|z| z.conj()).collect();
    let f0 = kron_vec(&g0, &hc);

    let mut traces = Vec::new();
    if cfg.filters.cbwf.is_some() || cfg.filters.cbls.is_some() {
        traces.extend(execute_block(cfg, &data, &h0, &g0));
    }
    if stream_filter_count(cfg) > 0 {
        traces.extend(execute_stream(cfg, &data, &h0, &g0, &f0));
    }
    traces
}

fn execute_stream(
    cfg: &ScenarioConfig,
    data: &RunData,
    h0: &[C64],
    g0: &[C64],
    f0: &[C64],
) -> Vec<FilterTrace> {
    let mut filters = build_stream_filters(cfg, h0, g0, f0);
    let mut traces: Vec<FilterTrace> = filters
        .iter()
        .map(|f| FilterTrace {
            filter: f.name().to_string(),
            rows: Vec::with_capacity(cfg.horizon),
            diverged: false,
        })
        .collect();
    for k in 0..cfg.horizon {
        let x = data.matrix_at(cfg, k);
        let y = data.output_at(&x, k);
        let f_true = &data.segment_at(k).f;
        for (filter, trace) in filters.iter_mut().zip(traces.iter_mut()) {
            if trace.diverged {
                continue;
            }
            match filter.step(&x, y) {
                Ok(e) => {
                    let (p, q) = filter.widely_linear();
                    let nm = widely_linear_misalignment(f_true, &p, &q)
                        .expect("aligned coefficient lengths");
                    trace.rows.push((k, nm.nm_db, power_db(e.norm_sqr())));
                }
                Err(_) => {
                    trace.diverged = true;
                }
            }
        }
    }
    traces
}

fn execute_block(cfg: &ScenarioConfig, data: &RunData, h0: &[C64], g0: &[C64]) -> Vec<FilterTrace> {
    let truth = &data.segments[0];
    let mut traces = Vec::new();

    if let Some(p) = cfg.filters.cbwf {
        let model = signal_model(cfg);
        let r = model.stacked_covariance(cfg.l, cfg.m);
        let energy = {
            // E[|y|^2] = f^T R f* + sigma_n^2, used for the MSE trace
            let fc: Vec<C64> = truth.f.f.iter().map(|z| z.conj()).collect();
            let rf = r.mul_vec(&fc);
            bifilt::linalg::dotu(&truth.f.f, &rf).re + cfg.noise_std * cfg.noise_std
        };
        let stats = SecondOrderStats::from_covariance_and_truth(r, &truth.f.f, cfg.m);
        let trace = run_block_filter(
            "cbwf".to_string(),
            p.iterations,
            h0,
            g0,
            truth,
            |est| cbwf_iterate(&stats, est),
            |est| energy + mse_excess(&stats, &est.h_hat, &est.g_hat),
        );
        traces.push(trace);
    }

    if let Some(p) = cfg.filters.cbls.clone() {
        for &factor in &p.n_factors {
            let n = factor * cfg.l * cfg.m;
            let xs: Vec<InputMatrix<f64>> = (0..n).map(|k| data.matrix_at(cfg, k)).collect();
            let ys: Vec<C64> = xs
                .iter()
                .enumerate()
                .map(|(k, x)| data.output_at(x, k))
                .collect();
            let dataset = BlockDataset::new(xs, ys).expect("well-formed dataset");
            let inv_n = 1.0 / n as f64;
            let trace = run_block_filter(
                format!("cbls_{factor}ml"),
                p.iterations,
                h0,
                g0,
                truth,
                |est| cbls_iterate(&dataset, est),
                |est| ls_cost(&dataset, &est.h_hat, &est.g_hat) * inv_n,
            );
            traces.push(trace);
        }
    }
    traces
}

fn run_block_filter(
    name: String,
    iterations: usize,
    h0: &[C64],
    g0: &[C64],
    truth: &Segment,
    mut iterate: impl FnMut(
        &AlternatingEstimate<f64>,
    ) -> Result<AlternatingEstimate<f64>, bifilt::FilterError>,
    mut cost: impl FnMut(&AlternatingEstimate<f64>) -> f64,
) -> FilterTrace {
    let mut est = AlternatingEstimate::new(h0.to_vec(), g0.to_vec()).expect("nonzero g0");
    let mut rows = Vec::with_capacity(iterations + 1);
    let nm0 = pair_nm_db(truth, &est);
    rows.push((0, nm0, power_db(cost(&est).max(0.0))));
    let mut prev_nm = nm_linear(truth, &est);
    let mut diverged = false;
    let mut n = 1;
    while n <= iterations {
        match iterate(&est) {
            Ok(next) => {
                est = next;
                let nm = nm_linear(truth, &est);
                rows.push((n, power_db(nm), power_db(cost(&est).max(0.0))));
                let stalled = (nm - prev_nm).abs() < BLOCK_EARLY_STOP;
                prev_nm = nm;
                n += 1;
                if stalled {
                    // converged: hold the value for the remaining budget
                    let last = *rows.last().expect("at least one row");
                    while n <= iterations {
                        rows.push((n, last.1, last.2));
                        n += 1;
                    }
                }
            }
            Err(_) => {
                diverged = true;
                break;
            }
        }
    }
    FilterTrace {
        filter: name,
        rows,
        diverged,
    }
}

fn nm_linear(truth: &Segment, est: &AlternatingEstimate<f64>) -> f64 {
    let f_hat = linearize(&est.h_hat, &est.g_hat).expect("nonempty estimate");
    let num: f64 = truth
        .f
        .f
        .iter()
        .zip(&f_hat.f)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    num / norm_sq(&truth.f.f)
}

fn pair_nm_db(truth: &Segment, est: &AlternatingEstimate<f64>) -> f64 {
    power_db(nm_linear(truth, est))
}

/// Which column of the trace a curve reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Nm,
    Ise,
}

/// Linear-domain Monte-Carlo average of one filter's trace: entry `i`
/// is the mean over all runs that have a row at index `i`.
pub fn averaged_curve(rows: &[TraceRow], filter: &str, kind: CurveKind) -> Vec<f64> {
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for row in rows.iter().filter(|r| r.filter == filter) {
        if row.index >= sums.len() {
            sums.resize(row.index + 1, 0.0);
            counts.resize(row.index + 1, 0);
        }
        let db = match kind {
            CurveKind::Nm => row.nm_db,
            CurveKind::Ise => row.ise_db,
        };
        sums[row.index] += 10f64.powf(db / 10.0);
        counts[row.index] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect()
}

/// dB view of a linear curve.
pub fn curve_db(linear: &[f64]) -> Vec<f64> {
    linear.iter().map(|&v| power_db(v)).collect()
}

/// Mean of the last tenth of a linear curve, in dB.
pub fn steady_state_db(linear: &[f64]) -> f64 {
    if linear.is_empty() {
        return DB_FLOOR;
    }
    let tail = ((linear.len() as f64 * STEADY_FRACTION).ceil() as usize).max(1);
    let start = linear.len() - tail;
    let mean = linear[start..].iter().sum::<f64>() / tail as f64;
    power_db(mean)
}

/// First index in `[from, to)` where the dB curve is at or below the
/// threshold.
pub fn first_crossing_db(
    curve: &[f64],
    threshold_db: f64,
    from: usize,
    to: usize,
) -> Option<usize> {
    let to = to.min(curve.len());
    (from..to).find(|&i| curve[i] <= threshold_db)
}

impl ScenarioOutput {
    /// Averaged linear-domain curve for one filter.
    pub fn nm_curve(&self, filter: &str) -> Vec<f64> {
        averaged_curve(&self.rows, filter, CurveKind::Nm)
    }

    pub fn ise_curve(&self, filter: &str) -> Vec<f64> {
        averaged_curve(&self.rows, filter, CurveKind::Ise)
    }

    pub fn summary(&self, filter: &str) -> Option<&FilterSummary> {
        self.summaries.iter().find(|s| s.filter == filter)
    }

    /// CSV with the schema
    /// `scenario,filter,run,index,nm_db,ise_db,diverged`
    /// (UTF-8, LF line endings, shortest round-trip float formatting).
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record([
            "scenario", "filter", "run", "index", "nm_db", "ise_db", "diverged",
        ])?;
        for r in &self.rows {
            w.write_record([
                self.name.as_str(),
                r.filter.as_str(),
                &r.run.to_string(),
                &r.index.to_string(),
                &format_f64(r.nm_db),
                &format_f64(r.ise_db),
                if r.diverged { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal representation that round-trips to the same f64.
fn format_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, builtin_scenarios};

    fn small_roster() -> ScenarioConfig {
        let mut cfg = builtin("miso-roster").unwrap();
        cfg.l = 6;
        cfg.m = 3;
        cfg.horizon = 400;
        cfg.runs = 3;
        cfg.change_point = Some(200);
        cfg
    }

    #[test]
    fn identical_config_gives_identical_csv() {
        let cfg = small_roster();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        a.write_csv(&mut ba).unwrap();
        b.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb, "same config and seed must give bit-identical CSV");
    }

    #[test]
    fn seed_changes_trace_values() {
        let cfg = small_roster();
        let a = run_scenario(&cfg).unwrap();
        let mut cfg2 = cfg;
        cfg2.seed = 2;
        let b = run_scenario(&cfg2).unwrap();
        assert_ne!(
            a.rows.iter().map(|r| r.nm_db.to_bits()).collect::<Vec<_>>(),
            b.rows.iter().map(|r| r.nm_db.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn indices_strictly_increase_per_filter_run() {
        let out = run_scenario(&small_roster()).unwrap();
        let mut last: std::collections::HashMap<(String, usize), i64> = Default::default();
        for r in &out.rows {
            let key = (r.filter.clone(), r.run);
            let prev = last.insert(key, r.index as i64);
            if let Some(prev) = prev {
                assert!(r.index as i64 > prev, "indices must strictly increase");
            }
        }
    }

    #[test]
    fn block_scenario_produces_iteration_traces() {
        let mut cfg = builtin("miso-wf-vs-ls").unwrap();
        cfg.l = 6;
        cfg.m = 2;
        cfg.runs = 2;
        cfg.horizon = 30;
        if let Some(c) = cfg.filters.cbwf.as_mut() {
            c.iterations = 30;
        }
        if let Some(c) = cfg.filters.cbls.as_mut() {
            c.iterations = 30;
        }
        let out = run_scenario(&cfg).unwrap();
        for name in ["cbwf", "cbls_1ml", "cbls_2ml", "cbls_8ml"] {
            let curve = out.nm_curve(name);
            assert_eq!(curve.len(), 31, "{name} should trace 0..=30");
            assert!(
                curve_db(&curve)[30] < -80.0,
                "{name} should identify a noiseless system, got {} dB",
                curve_db(&curve)[30]
            );
        }
    }

    #[test]
    fn divergence_truncates_and_flags_the_trace() {
        use crate::scenario::LmsParams;
        let mut cfg = small_roster();
        cfg.filters = Default::default();
        // absurd step size guarantees overflow within a few steps
        cfg.filters.cblms = Some(LmsParams {
            mu_h: 1e200,
            mu_g: 1e200,
        });
        cfg.filters.cbnlms = Some(crate::scenario::NlmsParams {
            alpha_h: 0.5,
            alpha_g: 0.5,
            delta_h: 1e-4,
            delta_g: 1e-4,
        });
        cfg.runs = 2;
        let out = run_scenario(&cfg).unwrap();
        let lms_rows: Vec<_> = out.rows.iter().filter(|r| r.filter == "cblms").collect();
        assert!(!lms_rows.is_empty());
        assert!(
            lms_rows.iter().all(|r| r.diverged),
            "diverged run must be flagged"
        );
        let per_run_len = lms_rows.iter().filter(|r| r.run == 0).count();
        assert!(per_run_len < cfg.horizon, "trace must be truncated");
        assert!(lms_rows
            .iter()
            .all(|r| r.nm_db.is_finite() && r.ise_db.is_finite()));
        // the healthy filter is unaffected
        let ok = out.summary("cbnlms").unwrap();
        assert_eq!(ok.diverged_runs, 0);
        let nlms_rows = out.rows.iter().filter(|r| r.filter == "cbnlms").count();
        assert_eq!(nlms_rows, cfg.horizon * cfg.runs);
    }

    #[test]
    fn all_builtins_validate() {
        for cfg in builtin_scenarios() {
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn sample_streams_do_not_depend_on_the_roster() {
        // every filter sees the same per-run data: adding or removing
        // other filters must not change a filter's trace at all
        let full = small_roster();
        let mut solo = full.clone();
        solo.filters = Default::default();
        solo.filters.cbnlms = full.filters.cbnlms;
        let rows_of = |cfg: &ScenarioConfig| {
            run_scenario(cfg)
                .unwrap()
                .rows
                .into_iter()
                .filter(|r| r.filter == "cbnlms")
                .map(|r| (r.run, r.index, r.nm_db.to_bits(), r.ise_db.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(rows_of(&full), rows_of(&solo));
    }

    #[test]
    fn averaging_is_linear_before_db() {
        let rows = vec![
            TraceRow {
                filter: "f".into(),
                run: 0,
                index: 0,
                nm_db: 0.0,
                ise_db: 0.0,
                diverged: false,
            },
            TraceRow {
                filter: "f".into(),
                run: 1,
                index: 0,
                nm_db: -10.0,
                ise_db: 0.0,
                diverged: false,
            },
        ];
        let curve = averaged_curve(&rows, "f", CurveKind::Nm);
        // (1.0 + 0.1) / 2 = 0.55, not 10^(-5/10)
        assert!((curve[0] - 0.55).abs() < 1e-12);
    }
}
