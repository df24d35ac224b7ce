//! Declarative experiment scenarios.
//!
//! Scenarios are flat `key = value` files with dotted sections (TOML
//! syntax), parsed strictly: unknown keys are rejected. The same structs
//! double as the registry of builtin scenarios.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which system structure generates the input matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// `M` independent channels with `L` shared lags; random `(h, g)`.
    Miso,
    /// IQ-imbalance transmitter into a multipath channel; basis `{x, conj(x)}`,
    /// `M` is fixed at 2.
    HammersteinIq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    White,
    Ma1,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: SignalKind,
    /// Standard deviation: of the samples for `white`, of the driving
    /// process for `ma1` (output variance is then `2 sigma^2`).
    pub sigma: f64,
}

/// Hammerstein-specific knobs; ignored by MISO scenarios.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Exponential tap-power decay of the synthetic multipath channel.
    pub channel_decay: f64,
    /// Amplitude imbalance factor of the IQ model.
    pub iq_gain: f64,
    /// Phase imbalance in radians.
    pub iq_phase: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            channel_decay: 0.15,
            iq_gain: 1.15,
            iq_phase: PI / 18.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbwfParams {
    /// Alternations to run (trace index is the iteration).
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CblsParams {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Dataset sizes as multiples of `L * M`; one trace per factor,
    /// named `cbls_{factor}ml`, all sharing the same sample prefix.
    pub n_factors: Vec<usize>,
}

fn default_iterations() -> usize {
    40
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmsParams {
    pub mu_h: f64,
    pub mu_g: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlmsParams {
    pub alpha_h: f64,
    pub alpha_g: f64,
    pub delta_h: f64,
    pub delta_g: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RlsParams {
    pub lambda: f64,
    /// Initial inverse-correlation scale for both P matrices.
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearNlmsParams {
    pub alpha: f64,
    pub delta: f64,
}

/// Uniform per-path parameters for the split-real structures.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitLmsParams {
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitNlmsParams {
    pub alpha: f64,
    pub delta: f64,
}

/// Which filters run, with their parameters. Every present entry adds
/// one trace (CBLS adds one per dataset factor).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterRoster {
    pub cbwf: Option<CbwfParams>,
    pub cbls: Option<CblsParams>,
    pub cblms: Option<LmsParams>,
    pub cbnlms: Option<NlmsParams>,
    pub cbrls: Option<RlsParams>,
    pub linear_nlms: Option<LinearNlmsParams>,
    pub lms_2r: Option<SplitLmsParams>,
    pub lms_4r: Option<SplitLmsParams>,
    pub nlms_2r: Option<SplitNlmsParams>,
    pub nlms_4r: Option<SplitNlmsParams>,
    pub crblms: Option<LmsParams>,
    pub crbnlms: Option<NlmsParams>,
    pub crbrls: Option<RlsParams>,
}

impl FilterRoster {
    pub fn is_empty(&self) -> bool {
        self.cbwf.is_none()
            && self.cbls.is_none()
            && self.cblms.is_none()
            && self.cbnlms.is_none()
            && self.cbrls.is_none()
            && self.linear_nlms.is_none()
            && self.lms_2r.is_none()
            && self.lms_4r.is_none()
            && self.nlms_2r.is_none()
            && self.nlms_4r.is_none()
            && self.crblms.is_none()
            && self.crbnlms.is_none()
            && self.crbrls.is_none()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: SystemKind,
    pub l: usize,
    pub m: usize,
    pub noise_std: f64,
    /// Steps for streaming filters, iterations for block filters.
    pub horizon: usize,
    /// Monte-Carlo run count.
    pub runs: usize,
    pub seed: u64,
    /// Abrupt redraw of the true parameters at this step (streaming
    /// only; Hammerstein scenarios redraw the channel, the imbalance
    /// coefficients are fixed by the config).
    #[serde(default)]
    pub change_point: Option<usize>,
    /// Standard deviation of random true/initial coefficient draws.
    #[serde(default = "default_init_std")]
    pub init_std: f64,
    pub signal: SignalConfig,
    #[serde(default)]
    pub system: SystemParams,
    pub filters: FilterRoster,
}

fn default_init_std() -> f64 {
    10.0
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.l == 0 || self.m == 0 {
            return Err(ConfigError("l and m must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(ConfigError("horizon must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(ConfigError("runs must be at least 1".into()));
        }
        if self.noise_std < 0.0 {
            return Err(ConfigError("noise_std must be nonnegative".into()));
        }
        if self.signal.sigma <= 0.0 {
            return Err(ConfigError("signal.sigma must be positive".into()));
        }
        if self.kind == SystemKind::HammersteinIq && self.m != 2 {
            return Err(ConfigError(
                "hammerstein_iq uses the basis {x, conj(x)}, so m must be 2".into(),
            ));
        }
        if let Some(cp) = self.change_point {
            if cp == 0 || cp >= self.horizon {
                return Err(ConfigError(
                    "change_point must lie strictly inside the horizon".into(),
                ));
            }
        }
        if self.init_std <= 0.0 {
            return Err(ConfigError("init_std must be positive".into()));
        }
        if self.filters.is_empty() {
            return Err(ConfigError("at least one filter must be configured".into()));
        }
        if let Some(c) = &self.filters.cbls {
            if c.n_factors.is_empty() {
                return Err(ConfigError("cbls.n_factors must be non-empty".into()));
            }
            if c.n_factors.contains(&0) {
                return Err(ConfigError("cbls.n_factors entries must be at least 1".into()));
            }
        }
        self.check_filter_params()
    }

    /// Probes every configured filter against the library constructors
    /// with dummy coefficients, so invalid parameters surface as config
    /// errors instead of failures in the middle of a run.
    fn check_filter_params(&self) -> Result<(), ConfigError> {
        use num_complex::Complex64 as C64;
        let reject = |name: &str, e: bifilt::FilterError| -> ConfigError {
            ConfigError(format!("filters.{name}: {e}"))
        };
        let h = vec![C64::new(1.0, 0.0)];
        let g = vec![C64::new(1.0, 0.0)];
        let gr = vec![1.0f64];
        let r = &self.filters;
        if let Some(p) = r.cbnlms {
            bifilt::adaptive::NlmsState::new(
                h.clone(),
                g.clone(),
                p.alpha_h,
                p.alpha_g,
                p.delta_h,
                p.delta_g,
            )
            .map_err(|e| reject("cbnlms", e))?;
        }
        if let Some(p) = r.cbrls {
            bifilt::adaptive::RlsState::new(h.clone(), g.clone(), p.nu, p.nu, p.lambda)
                .map_err(|e| reject("cbrls", e))?;
        }
        if let Some(p) = r.linear_nlms {
            bifilt::split_real::LinearNlmsState::new(g.clone(), p.alpha, p.delta)
                .map_err(|e| reject("linear_nlms", e))?;
        }
        if let Some(p) = r.crbnlms {
            bifilt::mixed::CrbnlmsState::new(
                h.clone(),
                gr.clone(),
                p.alpha_h,
                p.alpha_g,
                p.delta_h,
                p.delta_g,
            )
            .map_err(|e| reject("crbnlms", e))?;
        }
        if let Some(p) = r.crbrls {
            bifilt::mixed::CrbrlsState::new(h, gr, p.nu, p.nu, p.lambda)
                .map_err(|e| reject("crbrls", e))?;
        }
        Ok(())
    }
}

/// Builtin scenarios reproducing the main experiments.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![
        miso_wf_vs_ls(SignalKind::White),
        miso_wf_vs_ls(SignalKind::Ma1),
        miso_roster(),
        hammerstein_iq(),
        bilinear_vs_linear(),
    ]
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

/// Block-filter comparison: Wiener filter with exact statistics against
/// least squares on datasets of N = {1, 2, 8} * L * M samples.
fn miso_wf_vs_ls(kind: SignalKind) -> ScenarioConfig {
    let (name, sigma) = match kind {
        SignalKind::White => ("miso-wf-vs-ls", 1.0),
        SignalKind::Ma1 => ("miso-wf-vs-ls-ma1", 0.5f64.sqrt()),
    };
    ScenarioConfig {
        name: name.into(),
        kind: SystemKind::Miso,
        l: 64,
        m: 5,
        noise_std: 0.0,
        horizon: 40,
        runs: 10,
        seed: 1,
        change_point: None,
        init_std: 10.0,
        signal: SignalConfig { kind, sigma },
        system: SystemParams::default(),
        filters: FilterRoster {
            cbwf: Some(CbwfParams { iterations: 40 }),
            cbls: Some(CblsParams {
                iterations: 40,
                n_factors: vec![1, 2, 8],
            }),
            ..Default::default()
        },
    }
}

/// Streaming roster on the MISO system with an abrupt parameter change.
fn miso_roster() -> ScenarioConfig {
    ScenarioConfig {
        name: "miso-roster".into(),
        kind: SystemKind::Miso,
        l: 64,
        m: 5,
        noise_std: 0.01,
        horizon: 6000,
        runs: 20,
        seed: 1,
        change_point: Some(3000),
        init_std: 10.0,
        signal: SignalConfig {
            kind: SignalKind::White,
            sigma: 0.01,
        },
        system: SystemParams::default(),
        filters: FilterRoster {
            cbnlms: Some(NlmsParams {
                alpha_h: 0.5,
                alpha_g: 0.5,
                delta_h: 1e-4,
                delta_g: 1e-4,
            }),
            cbrls: Some(RlsParams {
                lambda: 63.0 / 64.0,
                nu: 10.0,
            }),
            nlms_2r: Some(SplitNlmsParams {
                alpha: 0.15,
                delta: 1e-4,
            }),
            nlms_4r: Some(SplitNlmsParams {
                alpha: 0.17,
                delta: 1e-4,
            }),
            ..Default::default()
        },
    }
}

/// IQ-imbalance transmitter into a 64-tap multipath channel.
fn hammerstein_iq() -> ScenarioConfig {
    ScenarioConfig {
        name: "hammerstein-iq".into(),
        kind: SystemKind::HammersteinIq,
        l: 64,
        m: 2,
        noise_std: 1e-4,
        horizon: 20_000,
        runs: 20,
        seed: 1,
        change_point: None,
        init_std: 1.0,
        signal: SignalConfig {
            kind: SignalKind::White,
            sigma: 1.0,
        },
        system: SystemParams::default(),
        filters: FilterRoster {
            cbnlms: Some(NlmsParams {
                alpha_h: 0.5,
                alpha_g: 0.5,
                delta_h: 1e-4,
                delta_g: 1e-4,
            }),
            cbrls: Some(RlsParams {
                lambda: 0.95,
                nu: 10.0,
            }),
            nlms_2r: Some(SplitNlmsParams {
                alpha: 0.0017,
                delta: 1e-4,
            }),
            nlms_4r: Some(SplitNlmsParams {
                alpha: 0.0001,
                delta: 1e-4,
            }),
            ..Default::default()
        },
    }
}

/// Bilinear NLMS (L + M unknowns) against the linear NLMS on the
/// equivalent L·M-coefficient model.
fn bilinear_vs_linear() -> ScenarioConfig {
    ScenarioConfig {
        name: "bilinear-vs-linear".into(),
        kind: SystemKind::Miso,
        l: 30,
        m: 5,
        noise_std: 1.0,
        horizon: 20_000,
        runs: 10,
        seed: 1,
        change_point: None,
        init_std: 10.0,
        signal: SignalConfig {
            kind: SignalKind::White,
            sigma: 1.0,
        },
        system: SystemParams::default(),
        filters: FilterRoster {
            cbnlms: Some(NlmsParams {
                alpha_h: 0.7,
                alpha_g: 0.7,
                delta_h: 1e-2,
                delta_g: 1e-2,
            }),
            linear_nlms: Some(LinearNlmsParams {
                alpha: 1.0,
                delta: 1e-2,
            }),
            ..Default::default()
        },
    }
}
