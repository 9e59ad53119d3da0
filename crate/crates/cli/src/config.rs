//! JSON experiment configuration, `schema: 1`.
//!
//! The document is first read as a generic value to check `schema` and pick
//! the model, then deserialised into the typed record for that model with
//! unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use qmarket_core::reservoir::{Density, KWindow};
use qmarket_core::reservoir_generated::Model3Params;
use qmarket_core::reservoir_info::ReservoirSpecII;
use qmarket_core::{uniform_grid, MarketInit, TraderParams};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Model1,
    Model2,
    Model3,
    PilotWave,
}

impl ModelKind {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "model1" => Ok(Self::Model1),
            "model2" => Ok(Self::Model2),
            "model3" => Ok(Self::Model3),
            "pilotwave" => Ok(Self::PilotWave),
            other => Err(CliError::config(format!(
                "unknown model {other:?}; expected model1, model2, model3 or pilotwave"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// End time.
    pub t_max: Option<f64>,
    /// End time in units of the decay time (`1/γ′` or `1/Re Γ`); models 2 and 3.
    pub decay_times: Option<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub svg: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum DensityConfig {
    Constant(f64),
    Table { k: Vec<f64>, n: Vec<f64> },
}

impl DensityConfig {
    pub fn build(&self) -> CliResult<Density> {
        Ok(match self {
            DensityConfig::Constant(v) => {
                let d = Density::Constant(*v);
                d.validate()?;
                d
            }
            DensityConfig::Table { k, n } => Density::table(k.clone(), n.clone())?,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

impl WindowConfig {
    pub fn build(&self) -> CliResult<KWindow> {
        Ok(KWindow::new(self.k_min, self.k_max, self.n_k)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model1Trader {
    pub name: String,
    pub omega_s: f64,
    pub omega_c: f64,
    #[serde(rename = "Omega")]
    pub omega_loi: f64,
    pub lambda_inf: f64,
    #[serde(rename = "S")]
    pub shares: u32,
    #[serde(rename = "K")]
    pub cash: u32,
    #[serde(rename = "I")]
    pub loi: u32,
}

impl Model1Trader {
    pub fn params(&self) -> CliResult<TraderParams> {
        Ok(TraderParams::new(self.omega_s, self.omega_c, self.omega_loi, self.lambda_inf)?)
    }

    pub fn init(&self) -> MarketInit {
        MarketInit::new(self.shares, self.cash, self.loi)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model2Trader {
    pub name: String,
    /// Common share and cash frequency.
    pub omega: f64,
    #[serde(rename = "Omega_slope")]
    pub omega_slope: f64,
    pub lambda_inf: f64,
    pub density: DensityConfig,
    #[serde(rename = "S")]
    pub shares: u32,
    #[serde(rename = "K")]
    pub cash: u32,
    /// Discretised band for `oracle-check`.
    pub oracle: Option<WindowConfig>,
}

impl Model2Trader {
    pub fn spec(&self) -> CliResult<ReservoirSpecII> {
        Ok(ReservoirSpecII::new(self.omega, self.omega_slope, self.lambda_inf, self.density.build()?)?)
    }

    pub fn init(&self) -> MarketInit {
        MarketInit::new(self.shares, self.cash, 0)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model3Trader {
    pub name: String,
    pub omega_s: f64,
    pub omega_c: f64,
    #[serde(rename = "Omega")]
    pub omega_loi: f64,
    #[serde(rename = "Omega_r_slope")]
    pub omega_r_slope: f64,
    pub lambda_inf: f64,
    pub gamma: f64,
    pub density: DensityConfig,
    #[serde(rename = "S")]
    pub shares: u32,
    #[serde(rename = "K")]
    pub cash: u32,
    #[serde(rename = "I")]
    pub loi: u32,
    /// Keep the γ-integral of the occupations.
    #[serde(default = "yes")]
    pub full_integral: bool,
    pub oracle: Option<WindowConfig>,
}

impl Model3Trader {
    pub fn params(&self) -> CliResult<Model3Params> {
        let p = Model3Params {
            omega_s: self.omega_s,
            omega_c: self.omega_c,
            omega_loi: self.omega_loi,
            omega_r_slope: self.omega_r_slope,
            lambda_inf: self.lambda_inf,
            gamma: self.gamma,
            n_r_density: self.density.build()?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn init(&self) -> MarketInit {
        MarketInit::new(self.shares, self.cash, self.loi)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
    pub q1_min: f64,
    pub q2_min: f64,
    pub dq1: f64,
    pub dq2: f64,
}

/// `A·exp(−(q₁−c₁)²/4σ₁² − (q₂−c₂)²/4σ₂² + i(k₁q₁ + k₂q₂))`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub amplitude: f64,
    pub sigma: [f64; 2],
    pub center: [f64; 2],
    pub momentum: [f64; 2],
}

/// `c0 + c1·q₁ + c2·q₂ + c11·q₁² + c22·q₂² + c12·q₁q₂`.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticPotential {
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub c11: f64,
    #[serde(default)]
    pub c22: f64,
    #[serde(default)]
    pub c12: f64,
}

impl QuadraticPotential {
    pub fn at(&self, a: f64, b: f64) -> f64 {
        self.c0 + self.c1 * a + self.c2 * b + self.c11 * a * a + self.c22 * b * b + self.c12 * a * b
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PathConfig {
    Constant([f64; 2]),
    /// `[t, q₁, q₂]` rows.
    Samples(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotWaveConfig {
    pub schema: u64,
    pub model: String,
    pub grid: GridConfig,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub wave: Vec<PacketConfig>,
    #[serde(default)]
    pub potential: QuadraticPotential,
    /// Mask threshold relative to `max R`.
    #[serde(default = "default_floor")]
    pub r_floor_rel: f64,
    /// Split-operator steps between consecutive output samples.
    #[serde(default = "ten")]
    pub steps_per_sample: usize,
    /// Initial portfolios `(π₁, π₂)`.
    pub pi0: [f64; 2],
    pub path: PathConfig,
    pub time: TimeConfig,
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

fn ten() -> usize {
    10
}

fn default_floor() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig<T> {
    pub schema: u64,
    pub model: String,
    pub traders: Vec<T>,
    pub time: TimeConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone)]
pub enum ExperimentConfig {
    Model1(OperatorConfig<Model1Trader>),
    Model2(OperatorConfig<Model2Trader>),
    Model3(OperatorConfig<Model3Trader>),
    PilotWave(PilotWaveConfig),
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> CliResult<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::config("configuration must be a JSON object"))?;
        match obj.get("schema").and_then(Value::as_u64) {
            Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(CliError::config(format!("unsupported schema {v}; expected {SCHEMA_VERSION}"))),
            None => return Err(CliError::config("missing integer field \"schema\"")),
        }
        let model = obj
            .get("model")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::config("missing string field \"model\""))?;
        let cfg = match ModelKind::parse(model)? {
            ModelKind::Model1 => Self::Model1(serde_json::from_value(value)?),
            ModelKind::Model2 => Self::Model2(serde_json::from_value(value)?),
            ModelKind::Model3 => Self::Model3(serde_json::from_value(value)?),
            ModelKind::PilotWave => Self::PilotWave(serde_json::from_value(value)?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str(text: &str) -> CliResult<Self> {
        Self::from_value(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Model1(_) => ModelKind::Model1,
            Self::Model2(_) => ModelKind::Model2,
            Self::Model3(_) => ModelKind::Model3,
            Self::PilotWave(_) => ModelKind::PilotWave,
        }
    }

    pub fn output(&self) -> &OutputConfig {
        match self {
            Self::Model1(c) => &c.output,
            Self::Model2(c) => &c.output,
            Self::Model3(c) => &c.output,
            Self::PilotWave(c) => &c.output,
        }
    }

    /// Checks every parameter record before any computation.
    pub fn validate(&self) -> CliResult<()> {
        fn names<T>(traders: &[T], name: impl Fn(&T) -> &str) -> CliResult<()> {
            if traders.is_empty() {
                return Err(CliError::config("at least one trader is required"));
            }
            let mut seen = std::collections::BTreeSet::new();
            for t in traders {
                let n = name(t);
                if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(CliError::config(format!(
                        "trader name {n:?} must be non-empty ASCII letters, digits, '_' or '-'"
                    )));
                }
                if !seen.insert(n.to_string()) {
                    return Err(CliError::config(format!("duplicate trader name {n:?}")));
                }
            }
            Ok(())
        }
        match self {
            Self::Model1(c) => {
                names(&c.traders, |t| &t.name)?;
                for t in &c.traders {
                    t.params()?;
                }
                if c.time.decay_times.is_some() {
                    return Err(CliError::config("time.decay_times is only defined for model2 and model3"));
                }
            }
            Self::Model2(c) => {
                names(&c.traders, |t| &t.name)?;
                for t in &c.traders {
                    t.spec()?;
                    if let Some(w) = &t.oracle {
                        w.build()?;
                    }
                }
            }
            Self::Model3(c) => {
                names(&c.traders, |t| &t.name)?;
                for t in &c.traders {
                    t.params()?;
                    if let Some(w) = &t.oracle {
                        w.build()?;
                    }
                }
            }
            Self::PilotWave(c) => {
                if c.time.decay_times.is_some() {
                    return Err(CliError::config("time.decay_times is only defined for model2 and model3"));
                }
                if c.wave.is_empty() {
                    return Err(CliError::config("wave needs at least one packet"));
                }
                if c.wave.iter().any(|p| p.sigma.iter().any(|s| !(*s > 0.0))) {
                    return Err(CliError::config("packet widths must be > 0"));
                }
                if !(c.r_floor_rel > 0.0 && c.r_floor_rel < 1.0) {
                    return Err(CliError::config("r_floor_rel must lie in (0, 1)"));
                }
                if c.steps_per_sample == 0 {
                    return Err(CliError::config("steps_per_sample must be ≥ 1"));
                }
                if c.time.n_samples < 2 {
                    return Err(CliError::config("pilotwave needs n_samples ≥ 2"));
                }
            }
        }
        match (self.time().t_max, self.time().decay_times) {
            (Some(_), Some(_)) => Err(CliError::config("give either time.t_max or time.decay_times, not both")),
            (None, None) => Err(CliError::config("time.t_max (or time.decay_times) is required")),
            _ => Ok(()),
        }
    }

    pub fn time(&self) -> &TimeConfig {
        match self {
            Self::Model1(c) => &c.time,
            Self::Model2(c) => &c.time,
            Self::Model3(c) => &c.time,
            Self::PilotWave(c) => &c.time,
        }
    }
}

impl TimeConfig {
    /// Sample times; `decay_time` converts `decay_times` to an end time.
    pub fn grid(&self, decay_time: Option<f64>) -> CliResult<Vec<f64>> {
        let t_max = match (self.t_max, self.decay_times, decay_time) {
            (Some(t), _, _) => t,
            (None, Some(n), Some(tau)) if tau.is_finite() => n * tau,
            (None, Some(_), _) => {
                return Err(CliError::config("decay_times needs a non-zero decay rate (lambda_inf or gamma > 0)"))
            }
            (None, None, _) => return Err(CliError::config("time.t_max is required")),
        };
        Ok(uniform_grid(t_max, self.n_samples)?)
    }
}
