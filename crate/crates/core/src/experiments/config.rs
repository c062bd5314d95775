//! Scenario configuration file (TOML).
//!
//! Every table and key is optional; omitted values fall back to the
//! built-in defaults. Noise may be given in dBm or in watts, not both.
//!
//! ```toml
//! methods = ["method1", "method2", "equal_power", "non_semantic"]
//!
//! [system]
//! p_max_w = 6.0
//! noise_power_dbm = -90.0
//!
//! [channel]            # or: gains = [1e-9, 2e-9]
//! n_users = 3
//! gain_min = 1e-10
//! gain_max = 1e-8
//! seed = 42
//!
//! [curve]
//! knots = [[1.0, 0.0], [0.8, 100.0], [0.6, 300.0], [0.4, 700.0], [0.2, 1500.0]]
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use super::channel::{generate_channel_gains, ChannelSource, RandomChannelSpec};
use crate::model::{ChannelState, CompLoadCurve, Knot, ModelError, SystemParams};
use crate::solvers::Method;

pub const DEFAULT_NOISE_DBM: f64 = -90.0;
pub const DEFAULT_KNOTS: [[f64; 2]; 5] = [[1.0, 0.0], [0.8, 100.0], [0.6, 300.0], [0.4, 700.0], [0.2, 1500.0]];
pub const DEFAULT_ORACLE_POINTS: usize = 25;

/// Configuration error carrying the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Converts a dBm figure to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub methods: Vec<Method>,
    pub method2_shared_eta: bool,
    pub oracle_points_per_segment: usize,
    pub system: SystemConfig,
    pub channel: ChannelConfig,
    pub curve: CurveConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            methods: vec![Method::Method1, Method::Method2, Method::EqualPower, Method::NonSemantic],
            method2_shared_eta: false,
            oracle_points_per_segment: DEFAULT_ORACLE_POINTS,
            system: SystemConfig::default(),
            channel: ChannelConfig::default(),
            curve: CurveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub bandwidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power_w: Option<f64>,
    pub p_max_w: f64,
    pub p0_w_per_load: f64,
    pub epsilon: f64,
    pub m_beta_samples: usize,
    pub tau_lo_init: f64,
    pub tau_hi_init: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        SystemConfig {
            bandwidth_hz: p.bandwidth_hz,
            noise_power_dbm: None,
            noise_power_w: None,
            p_max_w: p.p_max_w,
            p0_w_per_load: p.p0_w_per_load,
            epsilon: p.epsilon,
            m_beta_samples: p.m_beta_samples,
            tau_lo_init: p.tau_lo_init,
            tau_hi_init: p.tau_hi_init,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    pub knots: Vec<[f64; 2]>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { knots: DEFAULT_KNOTS.to_vec() }
    }
}

/// A fully validated scenario ready to solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub channel: ChannelState,
    pub channel_source: ChannelSource,
    pub curve: CompLoadCurve,
    pub methods: Vec<Method>,
    pub method2_shared_eta: bool,
    pub oracle_points_per_segment: usize,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "<root>".to_string() } else { path };
            ConfigError::new(path, e.into_inner().message().trim().to_string())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        if self.methods.is_empty() {
            return Err(ConfigError::new("methods", "must list at least one method"));
        }
        let params = self.system.resolve()?;
        let channel_source = self.channel.resolve()?;
        let channel = channel_source.build()?;
        let curve = self.curve.resolve()?;
        Ok(Scenario {
            params,
            channel,
            channel_source,
            curve,
            methods: self.methods.clone(),
            method2_shared_eta: self.method2_shared_eta,
            oracle_points_per_segment: self.oracle_points_per_segment,
        })
    }
}

impl SystemConfig {
    pub fn resolve(&self) -> Result<SystemParams, ConfigError> {
        let noise_power_w = match (self.noise_power_dbm, self.noise_power_w) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "system.noise_power_w",
                    "give either noise_power_dbm or noise_power_w, not both",
                ))
            }
            (Some(dbm), None) => dbm_to_watts(dbm),
            (None, Some(w)) => w,
            (None, None) => dbm_to_watts(DEFAULT_NOISE_DBM),
        };
        let params = SystemParams {
            bandwidth_hz: self.bandwidth_hz,
            noise_power_w,
            p_max_w: self.p_max_w,
            p0_w_per_load: self.p0_w_per_load,
            epsilon: self.epsilon,
            m_beta_samples: self.m_beta_samples,
            tau_lo_init: self.tau_lo_init,
            tau_hi_init: self.tau_hi_init,
        };
        params.validate().map_err(|e| match e {
            ModelError::InvalidParam { field, reason } => {
                let field = match field {
                    "noise_power_w" if self.noise_power_w.is_none() => "noise_power_dbm",
                    f => f,
                };
                ConfigError::new(format!("system.{field}"), reason)
            }
            other => ConfigError::new("system", other.to_string()),
        })?;
        Ok(params)
    }
}

impl ChannelConfig {
    pub fn resolve(&self) -> Result<ChannelSource, ConfigError> {
        if let Some(gains) = &self.gains {
            let extra = [
                ("n_users", self.n_users.is_some()),
                ("gain_min", self.gain_min.is_some()),
                ("gain_max", self.gain_max.is_some()),
                ("seed", self.seed.is_some()),
            ];
            if let Some((key, _)) = extra.iter().find(|(_, set)| *set) {
                return Err(ConfigError::new(format!("channel.{key}"), "cannot be combined with explicit gains"));
            }
            if let Some(i) = gains.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
                return Err(ConfigError::new(format!("channel.gains[{i}]"), "gain must be finite and > 0"));
            }
            if gains.is_empty() {
                return Err(ConfigError::new("channel.gains", "must contain at least one gain"));
            }
            return Ok(ChannelSource::Explicit(gains.clone()));
        }
        let d = RandomChannelSpec::default();
        let spec = RandomChannelSpec {
            n_users: self.n_users.unwrap_or(d.n_users),
            gain_min: self.gain_min.unwrap_or(d.gain_min),
            gain_max: self.gain_max.unwrap_or(d.gain_max),
            seed: self.seed.unwrap_or(d.seed),
        };
        // surface bound errors now, with their field path
        generate_channel_gains(&spec)?;
        Ok(ChannelSource::Random(spec))
    }
}

impl CurveConfig {
    pub fn resolve(&self) -> Result<CompLoadCurve, ConfigError> {
        let knots = self.knots.iter().map(|&[eta, load]| Knot::new(eta, load)).collect();
        CompLoadCurve::new(knots).map_err(|e| ConfigError::new("curve.knots", e.to_string()))
    }
}
