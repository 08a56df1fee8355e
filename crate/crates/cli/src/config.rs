//! Scenario configuration: a JSON file overlaid with command-line flags.

use std::path::Path;

use nongauss::conditional_state::GridSpec;
use nongauss::spectral_modes::DEFAULT_KMAX_CAP;
use nongauss::{ScenarioInputs, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const KMAX_CAP_ENV: &str = "NONGAUSS_KMAX_CAP";

pub const DEFAULT_BT: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 0.35;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 10e6;
pub const DEFAULT_TAU: f64 = 0.9;
pub const DEFAULT_ETA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub nx: Option<usize>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub np: Option<usize>,
}

/// Everything a run can be configured with. All fields optional; unset
/// fields take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scheme: Option<Scheme>,
    pub bt: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub duration_s: Option<f64>,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub eta: Option<f64>,
    pub dark_rate: Option<f64>,
    pub k_max: Option<usize>,
    #[serde(default)]
    pub grid: GridConfig,
    pub format: Option<Format>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(self, other: ScenarioConfig) -> Self {
        Self {
            scheme: other.scheme.or(self.scheme),
            bt: other.bt.or(self.bt),
            bandwidth_hz: other.bandwidth_hz.or(self.bandwidth_hz),
            duration_s: other.duration_s.or(self.duration_s),
            gamma: other.gamma.or(self.gamma),
            tau: other.tau.or(self.tau),
            eta: other.eta.or(self.eta),
            dark_rate: other.dark_rate.or(self.dark_rate),
            k_max: other.k_max.or(self.k_max),
            grid: GridConfig {
                x_min: other.grid.x_min.or(self.grid.x_min),
                x_max: other.grid.x_max.or(self.grid.x_max),
                nx: other.grid.nx.or(self.grid.nx),
                p_min: other.grid.p_min.or(self.grid.p_min),
                p_max: other.grid.p_max.or(self.grid.p_max),
                np: other.grid.np.or(self.grid.np),
            },
            format: other.format.or(self.format),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.bt.is_some() && self.duration_s.is_some() {
            return Err(CliError::Usage(
                "give either bt or a gate duration (with bandwidth), not both".into(),
            ));
        }
        let nonneg = [
            ("bt", self.bt),
            ("bandwidth_hz", self.bandwidth_hz),
            ("duration_s", self.duration_s),
            ("gamma", self.gamma),
            ("dark_rate", self.dark_rate),
        ];
        for (name, v) in nonneg {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(CliError::Usage(format!("{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        for (name, v) in [("tau", self.tau), ("eta", self.eta)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(CliError::Usage(format!("{name} must lie in [0, 1], got {v}")));
                }
            }
        }
        if let Some(b) = self.bandwidth_hz {
            if b == 0.0 {
                return Err(CliError::Usage("bandwidth_hz must be > 0".into()));
            }
        }
        if self.duration_s == Some(0.0) {
            return Err(CliError::Usage("duration_s must be > 0".into()));
        }
        Ok(())
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth_hz.unwrap_or(DEFAULT_BANDWIDTH_HZ)
    }

    /// bt as given, or B·T when a duration was given instead.
    pub fn resolved_bt(&self) -> f64 {
        match (self.bt, self.duration_s) {
            (Some(bt), _) => bt,
            (None, Some(t)) => self.bandwidth() * t,
            (None, None) => DEFAULT_BT,
        }
    }

    pub fn bt_was_given(&self) -> bool {
        self.bt.is_some() || self.duration_s.is_some()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn grid(&self) -> GridSpec {
        let d = GridSpec::default();
        GridSpec {
            x_min: self.grid.x_min.unwrap_or(d.x_min),
            x_max: self.grid.x_max.unwrap_or(d.x_max),
            nx: self.grid.nx.unwrap_or(d.nx),
            p_min: self.grid.p_min.unwrap_or(d.p_min),
            p_max: self.grid.p_max.unwrap_or(d.p_max),
            np: self.grid.np.unwrap_or(d.np),
        }
    }

    /// Scenario at an explicit bt, overriding whatever bt/duration was configured.
    pub fn inputs_at(&self, bt: f64, kmax_cap: usize) -> ScenarioInputs {
        let duration_s = if bt == 0.0 { self.duration_s } else { None };
        ScenarioInputs {
            scheme: self.scheme.unwrap_or(Scheme::CwFiltered),
            bt,
            bandwidth_hz: self.bandwidth(),
            duration_s,
            gamma: self.gamma.unwrap_or(DEFAULT_GAMMA),
            tau: self.tau.unwrap_or(DEFAULT_TAU),
            eta: self.eta.unwrap_or(DEFAULT_ETA),
            dark_rate: self.dark_rate.unwrap_or(0.0),
            kmax_cap,
        }
    }

    pub fn inputs(&self, kmax_cap: usize) -> ScenarioInputs {
        let mut inputs = self.inputs_at(self.resolved_bt(), kmax_cap);
        inputs.duration_s = self.duration_s;
        inputs
    }
}

/// Safety cap on weighted modes, from the environment or the default.
pub fn kmax_cap() -> Result<usize, CliError> {
    match std::env::var(KMAX_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{KMAX_CAP_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_KMAX_CAP),
    }
}

/// Number of weighted modes allowed for this run.
pub fn effective_kmax(cfg: &ScenarioConfig) -> Result<usize, CliError> {
    let cap = kmax_cap()?;
    match cfg.k_max {
        Some(0) => Err(CliError::Usage("k_max must be >= 1".into())),
        Some(k) if k > cap => Err(CliError::Usage(format!(
            "k_max {k} exceeds the safety cap {cap} (raise it with {KMAX_CAP_ENV})"
        ))),
        Some(k) => Ok(k),
        None => Ok(cap),
    }
}
