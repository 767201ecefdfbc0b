//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certificate::{CertificateParams, ChiBeta};
use crate::error::{Error, Result};
use crate::model::{validate, ControllerParams, HyperbolicSystem, ProfileSpec};
use crate::monitor::{DEFAULT_C_TOL, DEFAULT_EPS};
use crate::quantizer::QuantizerSpec;
use crate::signals::DisturbanceSpec;
use crate::solver::GridSpec;

pub const DEFAULT_BUDGET: usize = 100_000;
pub const DEFAULT_FIELD_STRIDE: f64 = 0.1;

/// `"search"`, `"none"`, or explicit parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CertificateChoice {
    Keyword(String),
    Explicit(CertificateParams),
}

impl Default for CertificateChoice {
    fn default() -> Self {
        CertificateChoice::Keyword("search".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_stride")]
    pub field_stride: f64,
}

fn default_stride() -> f64 {
    DEFAULT_FIELD_STRIDE
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            field_stride: DEFAULT_FIELD_STRIDE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Compatibility,
    Sandwich,
    Dissipation,
    Dss,
    Iss,
    InvariantSets,
    /// `max_z|X|` falls below 10⁻³ of its initial value within the horizon.
    Decay,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Compatibility,
        CheckName::Sandwich,
        CheckName::Dissipation,
        CheckName::Dss,
        CheckName::Iss,
        CheckName::InvariantSets,
        CheckName::Decay,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Compatibility => "compatibility",
            CheckName::Sandwich => "sandwich",
            CheckName::Dissipation => "dissipation",
            CheckName::Dss => "dss",
            CheckName::Iss => "iss",
            CheckName::InvariantSets => "invariant_sets",
            CheckName::Decay => "decay",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown check `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub system: HyperbolicSystem,
    pub controller: ControllerParams,
    #[serde(default)]
    pub certificate: CertificateChoice,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub chi_beta: ChiBeta,
    pub initial: ProfileSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<QuantizerSpec>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckName>>,
    /// Added to the disturbance seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_c_tol")]
    pub c_tol: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_c_tol() -> f64 {
    DEFAULT_C_TOL
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.name.is_empty() {
            cfg.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if let Some(v) = validate(&self.system, &self.controller).first() {
            return Err(Error::Config(v.to_string()));
        }
        if self.disturbance.is_some() && self.quantizer.is_some() {
            return Err(Error::Config("give either a disturbance or a quantizer, not both".into()));
        }
        if let Some(q) = &self.quantizer {
            q.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let CertificateChoice::Keyword(k) = &self.certificate {
            if k != "search" && k != "none" {
                return Err(Error::Config(format!("certificate must be \"search\", \"none\" or explicit, got `{k}`")));
            }
        }
        if self.search.budget == 0 {
            return Err(Error::Config("search budget must be at least 1".into()));
        }
        if !(self.output.field_stride > 0.0) {
            return Err(Error::Config("field_stride must be positive".into()));
        }
        if !(self.eps > 0.0) || !(self.c_tol >= 0.0) {
            return Err(Error::Config("eps must be positive and c_tol nonnegative".into()));
        }
        Ok(())
    }

    /// Requested checks, or the defaults for the measurement kind.
    pub fn checks(&self) -> Vec<CheckName> {
        match &self.checks {
            Some(c) => c.clone(),
            None if self.quantizer.is_some() => vec![
                CheckName::Compatibility,
                CheckName::Sandwich,
                CheckName::InvariantSets,
            ],
            None => vec![
                CheckName::Compatibility,
                CheckName::Sandwich,
                CheckName::Dissipation,
                CheckName::Dss,
                CheckName::Iss,
            ],
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(if self.name.is_empty() { "run" } else { &self.name }))
    }

    pub fn disturbance_spec(&self) -> DisturbanceSpec {
        let mut d = self.disturbance.clone().unwrap_or_default();
        d.seed = d.seed.wrapping_add(self.seed);
        d
    }
}
