//! TOML run configuration.
//!
//! Every table is optional and falls back to its defaults; unknown keys are
//! rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baselines::ArConfig;
use crate::dynamics::{Integration, Mode, ModeSchedule, TrendSpec};
use crate::error::{Error, Result};
use crate::pipeline::{ClursnnConfig, ConvergenceSpec, LossKind, LossSpec, ModelKind, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    #[default]
    Lorenz,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// CSV file; required when `kind = "csv"`.
    pub path: Option<PathBuf>,
    /// Value column of the CSV file.
    pub column: String,
    pub modes: Vec<Mode>,
    pub segment_len: usize,
    pub trend: Option<TrendSpec>,
    pub integration: Integration,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Lorenz,
            path: None,
            column: "value".into(),
            modes: Mode::CANONICAL.to_vec(),
            segment_len: ModeSchedule::CANONICAL_SEGMENT_LEN,
            trend: None,
            integration: Integration::default(),
        }
    }
}

impl DatasetConfig {
    pub fn schedule(&self) -> ModeSchedule {
        ModeSchedule::from_modes(&self.modes, self.segment_len)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DatasetKind::Csv => {
                let path = self.path.as_ref().ok_or_else(|| Error::invalid("path", "required for csv datasets"))?;
                if !path.is_file() {
                    return Err(Error::invalid("path", format!("{} is not a readable file", path.display())));
                }
                if self.column.is_empty() {
                    return Err(Error::invalid("column", "must not be empty"));
                }
            }
            DatasetKind::Lorenz => {
                if self.modes.is_empty() {
                    return Err(Error::invalid("modes", "need at least one mode"));
                }
                if self.segment_len == 0 {
                    return Err(Error::invalid("segment_len", "must be >= 1"));
                }
                self.integration.validate()?;
            }
        }
        if let Some(t) = &self.trend {
            t.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    #[default]
    Wass,
    Rmse,
    Ar,
    Naive,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [ModelName::Wass, ModelName::Rmse, ModelName::Ar, ModelName::Naive];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Wass => "wass",
            ModelName::Rmse => "rmse",
            ModelName::Ar => "ar",
            ModelName::Naive => "naive",
        }
    }
}

impl std::str::FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("model", format!("unknown model `{s}` (wass, rmse, ar, naive)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelName,
    /// Rolling loss window, shared by every model's metrics.
    pub window: usize,
    /// Refit threshold; `None` uses the loss-specific default.
    pub threshold: Option<f64>,
    pub spiking: ClursnnConfig,
    pub ar: ArConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelName::Wass,
            window: LossSpec::DEFAULT_WINDOW,
            threshold: None,
            spiking: ClursnnConfig::default(),
            ar: ArConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn loss(&self, kind: LossKind) -> LossSpec {
        let base = match kind {
            LossKind::Rmse => LossSpec::rmse(),
            LossKind::Wasserstein => LossSpec::wasserstein(),
        };
        LossSpec { window: self.window, threshold: self.threshold.unwrap_or(base.threshold), ..base }
    }

    /// The spec of `name` with this config's parameters.
    pub fn spec_for(&self, name: ModelName) -> ModelSpec {
        let kind = match name {
            ModelName::Wass => {
                ModelKind::Clursnn { config: Box::new(self.spiking), loss: self.loss(LossKind::Wasserstein) }
            }
            ModelName::Rmse => ModelKind::Clursnn { config: Box::new(self.spiking), loss: self.loss(LossKind::Rmse) },
            ModelName::Ar => ModelKind::Ar { config: self.ar },
            ModelName::Naive => ModelKind::Naive,
        };
        ModelSpec { name: name.as_str().into(), kind, window: self.window }
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec_for(self.kind)
    }

    pub fn validate(&self) -> Result<()> {
        self.loss(LossKind::Rmse).validate()?;
        self.spiking.validate()?;
        crate::baselines::OnlineAr::new(self.ar)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub evaluation: ConvergenceSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            dataset: DatasetConfig::default(),
            model: ModelConfig::default(),
            evaluation: ConvergenceSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.model.validate()?;
        self.evaluation.validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }
}

/// Parses without touching the filesystem; [`parse_config`] also validates.
pub fn parse_config_unchecked(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg = parse_config_unchecked(text)?;
    cfg.validate()?;
    Ok(cfg)
}
