//! Run configuration: one TOML document with sections `data`, `model`,
//! `train`, `ferguson_grid` and `experiment`. Every key is optional and
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataio::{CorpusOptions, WeatherColumn};
use crate::ferguson::FergusonGrid;
use crate::harness::{ExperimentConfig, ModelConfig, TrainConfig};
use crate::models::Variant;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// A weather CSV or a directory of them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub features: Vec<WeatherColumn>,
    pub min_seasons: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        let options = CorpusOptions::default();
        Self {
            input: None,
            features: options.features,
            min_seasons: options.min_seasons,
        }
    }
}

impl DataConfig {
    pub fn corpus_options(&self) -> CorpusOptions {
        CorpusOptions {
            features: self.features.clone(),
            min_seasons: self.min_seasons,
        }
    }
}

/// Variant for single-model commands plus the layer sizes used everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub variant: Variant,
    pub fc_dims: [usize; 3],
    pub gru_hidden: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embed_dim: Option<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        let dims = ModelConfig::default();
        Self {
            variant: Variant::MultiH,
            fc_dims: dims.fc_dims,
            gru_hidden: dims.gru_hidden,
            embed_dim: dims.embed_dim,
        }
    }
}

impl ModelSection {
    pub fn dims(&self) -> ModelConfig {
        ModelConfig {
            fc_dims: self.fc_dims,
            gru_hidden: self.gru_hidden,
            embed_dim: self.embed_dim,
        }
    }

    pub fn set_dims(&mut self, dims: &ModelConfig) {
        self.fc_dims = dims.fc_dims;
        self.gru_hidden = dims.gru_hidden;
        self.embed_dim = dims.embed_dim;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelSection,
    pub train: TrainConfig,
    pub ferguson_grid: FergusonGrid,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }
}
