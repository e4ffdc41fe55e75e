//! Self-describing JSON checkpoints.
//!
//! Values are written in shortest round-trip form, so an `f64` model
//! reloads bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::Normalizer;
use crate::ndiff::{Matrix, Parameters, Real};

use super::network::Network;
use super::spec::{ModelSpec, Variant};
use super::ModelError;

const FORMAT: &str = "coldhardiness-checkpoint";
const VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRecord {
    name: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    precision: String,
    spec: ModelSpec,
    task_names: Vec<String>,
    normalizer: Option<Normalizer>,
    blocks: Vec<BlockRecord>,
}

/// A trained network together with what is needed to run it on raw data.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<S> {
    pub network: Network<S>,
    pub task_names: Vec<String>,
    pub normalizer: Option<Normalizer>,
}

pub fn save_checkpoint<S: Real>(path: &Path, ckpt: &Checkpoint<S>) -> Result<(), ModelError> {
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        precision: S::NAME.into(),
        spec: ckpt.network.spec().clone(),
        task_names: ckpt.task_names.clone(),
        normalizer: ckpt.normalizer.clone(),
        blocks: ckpt
            .network
            .blocks()
            .into_iter()
            .map(|(name, m)| BlockRecord {
                name,
                rows: m.rows(),
                cols: m.cols(),
                values: m.as_slice().iter().map(|v| v.as_f64()).collect(),
            })
            .collect(),
    };
    let text = serde_json::to_string(&file).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

/// Loads a checkpoint, optionally insisting on a particular variant.
pub fn load_checkpoint<S: Real>(
    path: &Path,
    expected: Option<Variant>,
) -> Result<Checkpoint<S>, ModelError> {
    let text = fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    if file.format != FORMAT || file.version != VERSION {
        return Err(ModelError::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            file.format, file.version
        )));
    }
    if let Some(expected) = expected {
        if expected != file.spec.variant {
            return Err(ModelError::VariantMismatch {
                expected,
                found: file.spec.variant,
            });
        }
    }
    let blocks = file
        .blocks
        .into_iter()
        .map(|b| {
            let values = b.values.into_iter().map(S::of).collect();
            Matrix::from_vec(b.rows, b.cols, values).map(|m| (b.name, m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Checkpoint {
        network: Network::from_parts(file.spec, blocks)?,
        task_names: file.task_names,
        normalizer: file.normalizer,
    })
}
