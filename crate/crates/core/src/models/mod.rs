//! The backbone, the five architecture variants and the transfer adapters.

pub mod checkpoint;
pub mod finetune;
pub mod network;
pub mod objective;
pub mod spec;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use finetune::{add_derived_task, add_task_head, AlphaInit, FinetuneScope};
pub use network::{embed_combine, ForwardCache, Network};
pub use objective::{batch_forward, batch_loss, batch_loss_and_grad, Example};
pub use spec::{CombineMode, ModelSpec, Variant};

use thiserror::Error;

use crate::ndiff::NumericError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("task id {task} out of range for a model with {n_tasks} tasks")]
    TaskOutOfRange { task: usize, n_tasks: usize },
    #[error("empty batch or mismatched task list")]
    EmptyBatch,
    #[error(transparent)]
    Shape(#[from] NumericError),
    #[error("checkpoint holds a {found} model, expected {expected}")]
    VariantMismatch { expected: Variant, found: Variant },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("{0} is not supported for {1} models")]
    Unsupported(&'static str, Variant),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
