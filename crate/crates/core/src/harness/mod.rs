//! Training, evaluation and the experiment suites.

pub mod evaluate;
pub mod experiments;
pub mod gradcheck;
pub mod report;
pub mod train;

pub use evaluate::{evaluate, predict_season, rmse, ErrorSum};
pub use experiments::{
    run_dataset_size_ablation, run_main_comparison, run_task_subset_ablation,
    run_transfer_experiment, ExperimentConfig, ModelConfig, SizeSpec, Suite,
};
pub use report::{PredictionRow, Report, ResultRow, Table};
pub use train::{fit, train, Precision, TrainConfig};

use thiserror::Error;

use crate::dataio::DataError;
use crate::ferguson::FergusonError;
use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("no labelled test entries")]
    NoTestLabels,
    #[error("no training seasons")]
    NoTrainingData,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Ferguson(#[from] FergusonError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
