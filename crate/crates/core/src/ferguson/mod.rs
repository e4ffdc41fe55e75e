//! The scientific baseline: a reconstructed stage-dependent thermal-time
//! model of cold hardiness, tuned per cultivar by exhaustive grid search.

pub mod grid;
pub mod model;

pub use grid::{
    evaluate_grid, format_tuned, grid_search, parse_tuned, rmse, FergusonGrid, GridResult,
    SeasonSeries,
};
pub use model::{
    ferguson_predict, ferguson_step, thermal_time, FergusonParams, FergusonState, Stage,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FergusonError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("grid has no valid point")]
    EmptyGrid,
    #[error("no labelled days to score against")]
    NoLabels,
    #[error("missing mean temperature on day {day}")]
    MissingTemperature { day: usize },
    #[error("grid file: {0}")]
    GridFile(String),
}
