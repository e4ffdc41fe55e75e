//! Ingestion: CSV parsing, season windows, gap filling, filtering,
//! train/test splits and input scaling.

pub mod corpus;
pub mod csvio;
pub mod filter;
pub mod interpolate;
pub mod normalize;
pub mod record;
pub mod season;
pub mod split;

pub use corpus::{
    build_corpus, prepare_season, Corpus, CorpusOptions, Cultivar, IngestLog, NamedRejection,
    PreparedSeason,
};
pub use csvio::{parse_weather_csv, read_weather_dir, read_weather_file, write_weather_csv};
pub use filter::{filter_seasons, Rejection, SeasonRatios};
pub use interpolate::interpolate_missing;
pub use normalize::{make_example, Normalizer};
pub use record::{derive_mean_at, DayRecord, LteChannel, WeatherColumn, N_WEATHER};
pub use season::{extract_seasons, season_length, season_window, Season};
pub use split::{make_trial_splits, CultivarSplit, TrialSplit};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Csv(String),
    #[error("feature {feature} has no values in season {start_year} of cultivar {cultivar}")]
    AllAbsent {
        feature: String,
        cultivar: String,
        start_year: i32,
    },
    #[error("feature {feature} has zero variance on the training data")]
    ZeroVariance { feature: String },
    #[error("cultivar {cultivar} has {found} retained seasons, at least {needed} are needed")]
    InsufficientSeasons {
        cultivar: String,
        found: usize,
        needed: usize,
    },
    #[error("unknown cultivar {0}")]
    UnknownCultivar(String),
    #[error("no data: {0}")]
    Empty(String),
}

impl DataError {
    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        DataError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(line: u64, column: &str, message: impl Into<String>) -> Self {
        DataError::Parse {
            line,
            column: column.to_string(),
            message: message.into(),
        }
    }
}

impl From<csv::Error> for DataError {
    fn from(e: csv::Error) -> Self {
        match e.position() {
            Some(p) => DataError::parse(p.line(), "", e.to_string()),
            None => DataError::Csv(e.to_string()),
        }
    }
}
