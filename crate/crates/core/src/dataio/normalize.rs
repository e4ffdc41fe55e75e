use serde::{Deserialize, Serialize};

use crate::models::Example;
use crate::ndiff::{Matrix, Real};

use super::corpus::PreparedSeason;
use super::record::WeatherColumn;
use super::DataError;

/// Per-feature z-score with population variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub features: Vec<WeatherColumn>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Normalizer {
    /// Statistics over every day of every given season.
    pub fn fit(features: &[WeatherColumn], seasons: &[&PreparedSeason]) -> Result<Self, DataError> {
        let f = features.len();
        let mut n = 0usize;
        let mut sum = vec![0.0; f];
        for s in seasons {
            for i in 0..s.features.rows() {
                for (acc, v) in sum.iter_mut().zip(s.features.row(i)) {
                    *acc += v;
                }
            }
            n += s.features.rows();
        }
        if n == 0 {
            return Err(DataError::Empty(
                "no training days to fit the normalizer".into(),
            ));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let mut sq = vec![0.0; f];
        for s in seasons {
            for i in 0..s.features.rows() {
                for ((acc, v), m) in sq.iter_mut().zip(s.features.row(i)).zip(&mean) {
                    *acc += (v - m) * (v - m);
                }
            }
        }
        let sd: Vec<f64> = sq.iter().map(|q| (q / n as f64).sqrt()).collect();
        for ((column, &s), &m) in features.iter().zip(&sd).zip(&mean) {
            if !(s > 1e-12 * m.abs().max(1.0)) {
                return Err(DataError::ZeroVariance {
                    feature: column.header().to_string(),
                });
            }
        }
        Ok(Self {
            features: features.to_vec(),
            mean,
            sd,
        })
    }

    pub fn apply(&self, raw: &Matrix<f64>) -> Matrix<f64> {
        Matrix::from_fn(raw.rows(), raw.cols(), |i, j| {
            (raw.get(i, j) - self.mean[j]) / self.sd[j]
        })
    }

    pub fn invert(&self, scaled: &Matrix<f64>) -> Matrix<f64> {
        Matrix::from_fn(scaled.rows(), scaled.cols(), |i, j| {
            scaled.get(i, j) * self.sd[j] + self.mean[j]
        })
    }
}

/// Scaled inputs plus °C targets and the per-channel label mask.
pub fn make_example<S: Real>(
    season: &PreparedSeason,
    normalizer: &Normalizer,
    task: usize,
) -> Example<S> {
    let t = season.len();
    let mut targets = Matrix::zeros(t, 3);
    let mut mask = vec![false; t * 3];
    for (i, labels) in season.lte.iter().enumerate() {
        for (c, v) in labels.iter().enumerate() {
            if let Some(v) = v {
                targets.set(i, c, S::of(*v));
                mask[i * 3 + c] = true;
            }
        }
    }
    Example {
        features: normalizer.apply(&season.features).cast(),
        targets,
        mask,
        task,
    }
}
