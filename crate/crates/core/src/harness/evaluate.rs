use crate::dataio::{make_example, Normalizer, PreparedSeason};
use crate::models::Network;
use crate::ndiff::{Matrix, Real};

use super::HarnessError;

/// Squared-error sum and count over the present labels of one channel.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorSum {
    pub sum_sq: f64,
    pub count: usize,
}

impl ErrorSum {
    pub fn add(&mut self, pred: f64, label: Option<f64>) {
        if let Some(y) = label {
            self.sum_sq += (pred - y) * (pred - y);
            self.count += 1;
        }
    }

    pub fn merge(&mut self, other: ErrorSum) {
        self.sum_sq += other.sum_sq;
        self.count += other.count;
    }

    pub fn rmse(&self) -> Result<f64, HarnessError> {
        if self.count == 0 {
            return Err(HarnessError::NoTestLabels);
        }
        Ok((self.sum_sq / self.count as f64).sqrt())
    }
}

/// Pooled RMSE between predictions and present labels.
pub fn rmse(preds: &[f64], labels: &[Option<f64>]) -> Result<f64, HarnessError> {
    let mut acc = ErrorSum::default();
    for (p, y) in preds.iter().zip(labels) {
        acc.add(*p, *y);
    }
    acc.rmse()
}

/// Per-day `[LTE10, LTE50, LTE90]` predictions for one season, in °C.
pub fn predict_season<S: Real>(
    net: &Network<S>,
    normalizer: &Normalizer,
    season: &PreparedSeason,
    task: usize,
) -> Result<Matrix<f64>, HarnessError> {
    let ex = make_example::<S>(season, normalizer, task);
    Ok(net.predict(&ex.features, task)?.cast())
}

/// LTE50 RMSE of a network over seasons, pooled across days.
pub fn evaluate<S: Real>(
    net: &Network<S>,
    normalizer: &Normalizer,
    seasons: &[&PreparedSeason],
    task: usize,
) -> Result<ErrorSum, HarnessError> {
    let mut acc = ErrorSum::default();
    for s in seasons {
        let out = predict_season(net, normalizer, s, task)?;
        for (i, y) in s.lte50().enumerate() {
            acc.add(out.get(i, 1), y);
        }
    }
    Ok(acc)
}
