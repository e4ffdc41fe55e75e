use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::models::{batch_loss_and_grad, Example, Network};
use crate::ndiff::{adam_step, AdamConfig, AdamState, Real};

use super::HarnessError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    /// Seasons per gradient step.
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            batch_size: 12,
            epochs: 400,
            seed: 0,
            precision: Precision::F64,
        }
    }
}

impl TrainConfig {
    pub const DESK_EPOCHS: usize = 200;

    pub fn desk() -> Self {
        Self {
            epochs: Self::DESK_EPOCHS,
            ..Self::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.batch_size == 0 {
            return Err(HarnessError::Config("batch_size must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(HarnessError::Config("lr must be positive".into()));
        }
        Ok(())
    }
}

/// Minibatch Adam over shuffled seasons.
///
/// Only blocks accepted by `trainable` move. Returns the mean training
/// loss of every epoch. `epochs = 0` leaves the network untouched.
pub fn fit<S: Real>(
    net: &mut Network<S>,
    data: &[Example<S>],
    config: &TrainConfig,
    trainable: &dyn Fn(&str) -> bool,
    heads_only: bool,
) -> Result<Vec<f64>, HarnessError> {
    config.validate()?;
    if data.is_empty() {
        return Err(HarnessError::NoTrainingData);
    }
    let adam = AdamConfig {
        lr: config.lr,
        ..AdamConfig::default()
    };
    let mut state = AdamState::new(&*net, adam);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&Example<S>> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grads) = batch_loss_and_grad(net, &batch, heads_only)?;
            let loss = loss.as_f64();
            if !loss.is_finite() {
                return Err(HarnessError::NonFiniteLoss { epoch, batch: b });
            }
            adam_step(net, &grads, &mut state, trainable).map_err(|e| match e {
                crate::ndiff::NumericError::NonFiniteGradient { .. } => {
                    HarnessError::NonFiniteLoss { epoch, batch: b }
                }
                e => HarnessError::Model(e.into()),
            })?;
            total += loss * chunk.len() as f64;
        }
        curve.push(total / data.len() as f64);
    }
    Ok(curve)
}

/// Trains every block.
pub fn train<S: Real>(
    net: &mut Network<S>,
    data: &[Example<S>],
    config: &TrainConfig,
) -> Result<Vec<f64>, HarnessError> {
    fit(net, data, config, &|_: &str| true, false)
}
