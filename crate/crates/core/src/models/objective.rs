use crate::ndiff::{masked_mse, Matrix, Real};

use super::network::{ForwardCache, Network};
use super::ModelError;

/// One training season: normalized inputs, °C targets and the label mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Example<S> {
    /// `T × input_dim`.
    pub features: Matrix<S>,
    /// `T × 3`; entries under a false mask are ignored.
    pub targets: Matrix<S>,
    /// Row-major `T × 3` label mask.
    pub mask: Vec<bool>,
    pub task: usize,
}

impl<S: Real> Example<S> {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }
}

/// Mean over seasons of each season's masked squared error.
pub fn batch_loss<S: Real>(net: &Network<S>, batch: &[&Example<S>]) -> Result<S, ModelError> {
    Ok(batch_forward(net, batch)?.0)
}

/// [`batch_loss`] together with the forward activations.
pub fn batch_forward<S: Real>(
    net: &Network<S>,
    batch: &[&Example<S>],
) -> Result<(S, ForwardCache<S>), ModelError> {
    let inputs: Vec<&Matrix<S>> = batch.iter().map(|e| &e.features).collect();
    let tasks: Vec<usize> = batch.iter().map(|e| e.task).collect();
    let cache = net.forward(&inputs, &tasks)?;
    let mut total = S::zero();
    for (b, ex) in batch.iter().enumerate() {
        total += masked_mse(&cache.season_output(b), &ex.targets, &ex.mask)?.loss;
    }
    Ok((total / S::of(batch.len() as f64), cache))
}

/// [`batch_loss`] together with its gradient for every parameter block.
pub fn batch_loss_and_grad<S: Real>(
    net: &Network<S>,
    batch: &[&Example<S>],
    heads_only: bool,
) -> Result<(S, Network<S>), ModelError> {
    let inputs: Vec<&Matrix<S>> = batch.iter().map(|e| &e.features).collect();
    let tasks: Vec<usize> = batch.iter().map(|e| e.task).collect();
    let cache = net.forward(&inputs, &tasks)?;
    let scale = S::one() / S::of(batch.len() as f64);
    let out_dim = cache.out.cols();
    let mut dout = Matrix::zeros(cache.out.rows(), out_dim);
    let mut total = S::zero();
    for (b, ex) in batch.iter().enumerate() {
        let l = masked_mse(&cache.season_output(b), &ex.targets, &ex.mask)?;
        total += l.loss;
        let start = b * cache.steps * out_dim;
        for (d, &g) in dout.as_mut_slice()[start..start + l.grad.len()]
            .iter_mut()
            .zip(l.grad.as_slice())
        {
            *d = g * scale;
        }
    }
    let grad = net.backward(&cache, &dout, heads_only);
    Ok((total * scale, grad))
}
