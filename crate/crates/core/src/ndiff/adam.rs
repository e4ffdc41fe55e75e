use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::{NumericError, Parameters, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment buffers for every parameter block, in block order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<S> {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<Matrix<S>>,
    pub second_moment: Vec<Matrix<S>>,
}

impl<S: Real> AdamState<S> {
    pub fn new<P: Parameters<S>>(params: &P, config: AdamConfig) -> Self {
        let shapes: Vec<_> = params.blocks().iter().map(|(_, m)| m.shape()).collect();
        Self {
            config,
            step: 0,
            first_moment: shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect(),
            second_moment: shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect(),
        }
    }
}

/// One bias-corrected Adam update of every block accepted by `trainable`.
///
/// Rejected blocks keep their values and moment buffers untouched. All
/// trainable gradients are checked for finiteness before anything is
/// modified.
pub fn adam_step<S: Real, P: Parameters<S>>(
    params: &mut P,
    grads: &P,
    state: &mut AdamState<S>,
    trainable: impl Fn(&str) -> bool,
) -> Result<(), NumericError> {
    let grad_blocks = grads.blocks();
    let mut param_blocks = params.blocks_mut();
    if param_blocks.len() != grad_blocks.len() || state.first_moment.len() != grad_blocks.len() {
        return Err(NumericError::BlockCount {
            params: param_blocks.len(),
            grads: grad_blocks.len(),
        });
    }
    for ((name, p), (_, g)) in param_blocks.iter().zip(&grad_blocks) {
        if p.shape() != g.shape() {
            return Err(NumericError::ShapeMismatch {
                context: format!("adam block `{name}`"),
                expected: p.shape(),
                actual: g.shape(),
            });
        }
        if trainable(name) && !g.is_finite() {
            return Err(NumericError::NonFiniteGradient {
                block: name.clone(),
            });
        }
    }

    state.step += 1;
    let cfg = state.config;
    let t = state.step as i32;
    let b1 = S::of(cfg.beta1);
    let b2 = S::of(cfg.beta2);
    let one = S::one();
    let bias1 = S::of(1.0 - cfg.beta1.powi(t));
    let bias2 = S::of(1.0 - cfg.beta2.powi(t));
    let lr = S::of(cfg.lr);
    let eps = S::of(cfg.eps);

    for (idx, ((name, p), (_, g))) in param_blocks.iter_mut().zip(&grad_blocks).enumerate() {
        if !trainable(name) {
            continue;
        }
        let m = state.first_moment[idx].as_mut_slice();
        let v = state.second_moment[idx].as_mut_slice();
        for (((theta, &gi), mi), vi) in p.as_mut_slice().iter_mut().zip(g.as_slice()).zip(m).zip(v)
        {
            *mi = b1 * *mi + (one - b1) * gi;
            *vi = b2 * *vi + (one - b2) * gi * gi;
            let m_hat = *mi / bias1;
            let v_hat = *vi / bias2;
            *theta -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
