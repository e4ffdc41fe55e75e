//! Minimal differentiable numeric core.
//!
//! Only what the fixed architecture family needs: dense layers, a GRU
//! cell unrolled over whole seasons, a masked squared-error loss, Adam,
//! and a central-difference gradient checker. Forward passes keep the
//! activations needed for the hand-written reverse pass.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod gru;
pub mod loss;
pub mod matrix;
pub mod scalar;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{dense_forward, Activation, DenseParams};
pub use gradcheck::{
    grad_check, grad_check_piecewise, BlockCheck, GradCheckOptions, GradCheckReport,
};
pub use gru::{gru_step, GruCache, GruParams};
pub use loss::{masked_mse, MaskedLoss};
pub use matrix::{gemm, Matrix, View, ViewMut};
pub use scalar::{sigmoid, Real};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("{context}: shape mismatch, expected {expected:?} but got {actual:?}")]
    ShapeMismatch {
        context: String,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("buffer of length {len} cannot hold a {rows}x{cols} matrix")]
    BufferLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("non-finite gradient in parameter block `{block}`")]
    NonFiniteGradient { block: String },
    #[error("parameter block count mismatch: {params} parameter blocks, {grads} gradient blocks")]
    BlockCount { params: usize, grads: usize },
}

pub(crate) fn check_shape(
    context: &str,
    expected: (usize, usize),
    actual: (usize, usize),
) -> Result<(), NumericError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NumericError::ShapeMismatch {
            context: context.to_string(),
            expected,
            actual,
        })
    }
}

/// A collection of named parameter blocks in a fixed order.
///
/// Gradients use the same type as the parameters they belong to, so the
/// block lists of a parameter set and its gradient line up index by index.
pub trait Parameters<S: Real> {
    fn blocks(&self) -> Vec<(String, &Matrix<S>)>;
    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix<S>)>;

    fn parameter_count(&self) -> usize {
        self.blocks().iter().map(|(_, m)| m.len()).sum()
    }

    fn zero_(&mut self) {
        for (_, m) in self.blocks_mut() {
            m.fill(S::zero());
        }
    }

    /// `self += scale * other`, block by block.
    fn add_scaled_(&mut self, other: &Self, scale: S) {
        let others = other.blocks();
        for ((_, m), (_, o)) in self.blocks_mut().into_iter().zip(others) {
            for (x, &y) in m.as_mut_slice().iter_mut().zip(o.as_slice()) {
                *x += scale * y;
            }
        }
    }
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
pub fn uniform_init<S: Real, R: Rng>(
    rows: usize,
    cols: usize,
    fan_in: usize,
    rng: &mut R,
) -> Matrix<S> {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| S::of(rng.gen_range(-bound..bound)))
}
