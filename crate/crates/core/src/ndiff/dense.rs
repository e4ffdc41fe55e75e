use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{accumulate_column_sums, add_row_bias, gemm, Matrix};
use super::{check_shape, uniform_init, NumericError, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
}

/// Fully connected layer: `weight` is `out × in`, `bias` is `1 × out`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams<S> {
    pub weight: Matrix<S>,
    pub bias: Matrix<S>,
}

impl<S: Real> DenseParams<S> {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Matrix::zeros(output, input),
            bias: Matrix::zeros(1, output),
        }
    }

    pub fn init<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        Self {
            weight: uniform_init(output, input, input, rng),
            bias: Matrix::zeros(1, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    /// Applies the layer to every row of `x`.
    pub fn forward_rows(&self, x: &Matrix<S>, activation: Activation) -> Matrix<S> {
        let mut y = Matrix::zeros(x.rows(), self.output_dim());
        gemm(
            S::one(),
            x.view(),
            self.weight.view().t(),
            S::zero(),
            y.view_mut(),
        );
        add_row_bias(&mut y, &self.bias);
        if activation == Activation::Relu {
            y.as_mut_slice()
                .iter_mut()
                .for_each(|v| *v = v.max(S::zero()));
        }
        y
    }

    /// Reverse pass for [`forward_rows`](Self::forward_rows).
    ///
    /// `y` is the activated forward output and `dy` the upstream gradient;
    /// `dy` is overwritten with the pre-activation gradient. Parameter
    /// gradients are accumulated into `grad`. Returns the input gradient
    /// when `need_input_grad` is set.
    pub fn backward_rows(
        &self,
        x: &Matrix<S>,
        y: &Matrix<S>,
        dy: &mut Matrix<S>,
        activation: Activation,
        grad: &mut DenseParams<S>,
        need_input_grad: bool,
    ) -> Option<Matrix<S>> {
        if activation == Activation::Relu {
            for (g, &out) in dy.as_mut_slice().iter_mut().zip(y.as_slice()) {
                if out <= S::zero() {
                    *g = S::zero();
                }
            }
        }
        gemm(
            S::one(),
            dy.view().t(),
            x.view(),
            S::one(),
            grad.weight.view_mut(),
        );
        accumulate_column_sums(&mut grad.bias, dy);
        if need_input_grad {
            let mut dx = Matrix::zeros(x.rows(), self.input_dim());
            gemm(
                S::one(),
                dy.view(),
                self.weight.view(),
                S::zero(),
                dx.view_mut(),
            );
            Some(dx)
        } else {
            None
        }
    }

    pub(crate) fn push_blocks<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Matrix<S>)>) {
        out.push((format!("{prefix}.weight"), &self.weight));
        out.push((format!("{prefix}.bias"), &self.bias));
    }

    pub(crate) fn push_blocks_mut<'a>(
        &'a mut self,
        prefix: &str,
        out: &mut Vec<(String, &'a mut Matrix<S>)>,
    ) {
        out.push((format!("{prefix}.weight"), &mut self.weight));
        out.push((format!("{prefix}.bias"), &mut self.bias));
    }
}

/// `activation(W x + b)` for a single input vector.
pub fn dense_forward<S: Real>(
    x: &[S],
    params: &DenseParams<S>,
    activation: Activation,
) -> Result<Vec<S>, NumericError> {
    check_shape("dense input", (1, params.input_dim()), (1, x.len()))?;
    check_shape("dense bias", (1, params.output_dim()), params.bias.shape())?;
    let input = Matrix::row_vector(x.to_vec());
    Ok(params.forward_rows(&input, activation).into_vec())
}
