use rand::Rng;

use super::matrix::{accumulate_column_sums, add_row_bias, gemm, Matrix};
use super::{check_shape, sigmoid, uniform_init, NumericError, Real};

/// GRU parameters with the three gates stacked in `z, r, n` order.
///
/// `w_input` is `3h × in`, `w_hidden` is `3h × h`, `b_input` is `1 × 3h`
/// (`b_z, b_r, b_n`) and `b_hidden_n` is the separate `1 × h` recurrent
/// bias of the candidate gate:
///
/// ```text
/// z = σ(W_z x + b_z + U_z h)
/// r = σ(W_r x + b_r + U_r h)
/// n = tanh(W_n x + b_n + r ⊙ (U_n h + b_hn))
/// h' = (1 - z) ⊙ n + z ⊙ h
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct GruParams<S> {
    pub w_input: Matrix<S>,
    pub w_hidden: Matrix<S>,
    pub b_input: Matrix<S>,
    pub b_hidden_n: Matrix<S>,
}

impl<S: Real> GruParams<S> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_input: Matrix::zeros(3 * hidden, input),
            w_hidden: Matrix::zeros(3 * hidden, hidden),
            b_input: Matrix::zeros(1, 3 * hidden),
            b_hidden_n: Matrix::zeros(1, hidden),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            w_input: uniform_init(3 * hidden, input, input, rng),
            w_hidden: uniform_init(3 * hidden, hidden, hidden, rng),
            b_input: Matrix::zeros(1, 3 * hidden),
            b_hidden_n: Matrix::zeros(1, hidden),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_hidden.cols()
    }

    fn check(&self) -> Result<(), NumericError> {
        let h = self.hidden_dim();
        check_shape(
            "gru w_input",
            (3 * h, self.input_dim()),
            self.w_input.shape(),
        )?;
        check_shape("gru w_hidden", (3 * h, h), self.w_hidden.shape())?;
        check_shape("gru b_input", (1, 3 * h), self.b_input.shape())?;
        check_shape("gru b_hidden_n", (1, h), self.b_hidden_n.shape())
    }

    /// Unrolls the cell over `batch` sequences of `steps` days each.
    ///
    /// Rows of `x` are batch-major: row `b * steps + t` is day `t` of
    /// sequence `b`. Every sequence starts from a zero hidden state.
    pub fn forward_sequence(&self, x: &Matrix<S>, batch: usize, steps: usize) -> GruCache<S> {
        let h = self.hidden_dim();
        let rows = batch * steps;
        assert_eq!(x.rows(), rows, "gru input rows");

        let mut gx = Matrix::zeros(rows, 3 * h);
        gemm(
            S::one(),
            x.view(),
            self.w_input.view().t(),
            S::zero(),
            gx.view_mut(),
        );
        add_row_bias(&mut gx, &self.b_input);

        let mut cache = GruCache {
            batch,
            steps,
            z: Matrix::zeros(rows, h),
            r: Matrix::zeros(rows, h),
            n: Matrix::zeros(rows, h),
            hidden_n: Matrix::zeros(rows, h),
            h: Matrix::zeros(rows, h),
        };
        let mut gh = Matrix::zeros(batch, 3 * h);
        let b_hn = self.b_hidden_n.as_slice();

        for t in 0..steps {
            if t > 0 {
                gemm(
                    S::one(),
                    cache.h.strided_rows(t - 1, steps, batch),
                    self.w_hidden.view().t(),
                    S::zero(),
                    gh.view_mut(),
                );
            }
            for b in 0..batch {
                let i = b * steps + t;
                let gxr = gx.row(i);
                let ghr = gh.row(b);
                for j in 0..h {
                    let h_prev = if t > 0 {
                        cache.h.get(i - 1, j)
                    } else {
                        S::zero()
                    };
                    let z = sigmoid(gxr[j] + ghr[j]);
                    let r = sigmoid(gxr[h + j] + ghr[h + j]);
                    let hn = ghr[2 * h + j] + b_hn[j];
                    let n = (gxr[2 * h + j] + r * hn).tanh();
                    cache.z.set(i, j, z);
                    cache.r.set(i, j, r);
                    cache.n.set(i, j, n);
                    cache.hidden_n.set(i, j, hn);
                    cache.h.set(i, j, (S::one() - z) * n + z * h_prev);
                }
            }
        }
        cache
    }

    /// Backpropagation through time for [`forward_sequence`](Self::forward_sequence).
    ///
    /// `dh` holds the upstream gradient for every hidden output. Parameter
    /// gradients are accumulated into `grad`; the input gradient is returned
    /// when requested.
    pub fn backward_sequence(
        &self,
        x: &Matrix<S>,
        cache: &GruCache<S>,
        dh: &Matrix<S>,
        grad: &mut GruParams<S>,
        need_input_grad: bool,
    ) -> Option<Matrix<S>> {
        let h = self.hidden_dim();
        let (batch, steps) = (cache.batch, cache.steps);
        let rows = batch * steps;

        let mut dgx = Matrix::zeros(rows, 3 * h);
        let mut dgh_all = Matrix::zeros(rows, 3 * h);
        let mut carry = Matrix::zeros(batch, h);
        let one = S::one();

        for t in (0..steps).rev() {
            for b in 0..batch {
                let i = b * steps + t;
                for j in 0..h {
                    let d = dh.get(i, j) + carry.get(b, j);
                    let h_prev = if t > 0 {
                        cache.h.get(i - 1, j)
                    } else {
                        S::zero()
                    };
                    let z = cache.z.get(i, j);
                    let r = cache.r.get(i, j);
                    let n = cache.n.get(i, j);
                    let hn = cache.hidden_n.get(i, j);

                    let dz = d * (h_prev - n);
                    let dn = d * (one - z);
                    let dn_pre = dn * (one - n * n);
                    let dr_pre = dn_pre * hn * r * (one - r);
                    let dz_pre = dz * z * (one - z);

                    dgx.set(i, j, dz_pre);
                    dgx.set(i, h + j, dr_pre);
                    dgx.set(i, 2 * h + j, dn_pre);
                    dgh_all.set(i, j, dz_pre);
                    dgh_all.set(i, h + j, dr_pre);
                    dgh_all.set(i, 2 * h + j, dn_pre * r);
                    carry.set(b, j, d * z);
                }
            }
            if t > 0 {
                gemm(
                    S::one(),
                    dgh_all.strided_rows(t, steps, batch),
                    self.w_hidden.view(),
                    S::one(),
                    carry.view_mut(),
                );
            }
        }

        // Recurrent weights see h_{t-1}; day 0 of every sequence sees zeros.
        let mut h_prev = Matrix::zeros(rows, h);
        for b in 0..batch {
            for t in 1..steps {
                let src = cache.h.row(b * steps + t - 1).to_vec();
                h_prev.row_mut(b * steps + t).copy_from_slice(&src);
            }
        }
        gemm(
            S::one(),
            dgh_all.view().t(),
            h_prev.view(),
            S::one(),
            grad.w_hidden.view_mut(),
        );
        let mut dhn_sum = Matrix::zeros(1, h);
        {
            let view = dgh_all.column_block(2 * h, h);
            for i in 0..rows {
                for j in 0..h {
                    let v = dhn_sum.get(0, j) + view.get(i, j);
                    dhn_sum.set(0, j, v);
                }
            }
        }
        for (g, &v) in grad
            .b_hidden_n
            .as_mut_slice()
            .iter_mut()
            .zip(dhn_sum.as_slice())
        {
            *g += v;
        }

        gemm(
            S::one(),
            dgx.view().t(),
            x.view(),
            S::one(),
            grad.w_input.view_mut(),
        );
        accumulate_column_sums(&mut grad.b_input, &dgx);

        if need_input_grad {
            let mut dx = Matrix::zeros(rows, self.input_dim());
            gemm(
                S::one(),
                dgx.view(),
                self.w_input.view(),
                S::zero(),
                dx.view_mut(),
            );
            Some(dx)
        } else {
            None
        }
    }

    pub(crate) fn push_blocks<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Matrix<S>)>) {
        out.push((format!("{prefix}.w_input"), &self.w_input));
        out.push((format!("{prefix}.w_hidden"), &self.w_hidden));
        out.push((format!("{prefix}.b_input"), &self.b_input));
        out.push((format!("{prefix}.b_hidden_n"), &self.b_hidden_n));
    }

    pub(crate) fn push_blocks_mut<'a>(
        &'a mut self,
        prefix: &str,
        out: &mut Vec<(String, &'a mut Matrix<S>)>,
    ) {
        out.push((format!("{prefix}.w_input"), &mut self.w_input));
        out.push((format!("{prefix}.w_hidden"), &mut self.w_hidden));
        out.push((format!("{prefix}.b_input"), &mut self.b_input));
        out.push((format!("{prefix}.b_hidden_n"), &mut self.b_hidden_n));
    }
}

/// Activations recorded by [`GruParams::forward_sequence`].
#[derive(Clone, Debug)]
pub struct GruCache<S> {
    pub batch: usize,
    pub steps: usize,
    pub z: Matrix<S>,
    pub r: Matrix<S>,
    pub n: Matrix<S>,
    /// `U_n h_{t-1} + b_hn`, needed by the reset-gate gradient.
    pub hidden_n: Matrix<S>,
    pub h: Matrix<S>,
}

/// One GRU update for a single input vector.
pub fn gru_step<S: Real>(
    x: &[S],
    h_prev: &[S],
    params: &GruParams<S>,
) -> Result<Vec<S>, NumericError> {
    params.check()?;
    let h = params.hidden_dim();
    check_shape("gru input", (1, params.input_dim()), (1, x.len()))?;
    check_shape("gru hidden state", (1, h), (1, h_prev.len()))?;

    let dot = |m: &Matrix<S>, row: usize, v: &[S]| -> S {
        m.row(row).iter().zip(v).map(|(&a, &b)| a * b).sum()
    };
    let b_in = params.b_input.as_slice();
    let b_hn = params.b_hidden_n.as_slice();
    let mut out = Vec::with_capacity(h);
    for j in 0..h {
        let z = sigmoid(dot(&params.w_input, j, x) + b_in[j] + dot(&params.w_hidden, j, h_prev));
        let r = sigmoid(
            dot(&params.w_input, h + j, x) + b_in[h + j] + dot(&params.w_hidden, h + j, h_prev),
        );
        let hn = dot(&params.w_hidden, 2 * h + j, h_prev) + b_hn[j];
        let n = (dot(&params.w_input, 2 * h + j, x) + b_in[2 * h + j] + r * hn).tanh();
        out.push((S::one() - z) * n + z * h_prev[j]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_halve_the_state() {
        let p = GruParams::<f64>::zeros(2, 3);
        let h = gru_step(&[0.7, -1.2], &[1.0, -2.0, 0.5], &p).unwrap();
        assert_eq!(h, vec![0.5, -1.0, 0.25]);
    }

    #[test]
    fn zero_state_is_fixed_point_of_zero_params() {
        let p = GruParams::<f64>::zeros(2, 3);
        assert_eq!(gru_step(&[0.7, -1.2], &[0.0; 3], &p).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn saturated_update_gate_keeps_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = GruParams::<f64>::init(4, 3, &mut rng);
        for j in 0..3 {
            p.b_input.set(0, j, 40.0);
        }
        let prev = [0.3, -0.8, 0.95];
        let h = gru_step(&[1.0, -1.0, 0.5, 2.0], &prev, &p).unwrap();
        for (a, b) in h.iter().zip(prev) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn sequence_forward_matches_repeated_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = GruParams::<f64>::init(3, 4, &mut rng);
        let (batch, steps) = (2, 5);
        let x = Matrix::from_fn(batch * steps, 3, |r, c| {
            ((r * 7 + c * 3) % 11) as f64 / 5.0 - 1.0
        });
        let cache = p.forward_sequence(&x, batch, steps);
        for b in 0..batch {
            let mut h = vec![0.0; 4];
            for t in 0..steps {
                h = gru_step(x.row(b * steps + t), &h, &p).unwrap();
                for j in 0..4 {
                    assert!((cache.h.get(b * steps + t, j) - h[j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let p = GruParams::<f64>::zeros(2, 3);
        assert!(gru_step(&[0.0, 0.0], &[0.0; 2], &p).is_err());
    }

    proptest! {
        #[test]
        fn step_output_is_bounded(
            seed in 0u64..1000,
            x in proptest::collection::vec(-5.0f64..5.0, 3),
            prev in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = GruParams::<f64>::init(3, 4, &mut rng);
            let h = gru_step(&x, &prev, &p).unwrap();
            for (hj, pj) in h.iter().zip(&prev) {
                prop_assert!(hj.abs() <= pj.abs().max(1.0) + 1e-12);
            }
        }
    }
}
