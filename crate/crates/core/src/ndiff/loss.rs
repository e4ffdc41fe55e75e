use super::matrix::Matrix;
use super::{check_shape, NumericError, Real};

/// Loss value and its gradient with respect to the predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedLoss<S> {
    pub loss: S,
    pub grad: Matrix<S>,
    pub count: usize,
}

/// Mean squared error over the masked-in entries only.
///
/// Targets at masked-out positions are never read, so they may hold any
/// value (including NaN). With no masked-in entries the loss and the
/// gradient are zero.
pub fn masked_mse<S: Real>(
    pred: &Matrix<S>,
    target: &Matrix<S>,
    mask: &[bool],
) -> Result<MaskedLoss<S>, NumericError> {
    check_shape("masked_mse target", pred.shape(), target.shape())?;
    check_shape("masked_mse mask", (1, pred.len()), (1, mask.len()))?;

    let count = mask.iter().filter(|&&m| m).count();
    let denom = S::of(count.max(1) as f64);
    let two = S::of(2.0);
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut sum = S::zero();
    for (((g, &p), &t), &m) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(pred.as_slice())
        .zip(target.as_slice())
        .zip(mask)
    {
        if m {
            let e = p - t;
            sum += e * e;
            *g = two * e / denom;
        }
    }
    Ok(MaskedLoss {
        loss: sum / denom,
        grad,
        count,
    })
}
