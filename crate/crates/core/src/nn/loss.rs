use super::tensor::Tensor;
use crate::error::ShapeError;

/// Sum over the batch of squared Euclidean distances, with its gradient
/// `2 (pred - target)` with respect to `pred`.
pub fn l2_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor), ShapeError> {
    if pred.shape().len() != 2 {
        return Err(ShapeError::Invalid {
            op: "l2_loss",
            reason: "predictions must be [B, D]",
            shape: pred.shape().to_vec(),
        });
    }
    target.expect_shape("l2_loss target", pred.shape())?;
    let mut loss = 0.0;
    let grad = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d
        })
        .collect();
    Ok((loss, Tensor::new(pred.shape().to_vec(), grad)?))
}
