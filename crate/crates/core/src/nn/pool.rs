use super::tensor::Tensor;
use crate::error::ShapeError;

/// 2x2, stride-2 max pooling over `[C,H,W]`. Returns the pooled tensor and,
/// per output element, the flat input index of its maximum (first maximum in
/// row-major order on ties).
pub fn maxpool2x2_forward(input: &Tensor) -> Result<(Tensor, Vec<u32>), ShapeError> {
    let &[c, h, w] = input.shape() else {
        return Err(ShapeError::Invalid {
            op: "maxpool2x2",
            reason: "input must be [C,H,W]",
            shape: input.shape().to_vec(),
        });
    };
    if h % 2 != 0 || w % 2 != 0 || h == 0 || w == 0 {
        return Err(ShapeError::Invalid {
            op: "maxpool2x2",
            reason: "height and width must be even",
            shape: input.shape().to_vec(),
        });
    }
    let (ho, wo) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(c * ho * wo);
    let mut argmax = Vec::with_capacity(c * ho * wo);
    for ch in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let base = (ch * h + 2 * oy) * w + 2 * ox;
                let mut best = base;
                for cand in [base + 1, base + w, base + w + 1] {
                    if x[cand] > x[best] {
                        best = cand;
                    }
                }
                out.push(x[best]);
                argmax.push(best as u32);
            }
        }
    }
    let pooled = Tensor::new(vec![c, ho, wo], out).expect("sized from input");
    Ok((pooled, argmax))
}

/// Routes each upstream value to the position that won the forward max.
pub fn maxpool2x2_backward(
    upstream: &Tensor,
    argmax: &[u32],
    input_shape: &[usize],
) -> Result<Tensor, ShapeError> {
    if upstream.len() != argmax.len() || input_shape.iter().product::<usize>() != 4 * argmax.len() {
        return Err(ShapeError::Mismatch {
            op: "maxpool2x2 backward",
            expected: vec![argmax.len()],
            actual: upstream.shape().to_vec(),
        });
    }
    let mut dx = Tensor::zeros(input_shape.to_vec());
    let d = dx.data_mut();
    for (&i, &g) in argmax.iter().zip(upstream.data()) {
        d[i as usize] += g;
    }
    Ok(dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testing::{check_gradients, random_tensor};

    #[test]
    fn picks_window_maximum() {
        let x = Tensor::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, arg) = maxpool2x2_forward(&x).unwrap();
        assert_eq!(y.data(), &[4.0]);
        let dx = maxpool2x2_backward(&Tensor::new(vec![1, 1, 1], vec![1.0]).unwrap(), &arg, &[1, 2, 2]).unwrap();
        assert_eq!(dx.data(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn ties_go_to_first_maximum() {
        let x = Tensor::new(vec![1, 2, 2], vec![0.0, 5.0, 5.0, 5.0]).unwrap();
        let (_, arg) = maxpool2x2_forward(&x).unwrap();
        assert_eq!(arg, vec![1]);
    }

    #[test]
    fn odd_sizes_rejected() {
        assert!(maxpool2x2_forward(&Tensor::zeros(vec![1, 3, 4])).is_err());
        assert!(maxpool2x2_forward(&Tensor::zeros(vec![4, 4])).is_err());
    }

    #[test]
    fn finite_difference_agreement() {
        // Continuous random inputs have no exact ties.
        for seed in 0..10 {
            let x = random_tensor(vec![3, 6, 8], seed);
            let proj = random_tensor(vec![3, 3, 4], seed + 50);
            let loss = |t: &Tensor| -> f64 {
                let (y, _) = maxpool2x2_forward(t).unwrap();
                y.data().iter().zip(proj.data()).map(|(a, p)| a * p).sum()
            };
            let (_, arg) = maxpool2x2_forward(&x).unwrap();
            let dx = maxpool2x2_backward(&proj, &arg, x.shape()).unwrap();
            check_gradients(&x, &dx, loss);
        }
    }
}
