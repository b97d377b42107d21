use super::tensor::Tensor;
use crate::error::ShapeError;

pub fn tanh_forward(input: &Tensor) -> Tensor {
    let data = input.data().iter().map(|v| v.tanh()).collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape")
}

/// `upstream * (1 - y^2)` where `y` is the forward output.
pub fn tanh_backward(upstream: &Tensor, output: &Tensor) -> Result<Tensor, ShapeError> {
    upstream.expect_shape("tanh backward", output.shape())?;
    let data = upstream
        .data()
        .iter()
        .zip(output.data())
        .map(|(g, y)| g * (1.0 - y * y))
        .collect();
    Tensor::new(output.shape().to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testing::{check_gradients_tol, random_tensor};
    use proptest::prelude::*;

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(tanh_forward(&Tensor::zeros(vec![3])).data(), &[0.0; 3]);
    }

    #[test]
    fn finite_difference_agreement() {
        for seed in 0..10 {
            let x = random_tensor(vec![4, 5], seed);
            let proj = random_tensor(vec![4, 5], seed + 7);
            let loss = |t: &Tensor| -> f64 {
                tanh_forward(t).data().iter().zip(proj.data()).map(|(a, p)| a * p).sum()
            };
            let dx = tanh_backward(&proj, &tanh_forward(&x)).unwrap();
            check_gradients_tol(&x, &dx, loss, 1e-6);
        }
    }

    proptest! {
        #[test]
        fn output_strictly_inside_unit_interval(v in -15.0f64..15.0) {
            let y = tanh_forward(&Tensor::new(vec![1], vec![v]).unwrap()).data()[0];
            prop_assert!(y > -1.0 && y < 1.0);
        }
    }
}
