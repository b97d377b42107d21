use super::gemm::dot;
use super::tensor::Tensor;
use crate::error::ShapeError;

fn check(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<(usize, usize), ShapeError> {
    let &[out, inp] = weights.shape() else {
        return Err(ShapeError::Invalid {
            op: "linear",
            reason: "weights must be [out, in]",
            shape: weights.shape().to_vec(),
        });
    };
    input.expect_shape("linear input", &[inp])?;
    bias.expect_shape("linear bias", &[out])?;
    Ok((out, inp))
}

/// `y = W x + b`
pub fn linear_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor, ShapeError> {
    let (out, inp) = check(input, weights, bias)?;
    let x = input.data();
    let y = (0..out)
        .map(|o| bias.data()[o] + dot(&weights.data()[o * inp..(o + 1) * inp], x))
        .collect();
    Tensor::new(vec![out], y)
}

/// Adds `dy x^T` to `weight_grad` and `dy` to `bias_grad`; returns `W^T dy`.
pub fn linear_backward(
    upstream: &Tensor,
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    weight_grad: &mut Tensor,
    bias_grad: &mut Tensor,
) -> Result<Tensor, ShapeError> {
    let (out, _) = check(input, weights, bias)?;
    upstream.expect_shape("linear backward", &[out])?;
    weight_grad.expect_shape("linear weight grad", weights.shape())?;
    bias_grad.expect_shape("linear bias grad", bias.shape())?;
    Ok(backward_raw(
        upstream.data(),
        input.data(),
        weights.data(),
        weight_grad.data_mut(),
        bias_grad.data_mut(),
        true,
    )
    .expect("input gradient requested"))
}

pub(crate) fn backward_raw(
    dy: &[f64],
    x: &[f64],
    w: &[f64],
    weight_grad: &mut [f64],
    bias_grad: &mut [f64],
    need_input_grad: bool,
) -> Option<Tensor> {
    let inp = x.len();
    for (o, &g) in dy.iter().enumerate() {
        bias_grad[o] += g;
        for (wg, &xv) in weight_grad[o * inp..(o + 1) * inp].iter_mut().zip(x) {
            *wg += g * xv;
        }
    }
    need_input_grad.then(|| {
        let mut dx = vec![0.0; inp];
        for (o, &g) in dy.iter().enumerate() {
            for (d, &wv) in dx.iter_mut().zip(&w[o * inp..(o + 1) * inp]) {
                *d += g * wv;
            }
        }
        Tensor::new(vec![inp], dx).expect("sized from input")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testing::{check_gradients, random_tensor};

    #[test]
    fn identity_weights_pass_through() {
        let n = 4;
        let mut w = Tensor::zeros(vec![n, n]);
        for i in 0..n {
            w.data_mut()[i * n + i] = 1.0;
        }
        let x = random_tensor(vec![n], 1);
        assert_eq!(linear_forward(&x, &w, &Tensor::zeros(vec![n])).unwrap(), x);
    }

    #[test]
    fn hidden_layer_dimensions() {
        let y = linear_forward(
            &random_tensor(vec![120], 1),
            &random_tensor(vec![84, 120], 2),
            &Tensor::zeros(vec![84]),
        )
        .unwrap();
        assert_eq!(y.shape(), &[84]);
        assert!(linear_forward(&random_tensor(vec![119], 1), &random_tensor(vec![84, 120], 2), &Tensor::zeros(vec![84])).is_err());
    }

    #[test]
    fn finite_difference_agreement() {
        for seed in 0..10 {
            let x = random_tensor(vec![7], seed);
            let w = random_tensor(vec![5, 7], seed + 10);
            let b = random_tensor(vec![5], seed + 20);
            let proj = random_tensor(vec![5], seed + 30);
            let loss = |x: &Tensor, w: &Tensor, b: &Tensor| -> f64 {
                linear_forward(x, w, b).unwrap().data().iter().zip(proj.data()).map(|(a, p)| a * p).sum()
            };
            let mut gw = Tensor::zeros(vec![5, 7]);
            let mut gb = Tensor::zeros(vec![5]);
            let dx = linear_backward(&proj, &x, &w, &b, &mut gw, &mut gb).unwrap();
            check_gradients(&x, &dx, |t| loss(t, &w, &b));
            check_gradients(&w, &gw, |t| loss(&x, t, &b));
            check_gradients(&b, &gb, |t| loss(&x, &w, t));
        }
    }
}
