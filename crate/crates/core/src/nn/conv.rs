//! Valid, stride-1 2D cross-correlation through im2col.

use super::gemm::{gemm_nn, gemm_nt, gemm_tn};
use super::tensor::Tensor;
use crate::error::ShapeError;

/// Geometry of one convolution: `[C,H,W]` input, `[F,C,k,k]` filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub filters: usize,
    pub kernel: usize,
}

impl ConvGeometry {
    pub fn check(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Self, ShapeError> {
        let &[c, h, w] = input.shape() else {
            return Err(ShapeError::Invalid {
                op: "conv2d",
                reason: "input must be [C,H,W]",
                shape: input.shape().to_vec(),
            });
        };
        let &[f, wc, k, k2] = weights.shape() else {
            return Err(ShapeError::Invalid {
                op: "conv2d",
                reason: "weights must be [F,C,k,k]",
                shape: weights.shape().to_vec(),
            });
        };
        if wc != c || k != k2 {
            return Err(ShapeError::Mismatch {
                op: "conv2d",
                expected: vec![f, c, k, k],
                actual: weights.shape().to_vec(),
            });
        }
        if k == 0 || k > h || k > w {
            return Err(ShapeError::Invalid {
                op: "conv2d",
                reason: "kernel larger than input",
                shape: input.shape().to_vec(),
            });
        }
        bias.expect_shape("conv2d bias", &[f])?;
        Ok(Self {
            channels: c,
            height: h,
            width: w,
            filters: f,
            kernel: k,
        })
    }

    pub fn out_height(&self) -> usize {
        self.height - self.kernel + 1
    }

    pub fn out_width(&self) -> usize {
        self.width - self.kernel + 1
    }

    pub fn out_shape(&self) -> Vec<usize> {
        vec![self.filters, self.out_height(), self.out_width()]
    }

    fn patch_len(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    fn positions(&self) -> usize {
        self.out_height() * self.out_width()
    }
}

/// `cols[(c,ky,kx), (oy,ox)] = input[c, oy+ky, ox+kx]`
pub(crate) fn im2col(input: &[f64], g: &ConvGeometry) -> Vec<f64> {
    let (ho, wo, k) = (g.out_height(), g.out_width(), g.kernel);
    let n = ho * wo;
    let mut cols = vec![0.0; g.patch_len() * n];
    for c in 0..g.channels {
        for ky in 0..k {
            for kx in 0..k {
                let r = (c * k + ky) * k + kx;
                let dst = &mut cols[r * n..(r + 1) * n];
                for oy in 0..ho {
                    let src = (c * g.height + oy + ky) * g.width + kx;
                    dst[oy * wo..(oy + 1) * wo].copy_from_slice(&input[src..src + wo]);
                }
            }
        }
    }
    cols
}

fn col2im(cols: &[f64], g: &ConvGeometry) -> Vec<f64> {
    let (ho, wo, k) = (g.out_height(), g.out_width(), g.kernel);
    let n = ho * wo;
    let mut out = vec![0.0; g.channels * g.height * g.width];
    for c in 0..g.channels {
        for ky in 0..k {
            for kx in 0..k {
                let r = (c * k + ky) * k + kx;
                let src = &cols[r * n..(r + 1) * n];
                for oy in 0..ho {
                    let dst = (c * g.height + oy + ky) * g.width + kx;
                    for (o, s) in out[dst..dst + wo].iter_mut().zip(&src[oy * wo..(oy + 1) * wo]) {
                        *o += s;
                    }
                }
            }
        }
    }
    out
}

pub(crate) fn forward_cols(cols: &[f64], g: &ConvGeometry, weights: &[f64], bias: &[f64]) -> Tensor {
    let n = g.positions();
    let mut out = vec![0.0; g.filters * n];
    for (f, row) in out.chunks_exact_mut(n).enumerate() {
        row.fill(bias[f]);
    }
    gemm_nn(g.filters, n, g.patch_len(), weights, cols, &mut out);
    Tensor::new(g.out_shape(), out).expect("output sized from geometry")
}

/// Accumulates parameter gradients and, if requested, returns the input gradient.
pub(crate) fn backward_cols(
    upstream: &[f64],
    cols: &[f64],
    g: &ConvGeometry,
    weights: &[f64],
    weight_grad: &mut [f64],
    bias_grad: &mut [f64],
    need_input_grad: bool,
) -> Option<Tensor> {
    let n = g.positions();
    let kk = g.patch_len();
    gemm_nt(g.filters, kk, n, upstream, cols, weight_grad);
    for (b, row) in bias_grad.iter_mut().zip(upstream.chunks_exact(n)) {
        *b += row.iter().sum::<f64>();
    }
    need_input_grad.then(|| {
        let mut dcols = vec![0.0; kk * n];
        gemm_tn(kk, n, g.filters, weights, upstream, &mut dcols);
        Tensor::new(vec![g.channels, g.height, g.width], col2im(&dcols, g))
            .expect("input gradient sized from geometry")
    })
}

/// Cross-correlation of a `[C,H,W]` input with `[F,C,k,k]` filters plus a per-filter bias.
pub fn conv2d_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor, ShapeError> {
    let g = ConvGeometry::check(input, weights, bias)?;
    let cols = im2col(input.data(), &g);
    Ok(forward_cols(&cols, &g, weights.data(), bias.data()))
}

/// Gradient of the forward map. Adds into `weight_grad`/`bias_grad` and
/// returns the gradient with respect to `input`.
pub fn conv2d_backward(
    upstream: &Tensor,
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    weight_grad: &mut Tensor,
    bias_grad: &mut Tensor,
) -> Result<Tensor, ShapeError> {
    let g = ConvGeometry::check(input, weights, bias)?;
    upstream.expect_shape("conv2d backward", &g.out_shape())?;
    weight_grad.expect_shape("conv2d weight grad", weights.shape())?;
    bias_grad.expect_shape("conv2d bias grad", bias.shape())?;
    let cols = im2col(input.data(), &g);
    let dx = backward_cols(
        upstream.data(),
        &cols,
        &g,
        weights.data(),
        weight_grad.data_mut(),
        bias_grad.data_mut(),
        true,
    );
    Ok(dx.expect("input gradient requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testing::{check_gradients, random_tensor};

    #[test]
    fn one_by_one_identity_filter() {
        let x = random_tensor(vec![1, 5, 4], 3);
        let w = Tensor::new(vec![1, 1, 1, 1], vec![1.0]).unwrap();
        let b = Tensor::zeros(vec![1]);
        assert_eq!(conv2d_forward(&x, &w, &b).unwrap(), x);
    }

    #[test]
    fn all_ones_filter_sums() {
        let x = Tensor::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let w = Tensor::new(vec![1, 1, 2, 2], vec![1.0; 4]).unwrap();
        let y = conv2d_forward(&x, &w, &Tensor::zeros(vec![1])).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1]);
        assert_eq!(y.data(), &[10.0]);
    }

    #[test]
    fn output_shape_arithmetic() {
        let x = random_tensor(vec![3, 8, 8], 1);
        let w = random_tensor(vec![5, 3, 3, 3], 2);
        let y = conv2d_forward(&x, &w, &Tensor::zeros(vec![5])).unwrap();
        assert_eq!(y.shape(), &[5, 6, 6]);
    }

    #[test]
    fn shape_errors_name_both_shapes() {
        let x = random_tensor(vec![2, 8, 8], 1);
        let w = random_tensor(vec![5, 3, 3, 3], 2);
        let err = conv2d_forward(&x, &w, &Tensor::zeros(vec![5])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[5, 2, 3, 3]") && msg.contains("[5, 3, 3, 3]"), "{msg}");
        let big = random_tensor(vec![1, 9, 9, 9], 0);
        assert!(conv2d_forward(&random_tensor(vec![9, 4, 4], 0), &big, &Tensor::zeros(vec![1])).is_err());
    }

    #[test]
    fn backward_shape_error_leaves_grads_untouched() {
        let x = random_tensor(vec![2, 6, 6], 1);
        let w = random_tensor(vec![3, 2, 3, 3], 2);
        let b = Tensor::zeros(vec![3]);
        let mut gw = Tensor::zeros(vec![3, 2, 3, 3]);
        let mut gb = Tensor::zeros(vec![3]);
        let bad_up = random_tensor(vec![3, 5, 5], 4);
        assert!(conv2d_backward(&bad_up, &x, &w, &b, &mut gw, &mut gb).is_err());
        assert!(gw.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let x = random_tensor(vec![2, 6, 6], 1);
        let w = random_tensor(vec![3, 2, 3, 3], 2);
        let b = random_tensor(vec![3], 5);
        let mut gw = Tensor::zeros(vec![3, 2, 3, 3]);
        let mut gb = Tensor::zeros(vec![3]);
        let dx = conv2d_backward(&Tensor::zeros(vec![3, 4, 4]), &x, &w, &b, &mut gw, &mut gb).unwrap();
        assert!(gw.data().iter().chain(gb.data()).chain(dx.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn bias_grad_is_upstream_sum() {
        let x = random_tensor(vec![2, 6, 6], 1);
        let w = random_tensor(vec![3, 2, 3, 3], 2);
        let b = Tensor::zeros(vec![3]);
        let up = random_tensor(vec![3, 4, 4], 9);
        let mut gw = Tensor::zeros(vec![3, 2, 3, 3]);
        let mut gb = Tensor::zeros(vec![3]);
        conv2d_backward(&up, &x, &w, &b, &mut gw, &mut gb).unwrap();
        for f in 0..3 {
            let s: f64 = up.data()[f * 16..(f + 1) * 16].iter().sum();
            assert!((gb.data()[f] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_agreement() {
        for seed in 0..10 {
            let x = random_tensor(vec![2, 7, 6], seed);
            let w = random_tensor(vec![3, 2, 3, 3], seed + 100);
            let b = random_tensor(vec![3], seed + 200);
            let proj = random_tensor(vec![3, 5, 4], seed + 300);
            let loss = |x: &Tensor, w: &Tensor, b: &Tensor| -> f64 {
                let y = conv2d_forward(x, w, b).unwrap();
                y.data().iter().zip(proj.data()).map(|(a, p)| a * p).sum()
            };
            let mut gw = Tensor::zeros(w.shape().to_vec());
            let mut gb = Tensor::zeros(vec![3]);
            let dx = conv2d_backward(&proj, &x, &w, &b, &mut gw, &mut gb).unwrap();
            check_gradients(&x, &dx, |t| loss(t, &w, &b));
            check_gradients(&w, &gw, |t| loss(&x, t, &b));
            check_gradients(&b, &gb, |t| loss(&x, &w, t));
        }
    }
}
