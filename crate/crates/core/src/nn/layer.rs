//! Layer stack with cached forward passes and explicit backward passes.

use rand::Rng;

use super::activation::{tanh_backward, tanh_forward};
use super::conv::{backward_cols, forward_cols, im2col, ConvGeometry};
use super::linear::{backward_raw, linear_forward};
use super::params::{LayerParams, ParamGrads};
use super::pool::{maxpool2x2_backward, maxpool2x2_forward};
use super::tensor::Tensor;
use crate::error::ShapeError;

#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub filters: usize,
    pub kernel: usize,
    pub params: LayerParams,
}

impl Conv2d {
    pub fn new<R: Rng>(in_channels: usize, filters: usize, kernel: usize, rng: &mut R) -> Self {
        let k2 = kernel * kernel;
        Self {
            in_channels,
            filters,
            kernel,
            params: LayerParams::glorot_uniform(
                vec![filters, in_channels, kernel, kernel],
                vec![filters],
                in_channels * k2,
                filters * k2,
                rng,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub inputs: usize,
    pub outputs: usize,
    pub params: LayerParams,
}

impl Linear {
    pub fn new<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        Self {
            inputs,
            outputs,
            params: LayerParams::glorot_uniform(vec![outputs, inputs], vec![outputs], inputs, outputs, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv2d(Conv2d),
    Tanh,
    MaxPool2x2,
    Flatten,
    Linear(Linear),
}

/// What a layer keeps from its forward pass for the backward pass.
#[derive(Debug)]
pub enum LayerCache {
    Conv { cols: Vec<f64>, geometry: ConvGeometry },
    Tanh { output: Tensor },
    Pool { argmax: Vec<u32>, input_shape: Vec<usize> },
    Flatten { input_shape: Vec<usize> },
    Linear { input: Tensor },
}

impl Layer {
    pub fn name(&self) -> String {
        match self {
            Layer::Conv2d(c) => format!("conv{}x{}x{}", c.kernel, c.kernel, c.filters),
            Layer::Tanh => "tanh".into(),
            Layer::MaxPool2x2 => "maxpool2x2".into(),
            Layer::Flatten => "flatten".into(),
            Layer::Linear(l) => format!("fc{}", l.outputs),
        }
    }

    pub fn params(&self) -> Option<&LayerParams> {
        match self {
            Layer::Conv2d(c) => Some(&c.params),
            Layer::Linear(l) => Some(&l.params),
            _ => None,
        }
    }

    pub fn params_mut(&mut self) -> Option<&mut LayerParams> {
        match self {
            Layer::Conv2d(c) => Some(&mut c.params),
            Layer::Linear(l) => Some(&mut l.params),
            _ => None,
        }
    }

    /// Shape produced for an input of shape `input`, or the reason it is rejected.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>, ShapeError> {
        match self {
            Layer::Conv2d(c) => match *input {
                [ch, h, w] if ch == c.in_channels && h >= c.kernel && w >= c.kernel => {
                    Ok(vec![c.filters, h - c.kernel + 1, w - c.kernel + 1])
                }
                _ => Err(ShapeError::Mismatch {
                    op: "conv2d",
                    expected: vec![c.in_channels, c.kernel, c.kernel],
                    actual: input.to_vec(),
                }),
            },
            Layer::Tanh => Ok(input.to_vec()),
            Layer::MaxPool2x2 => match *input {
                [ch, h, w] if h % 2 == 0 && w % 2 == 0 && h > 0 && w > 0 => Ok(vec![ch, h / 2, w / 2]),
                _ => Err(ShapeError::Invalid {
                    op: "maxpool2x2",
                    reason: "height and width must be even",
                    shape: input.to_vec(),
                }),
            },
            Layer::Flatten => Ok(vec![input.iter().product()]),
            Layer::Linear(l) => match *input {
                [n] if n == l.inputs => Ok(vec![l.outputs]),
                _ => Err(ShapeError::Mismatch {
                    op: "linear",
                    expected: vec![l.inputs],
                    actual: input.to_vec(),
                }),
            },
        }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor, ShapeError> {
        match self {
            Layer::Conv2d(c) => {
                super::conv::conv2d_forward(input, &c.params.weights, &c.params.biases)
            }
            Layer::Tanh => Ok(tanh_forward(input)),
            Layer::MaxPool2x2 => maxpool2x2_forward(input).map(|(y, _)| y),
            Layer::Flatten => input.clone().reshape(vec![input.len()]),
            Layer::Linear(l) => linear_forward(input, &l.params.weights, &l.params.biases),
        }
    }

    pub fn forward_cached(&self, input: Tensor) -> Result<(Tensor, LayerCache), ShapeError> {
        Ok(match self {
            Layer::Conv2d(c) => {
                let geometry = ConvGeometry::check(&input, &c.params.weights, &c.params.biases)?;
                let cols = im2col(input.data(), &geometry);
                let y = forward_cols(&cols, &geometry, c.params.weights.data(), c.params.biases.data());
                (y, LayerCache::Conv { cols, geometry })
            }
            Layer::Tanh => {
                let output = tanh_forward(&input);
                (output.clone(), LayerCache::Tanh { output })
            }
            Layer::MaxPool2x2 => {
                let input_shape = input.shape().to_vec();
                let (y, argmax) = maxpool2x2_forward(&input)?;
                (y, LayerCache::Pool { argmax, input_shape })
            }
            Layer::Flatten => {
                let input_shape = input.shape().to_vec();
                let n = input.len();
                (input.reshape(vec![n])?, LayerCache::Flatten { input_shape })
            }
            Layer::Linear(l) => {
                let y = linear_forward(&input, &l.params.weights, &l.params.biases)?;
                (y, LayerCache::Linear { input })
            }
        })
    }

    /// Adds this layer's parameter gradients into `grads` and returns the
    /// input gradient when `need_input_grad` is set.
    pub fn backward(
        &self,
        cache: LayerCache,
        upstream: Tensor,
        grads: Option<&mut ParamGrads>,
        need_input_grad: bool,
    ) -> Result<Option<Tensor>, ShapeError> {
        match (self, cache) {
            (Layer::Conv2d(c), LayerCache::Conv { cols, geometry }) => {
                upstream.expect_shape("conv2d backward", &geometry.out_shape())?;
                let g = grads.expect("conv layer has gradient buffers");
                Ok(backward_cols(
                    upstream.data(),
                    &cols,
                    &geometry,
                    c.params.weights.data(),
                    &mut g.weights,
                    &mut g.biases,
                    need_input_grad,
                ))
            }
            (Layer::Tanh, LayerCache::Tanh { output }) => tanh_backward(&upstream, &output).map(Some),
            (Layer::MaxPool2x2, LayerCache::Pool { argmax, input_shape }) => {
                maxpool2x2_backward(&upstream, &argmax, &input_shape).map(Some)
            }
            (Layer::Flatten, LayerCache::Flatten { input_shape }) => upstream.reshape(input_shape).map(Some),
            (Layer::Linear(l), LayerCache::Linear { input }) => {
                upstream.expect_shape("linear backward", &[l.outputs])?;
                let g = grads.expect("linear layer has gradient buffers");
                Ok(backward_raw(
                    upstream.data(),
                    input.data(),
                    l.params.weights.data(),
                    &mut g.weights,
                    &mut g.biases,
                    need_input_grad,
                ))
            }
            (layer, _) => Err(ShapeError::Invalid {
                op: "backward",
                reason: "cache does not belong to this layer",
                shape: vec![layer.params().map_or(0, LayerParams::count)],
            }),
        }
    }
}

/// A chain of layers applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

/// Per-worker gradient buffers, one slot per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer {
    pub layers: Vec<Option<ParamGrads>>,
}

impl GradBuffer {
    pub fn add(&mut self, other: &GradBuffer) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            if let (Some(a), Some(b)) = (a, b) {
                a.add(b);
            }
        }
    }
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    /// Shape after every layer for `input`; fails on the first inconsistent layer.
    pub fn shape_chain(&self, input: &[usize]) -> Result<Vec<Vec<usize>>, ShapeError> {
        let mut shapes = Vec::with_capacity(self.layers.len());
        let mut cur = input.to_vec();
        for layer in &self.layers {
            cur = layer.output_shape(&cur)?;
            shapes.push(cur.clone());
        }
        Ok(shapes)
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor, ShapeError> {
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: Tensor) -> Result<(Tensor, Vec<LayerCache>), ShapeError> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = input;
        for layer in &self.layers {
            let (y, cache) = layer.forward_cached(x)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, caches))
    }

    /// Backpropagates `upstream` through the cached pass, accumulating into `grads`.
    /// The gradient with respect to the network input is not computed.
    pub fn backward(
        &self,
        caches: Vec<LayerCache>,
        upstream: Tensor,
        grads: &mut GradBuffer,
    ) -> Result<(), ShapeError> {
        let mut g = upstream;
        for (i, (layer, cache)) in self.layers.iter().zip(caches).enumerate().rev() {
            let need_input = i > 0;
            match layer.backward(cache, g, grads.layers[i].as_mut(), need_input)? {
                Some(next) => g = next,
                None => break,
            }
        }
        Ok(())
    }

    pub fn grad_buffer(&self) -> GradBuffer {
        GradBuffer {
            layers: self
                .layers
                .iter()
                .map(|l| l.params().map(LayerParams::fresh_grads))
                .collect(),
        }
    }

    /// Adds `scale * buffer` into each layer's gradient tensors.
    pub fn accumulate(&mut self, buffer: &GradBuffer, scale: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&buffer.layers) {
            if let (Some(p), Some(g)) = (layer.params_mut(), g) {
                p.accumulate(g, scale);
            }
        }
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut LayerParams> {
        self.layers.iter_mut().filter_map(Layer::params_mut)
    }

    pub fn params(&self) -> impl Iterator<Item = &LayerParams> {
        self.layers.iter().filter_map(Layer::params)
    }

    pub fn parameter_count(&self) -> usize {
        self.params().map(LayerParams::count).sum()
    }
}
