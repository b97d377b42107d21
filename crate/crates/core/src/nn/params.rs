use rand::Rng;

use super::tensor::Tensor;

/// Trainable weights and biases with their gradients and momentum buffers.
/// All companion tensors share the parameter shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Tensor,
    pub biases: Tensor,
    pub weight_grads: Tensor,
    pub bias_grads: Tensor,
    pub weight_momentum: Tensor,
    pub bias_momentum: Tensor,
}

impl LayerParams {
    pub fn zeros(weight_shape: Vec<usize>, bias_shape: Vec<usize>) -> Self {
        Self {
            weights: Tensor::zeros(weight_shape.clone()),
            biases: Tensor::zeros(bias_shape.clone()),
            weight_grads: Tensor::zeros(weight_shape.clone()),
            bias_grads: Tensor::zeros(bias_shape.clone()),
            weight_momentum: Tensor::zeros(weight_shape),
            bias_momentum: Tensor::zeros(bias_shape),
        }
    }

    /// Weights uniform in `+-sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn glorot_uniform<R: Rng>(
        weight_shape: Vec<usize>,
        bias_shape: Vec<usize>,
        fan_in: usize,
        fan_out: usize,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(weight_shape, bias_shape);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for w in p.weights.data_mut() {
            *w = rng.random_range(-limit..limit);
        }
        p
    }

    pub fn count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    pub fn zero_grads(&mut self) {
        self.weight_grads.fill(0.0);
        self.bias_grads.fill(0.0);
    }

    pub fn fresh_grads(&self) -> ParamGrads {
        ParamGrads {
            weights: vec![0.0; self.weights.len()],
            biases: vec![0.0; self.biases.len()],
        }
    }

    /// Adds `scale * grads` into the gradient tensors.
    pub fn accumulate(&mut self, grads: &ParamGrads, scale: f64) {
        for (g, d) in self.weight_grads.data_mut().iter_mut().zip(&grads.weights) {
            *g += scale * d;
        }
        for (g, d) in self.bias_grads.data_mut().iter_mut().zip(&grads.biases) {
            *g += scale * d;
        }
    }
}

/// Gradient accumulator owned by one worker; reduced into [`LayerParams`] afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl ParamGrads {
    pub fn add(&mut self, other: &ParamGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }
}
