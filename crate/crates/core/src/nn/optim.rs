//! Stochastic gradient descent with momentum, weight decay and a stepwise
//! learning-rate schedule.

use super::params::LayerParams;
use crate::error::TrainError;

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// `(epoch, lr)` steps: from `epoch` on, `lr` replaces the base rate.
    pub schedule: Vec<(usize, f64)>,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            momentum: 0.9,
            weight_decay: 5e-4,
            schedule: Vec::new(),
        }
    }
}

impl SgdConfig {
    /// Base rate dropped tenfold at 80% and again at 90% of `epochs`.
    pub fn with_step_schedule(mut self, epochs: usize) -> Self {
        let first = epochs * 8 / 10;
        let second = epochs * 9 / 10;
        self.schedule.clear();
        if first > 0 {
            self.schedule.push((first, self.learning_rate * 0.1));
        }
        if second > first {
            self.schedule.push((second, self.learning_rate * 0.01));
        }
        self
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::Config("momentum must lie in [0, 1)".into()));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(TrainError::Config("weight decay must be non-negative".into()));
        }
        if self.schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(TrainError::Config("schedule epochs must be strictly increasing".into()));
        }
        if self.schedule.iter().any(|&(_, lr)| !(lr > 0.0)) {
            return Err(TrainError::Config("scheduled learning rates must be positive".into()));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.schedule
            .iter()
            .take_while(|(e, _)| *e <= epoch)
            .last()
            .map_or(self.learning_rate, |&(_, lr)| lr)
    }
}

fn update(w: &mut [f64], g: &[f64], v: &mut [f64], lr: f64, momentum: f64, decay: f64) {
    for ((w, g), v) in w.iter_mut().zip(g).zip(v.iter_mut()) {
        *v = momentum * *v - lr * (g + decay * *w);
        *w += *v;
    }
}

/// `v <- mu v - lr (g + lambda w); w <- w + v` for every parameter, then clears the gradients.
pub fn sgd_step<'a>(
    params: impl IntoIterator<Item = &'a mut LayerParams>,
    config: &SgdConfig,
    epoch: usize,
) {
    let lr = config.lr_at(epoch);
    for p in params {
        update(
            p.weights.data_mut(),
            p.weight_grads.data(),
            p.weight_momentum.data_mut(),
            lr,
            config.momentum,
            config.weight_decay,
        );
        update(
            p.biases.data_mut(),
            p.bias_grads.data(),
            p.bias_momentum.data_mut(),
            lr,
            config.momentum,
            config.weight_decay,
        );
        p.zero_grads();
    }
}
