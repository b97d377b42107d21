//! Mini-batch training with momentum SGD.
//!
//! Each batch is cut into fixed-size chunks whose gradients are computed in
//! parallel and then summed in chunk order, so a run is bit-reproducible for a
//! given seed regardless of the number of worker threads.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::model::{input_tensor, PoseNet};
use crate::augment::{augment, AugmentConfig, AUGMENTED_VARIANTS};
use crate::dataset_io::AngleNormalizer;
use crate::depth_prep::NetInput;
use crate::error::{ShapeError, TrainError};
use crate::nn::{l2_loss, sgd_step, GradBuffer, SgdConfig, Tensor};
use crate::pipeline::TrainingExample;
use crate::seeds::{self, RunSeeds};

/// Samples per parallel work unit.
const CHUNK: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub sgd: SgdConfig,
    /// Online augmentation: each epoch every example is replaced by the
    /// original or one of its ten variants, uniformly.
    pub augment: Option<AugmentConfig>,
    pub seed: u64,
    /// Stop after the first epoch whose training loss falls below this value.
    pub target_loss: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let epochs = 50;
        Self {
            epochs,
            batch_size: 64,
            sgd: SgdConfig::default().with_step_schedule(epochs),
            augment: Some(AugmentConfig::default()),
            seed: 0,
            target_loss: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch size must be at least 1".into()));
        }
        self.sgd.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean per-sample squared error over the epoch's batches, in normalized units.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    /// Mean absolute error in degrees, (pitch, roll, yaw).
    pub val_mae_deg: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: Vec<EpochMetrics>,
}

impl TrainOutcome {
    pub fn final_train_loss(&self) -> Option<f64> {
        self.history.last().map(|m| m.train_loss)
    }
}

fn target_tensor(target: &[f64; 3]) -> Tensor {
    Tensor::new(vec![1, 3], target.to_vec()).expect("three targets")
}

/// Loss and gradients for a run of samples, accumulated in order.
fn chunk_gradients(
    model: &PoseNet,
    items: &[(NetInput, [f64; 3])],
) -> Result<(f64, GradBuffer), ShapeError> {
    let mut grads = model.net.grad_buffer();
    let mut loss = 0.0;
    for (input, target) in items {
        let (out, caches) = model.net.forward_cached(input_tensor(input)?)?;
        let pred = out.reshape(vec![1, 3])?;
        let (l, g) = l2_loss(&pred, &target_tensor(target))?;
        loss += l;
        model.net.backward(caches, g.reshape(vec![3])?, &mut grads)?;
    }
    Ok((loss, grads))
}

fn epoch_input(
    example: &TrainingExample,
    aug: Option<&AugmentConfig>,
    seed: u64,
) -> Result<NetInput, TrainError> {
    let Some(cfg) = aug else {
        return Ok(example.input.clone());
    };
    let mut rng = seeds::rng(seed);
    let pick = rng.random_range(0..=AUGMENTED_VARIANTS);
    if pick == 0 {
        return Ok(example.input.clone());
    }
    let mut variants = augment(&example.input, rng.random(), cfg)
        .map_err(|e| TrainError::Config(format!("augmentation failed for {}: {e}", example.key)))?;
    Ok(variants.swap_remove(pick - 1))
}

/// Mean per-sample loss and per-angle MAE in degrees over `examples`.
pub fn evaluate_examples(
    model: &PoseNet,
    examples: &[TrainingExample],
    normalizer: &AngleNormalizer,
) -> Result<(f64, [f64; 3]), ShapeError> {
    let per: Vec<(f64, [f64; 3])> = examples
        .par_iter()
        .map(|ex| {
            let y = model.forward_raw(&ex.input)?;
            let loss = y.iter().zip(&ex.target).map(|(a, b)| (a - b) * (a - b)).sum();
            let p = normalizer.denormalize(y).to_array();
            let t = normalizer.denormalize(ex.target).to_array();
            Ok((loss, [0, 1, 2].map(|i| (p[i] - t[i]).abs())))
        })
        .collect::<Result<_, ShapeError>>()?;
    let n = per.len().max(1) as f64;
    let loss = per.iter().map(|p| p.0).sum::<f64>() / n;
    let mae = [0, 1, 2].map(|i| per.iter().map(|p| p.1[i]).sum::<f64>() / n);
    Ok((loss, mae))
}

/// Trains `model` in place and returns per-epoch metrics. The normalizer is
/// attached to the model so its outputs can be read back in degrees.
pub fn train(
    model: &mut PoseNet,
    train_set: &[TrainingExample],
    val_set: &[TrainingExample],
    config: &TrainConfig,
    normalizer: AngleNormalizer,
) -> Result<TrainOutcome, TrainError> {
    train_with(model, train_set, val_set, config, normalizer, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with(
    model: &mut PoseNet,
    train_set: &[TrainingExample],
    val_set: &[TrainingExample],
    config: &TrainConfig,
    normalizer: AngleNormalizer,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    model.normalizer = Some(normalizer);
    let run = RunSeeds::from_seed(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let lr = config.sgd.lr_at(epoch);
        order.shuffle(&mut seeds::rng(seeds::derive_indexed(run.shuffle, epoch as u64)));
        let aug_epoch = seeds::derive_indexed(run.augment, epoch as u64);

        let mut epoch_loss = 0.0;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let items: Vec<(NetInput, [f64; 3])> = batch
                .par_iter()
                .map(|&i| {
                    let seed = seeds::derive_indexed(aug_epoch, i as u64);
                    let ex = &train_set[i];
                    Ok((epoch_input(ex, config.augment.as_ref(), seed)?, ex.target))
                })
                .collect::<Result<_, TrainError>>()?;

            let parts: Vec<(f64, GradBuffer)> = items
                .par_chunks(CHUNK)
                .map(|chunk| chunk_gradients(model, chunk))
                .collect::<Result<_, ShapeError>>()?;
            let mut parts = parts.into_iter();
            let (mut loss, mut grads) = parts.next().expect("batch is non-empty");
            for (l, g) in parts {
                loss += l;
                grads.add(&g);
            }
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                    lr,
                });
            }
            epoch_loss += loss;
            model.net.accumulate(&grads, 1.0 / batch.len() as f64);
            sgd_step(model.net.params_mut(), &config.sgd, epoch);
        }

        let (val_loss, val_mae_deg) = if val_set.is_empty() {
            (None, None)
        } else {
            let (l, m) = evaluate_examples(model, val_set, &normalizer)?;
            (Some(l), Some(m))
        };
        let metrics = EpochMetrics {
            epoch,
            learning_rate: lr,
            train_loss: epoch_loss / train_set.len() as f64,
            val_loss,
            val_mae_deg,
        };
        log::info!(
            "epoch {} lr {:.2e} train loss {:.6}{}",
            epoch + 1,
            lr,
            metrics.train_loss,
            match (val_loss, val_mae_deg) {
                (Some(l), Some(m)) => format!(
                    " val loss {l:.6} val MAE pitch {:.2} roll {:.2} yaw {:.2}",
                    m[0], m[1], m[2]
                ),
                _ => String::new(),
            }
        );
        on_epoch(&metrics);
        history.push(metrics);
        if config.target_loss.is_some_and(|t| metrics.train_loss < t) {
            break;
        }
    }
    Ok(TrainOutcome { history })
}
