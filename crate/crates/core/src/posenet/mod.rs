//! The pose regression network, its training loop and checkpoint format.

mod checkpoint;
mod model;
mod train;

pub use checkpoint::{Checkpoint, FORMAT_VERSION, MAGIC};
pub use model::{build_model, build_model_with, input_tensor, ArchOptions, PoseNet, INPUT_SHAPE, SHAPE_CHAIN};
pub use train::{evaluate_examples, train, train_with, EpochMetrics, TrainConfig, TrainOutcome};
