use crate::dataset_io::{AngleNormalizer, EulerAngles};
use crate::depth_prep::{NetInput, NET_SIZE};
use crate::error::{ModelError, ShapeError};
use crate::nn::{Conv2d, Layer, Linear, Sequential, Tensor};
use crate::seeds;

/// Input shape of the network: one 64x64 depth channel.
pub const INPUT_SHAPE: [usize; 3] = [1, NET_SIZE, NET_SIZE];

/// Activation shapes after every layer of the default architecture.
pub const SHAPE_CHAIN: [&[usize]; 20] = [
    &[30, 60, 60], // conv 5x5x30
    &[30, 60, 60],
    &[30, 30, 30], // pool
    &[30, 28, 28], // conv 3x3x30
    &[30, 28, 28],
    &[30, 14, 14], // pool
    &[30, 12, 12], // conv 3x3x30
    &[30, 12, 12],
    &[30, 6, 6], // pool
    &[30, 3, 3], // conv 4x4x30
    &[30, 3, 3],
    &[120, 1, 1], // conv 3x3x120
    &[120, 1, 1],
    &[120], // flatten
    &[120], // fc 120
    &[120],
    &[84], // fc 84
    &[84],
    &[3], // fc 3
    &[3],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchOptions {
    /// Squash the three outputs with tanh so they live in (-1, 1) like the targets.
    pub output_tanh: bool,
}

impl Default for ArchOptions {
    fn default() -> Self {
        Self { output_tanh: true }
    }
}

/// The pose regression network plus the scales that map its outputs to degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseNet {
    pub net: Sequential,
    pub normalizer: Option<AngleNormalizer>,
}

/// Five convolutions (30, 30, 30, 30, 120 filters), three poolings and three
/// fully connected layers (120, 84, 3), tanh after every weighted layer.
pub fn build_model(seed: u64) -> PoseNet {
    build_model_with(seed, ArchOptions::default())
}

pub fn build_model_with(seed: u64, options: ArchOptions) -> PoseNet {
    let mut rng = seeds::rng(seed);
    let mut layers = vec![
        Layer::Conv2d(Conv2d::new(1, 30, 5, &mut rng)),
        Layer::Tanh,
        Layer::MaxPool2x2,
        Layer::Conv2d(Conv2d::new(30, 30, 3, &mut rng)),
        Layer::Tanh,
        Layer::MaxPool2x2,
        Layer::Conv2d(Conv2d::new(30, 30, 3, &mut rng)),
        Layer::Tanh,
        Layer::MaxPool2x2,
        Layer::Conv2d(Conv2d::new(30, 30, 4, &mut rng)),
        Layer::Tanh,
        Layer::Conv2d(Conv2d::new(30, 120, 3, &mut rng)),
        Layer::Tanh,
        Layer::Flatten,
        Layer::Linear(Linear::new(120, 120, &mut rng)),
        Layer::Tanh,
        Layer::Linear(Linear::new(120, 84, &mut rng)),
        Layer::Tanh,
        Layer::Linear(Linear::new(84, 3, &mut rng)),
    ];
    if options.output_tanh {
        layers.push(Layer::Tanh);
    }
    let model = PoseNet {
        net: Sequential::new(layers),
        normalizer: None,
    };
    model
        .net
        .shape_chain(&INPUT_SHAPE)
        .expect("layer chain is consistent by construction");
    model
}

pub fn input_tensor(input: &NetInput) -> Result<Tensor, ShapeError> {
    Tensor::new(INPUT_SHAPE.to_vec(), input.data.clone())
}

impl PoseNet {
    /// Compact layer listing, e.g. `1x64x64|conv5x5x30|tanh|...`.
    pub fn architecture(&self) -> String {
        let mut parts = vec![format!("{}x{}x{}", INPUT_SHAPE[0], INPUT_SHAPE[1], INPUT_SHAPE[2])];
        parts.extend(self.net.layers.iter().map(Layer::name));
        parts.join("|")
    }

    pub fn parameter_count(&self) -> usize {
        self.net.parameter_count()
    }

    /// Network outputs in normalized units, (pitch, roll, yaw) order.
    pub fn forward_raw(&self, input: &NetInput) -> Result<[f64; 3], ShapeError> {
        let y = self.net.forward(&input_tensor(input)?)?;
        match *y.data() {
            [p, r, w] => Ok([p, r, w]),
            _ => Err(ShapeError::Mismatch {
                op: "posenet output",
                expected: vec![3],
                actual: y.shape().to_vec(),
            }),
        }
    }

    /// Predicted angles in degrees.
    pub fn predict(&self, input: &NetInput) -> Result<EulerAngles, ModelError> {
        let normalizer = self.normalizer.ok_or(ModelError::MissingNormalizer)?;
        Ok(normalizer.denormalize(self.forward_raw(input)?))
    }
}
