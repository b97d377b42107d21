use std::path::PathBuf;

use thiserror::Error;

/// Failures of the preprocessing stages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrepError {
    #[error("invalid distance {0} mm: must be positive")]
    InvalidDistance(f64),
    #[error("invalid face width {0} mm: must be positive")]
    InvalidFaceWidth(f64),
    #[error("invalid foreground band {0} mm: must be positive")]
    InvalidBand(f64),
    #[error("crop window does not intersect the {width}x{height} image")]
    EmptyCrop { width: usize, height: usize },
    #[error("cannot resize an empty depth map")]
    EmptyInput,
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid dimensions {width}x{height}: {reason}")]
    Dimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },
}

/// Failures while reading or validating dataset files.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("rotation is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("pitch {pitch_deg:.3} deg is within the gimbal-lock region")]
    GimbalLock { pitch_deg: f64 },
    #[error("missing sequences: {}", .0.join(", "))]
    MissingSequences(Vec<String>),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Tensor shape violations raised by the network engine before any state is touched.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("{op}: shape mismatch, expected {expected:?}, got {actual:?}")]
    Mismatch {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("{op}: {reason} (shape {shape:?})")]
    Invalid {
        op: &'static str,
        reason: &'static str,
        shape: Vec<usize>,
    },
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, batch {batch} (lr {lr})")]
    NonFiniteLoss { epoch: usize, batch: usize, lr: f64 },
    #[error("invalid optimizer configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint is corrupt: {0}")]
    Corrupt(String),
    #[error("checkpoint architecture does not match: {0}")]
    Architecture(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model has no angle normalizer; train it or load a trained checkpoint")]
    MissingNormalizer,
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Crate-wide error used by the command line and the C interface.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Synth(#[from] crate::synthetic::SynthError),
    #[error("test set is empty")]
    EmptyTestSet,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
