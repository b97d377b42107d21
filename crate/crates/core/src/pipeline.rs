//! Glue between labeled samples and network inputs.

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset_io::{make_split, project_to_pixel, AngleNormalizer, DatasetIndex, DepthFormat, Sample};
use crate::depth_prep::{preprocess, NetInput, PrepConfig};
use crate::error::Result;
use crate::seeds;

/// Preprocesses a sample around its annotated head center.
pub fn prepare_sample(sample: &Sample, config: &PrepConfig) -> Result<NetInput> {
    let center = sample.label.head_center_mm;
    let pixel = project_to_pixel(center, &sample.intrinsics)?;
    Ok(preprocess(&sample.depth, &sample.intrinsics, pixel, center[2], config)?)
}

/// A preprocessed input with its normalized regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub input: NetInput,
    pub target: [f64; 3],
    pub key: String,
}

/// Preprocesses every sample in parallel, keeping the input order.
pub fn prepare_examples(
    samples: &[Sample],
    config: &PrepConfig,
    normalizer: &AngleNormalizer,
) -> Result<Vec<TrainingExample>> {
    samples
        .par_iter()
        .map(|s| {
            Ok(TrainingExample {
                input: prepare_sample(s, config)?,
                target: normalizer.normalize(s.label.euler_deg),
                key: s.key(),
            })
        })
        .collect()
}

/// Loads a dataset directory and splits it into (train, test) samples.
pub fn load_split(root: &Path, format: DepthFormat) -> Result<(Vec<Sample>, Vec<Sample>)> {
    let index = DatasetIndex::build(root, format)?;
    let (train, test) = make_split(index.entries.clone(), |e| e.sequence_id.as_str())?;
    Ok((index.load_all(&train)?, index.load_all(&test)?))
}

/// Moves a seeded random `fraction` of `items` into a second vector, keeping
/// the relative order of both parts.
pub fn hold_out<T>(items: Vec<T>, fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let n = items.len();
    let k = ((n as f64 * fraction.clamp(0.0, 1.0)).round() as usize).min(n.saturating_sub(1));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeds::rng(seed));
    let mut held = vec![false; n];
    for &i in &idx[..k] {
        held[i] = true;
    }
    let (mut keep, mut out) = (Vec::new(), Vec::new());
    for (item, h) in items.into_iter().zip(held) {
        if h { out.push(item) } else { keep.push(item) }
    }
    (keep, out)
}
