//! Parametric depth renderer: an ellipsoidal head with an ellipsoidal nose,
//! ray cast through a pinhole camera. Labels are exact by construction.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::dataset_io::geometry::{mat_vec, transpose};
use crate::dataset_io::{EulerAngles, PoseLabel, Sample, SEQUENCE_COUNT};
use crate::depth_prep::{CameraIntrinsics, DepthMap};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    /// Center in head coordinates (x right, y down, z away from the face).
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
}

impl Ellipsoid {
    /// Nearest positive ray parameter where `origin + t * dir` meets the surface.
    fn intersect(&self, origin: [f64; 3], dir: [f64; 3]) -> Option<f64> {
        let q: [f64; 3] = [0, 1, 2].map(|i| (origin[i] - self.center[i]) / self.semi_axes[i]);
        let s: [f64; 3] = [0, 1, 2].map(|i| dir[i] / self.semi_axes[i]);
        let a = dot(s, s);
        let b = 2.0 * dot(q, s);
        let c = dot(q, q) - 1.0;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let near = (-b - root) / (2.0 * a);
        let far = (-b + root) / (2.0 * a);
        [near, far].into_iter().find(|&t| t > 0.0)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Head proxy. The face points along -z of the head frame, i.e. towards the
/// camera at the identity pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadModel {
    pub skull: Ellipsoid,
    pub nose: Ellipsoid,
    pub surface_noise_sigma_mm: f64,
}

impl Default for HeadModel {
    fn default() -> Self {
        Self {
            skull: Ellipsoid {
                center: [0.0, 0.0, 0.0],
                semi_axes: [90.0, 120.0, 100.0],
            },
            nose: Ellipsoid {
                center: [0.0, 15.0, -100.0],
                semi_axes: [14.0, 28.0, 32.0],
            },
            surface_noise_sigma_mm: 3.0,
        }
    }
}

impl HeadModel {
    pub fn noiseless() -> Self {
        Self {
            surface_noise_sigma_mm: 0.0,
            ..Self::default()
        }
    }

    pub fn max_semi_axis(&self) -> f64 {
        self.skull.semi_axes.iter().cloned().fold(0.0, f64::max)
    }

    /// How far the nose tip sticks out beyond the front of the skull.
    pub fn nose_protrusion(&self) -> f64 {
        (self.nose.semi_axes[2] - self.nose.center[2]) - self.skull.semi_axes[2]
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let positive = |e: &Ellipsoid| e.semi_axes.iter().all(|&a| a > 0.0);
        if !positive(&self.skull) || !positive(&self.nose) {
            return Err(SynthError::Model("semi-axes must be positive"));
        }
        if !(self.nose_protrusion() > 0.0) {
            return Err(SynthError::Model("nose must protrude beyond the skull front"));
        }
        if !(self.surface_noise_sigma_mm >= 0.0) {
            return Err(SynthError::Model("noise sigma must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("head center z = {z} mm must exceed the largest semi-axis {limit} mm")]
    BehindCamera { z: f64, limit: f64 },
    #[error("invalid head model: {0}")]
    Model(&'static str),
    #[error("invalid generator settings: {0}")]
    Config(&'static str),
}

/// Renders one frame. Background and misses are invalid pixels.
pub fn render_depth<R: Rng>(
    model: &HeadModel,
    pose: &PoseLabel,
    intrinsics: &CameraIntrinsics,
    width: usize,
    height: usize,
    rng: &mut R,
) -> Result<DepthMap, SynthError> {
    model.validate()?;
    let center = pose.head_center_mm;
    let limit = model.max_semi_axis();
    if !(center[2] > limit) {
        return Err(SynthError::BehindCamera { z: center[2], limit });
    }
    if width == 0 || height == 0 {
        return Err(SynthError::Config("image size must be positive"));
    }
    let to_head = transpose(&pose.rotation);
    let origin = mat_vec(&to_head, [-center[0], -center[1], -center[2]]);
    let noise = (model.surface_noise_sigma_mm > 0.0)
        .then(|| Normal::new(0.0, model.surface_noise_sigma_mm).expect("sigma validated"));

    let mut data = vec![0.0; width * height];
    let mut valid = vec![false; width * height];
    for v in 0..height {
        for u in 0..width {
            // Camera ray with unit z component, so the ray parameter is the depth.
            let ray = [
                (u as f64 - intrinsics.cx) / intrinsics.fx,
                (v as f64 - intrinsics.cy) / intrinsics.fy,
                1.0,
            ];
            let dir = mat_vec(&to_head, ray);
            let hit = [model.skull, model.nose]
                .iter()
                .filter_map(|e| e.intersect(origin, dir))
                .fold(f64::INFINITY, f64::min);
            if hit.is_finite() {
                let i = v * width + u;
                let jitter = noise.map_or(0.0, |n| n.sample(rng));
                data[i] = (hit + jitter).max(1.0);
                valid[i] = true;
            }
        }
    }
    Ok(DepthMap::new(width, height, data, valid).expect("buffer sized from dimensions"))
}

/// Settings for [`generate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub model: HeadModel,
    /// Half-ranges of the uniform pose draw, (pitch, roll, yaw) in degrees.
    pub angle_span_deg: [f64; 3],
    pub width: usize,
    pub height: usize,
    pub intrinsics: CameraIntrinsics,
    /// Head-center depth range in millimeters.
    pub distance_mm: (f64, f64),
    /// Uniform lateral/vertical offset of the head center, +-mm.
    pub offset_mm: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            model: HeadModel::default(),
            angle_span_deg: [60.0, 50.0, 75.0],
            width: 224,
            height: 224,
            intrinsics: CameraIntrinsics {
                fx: 500.0,
                fy: 500.0,
                cx: 111.5,
                cy: 111.5,
            },
            distance_mm: (850.0, 1150.0),
            offset_mm: 40.0,
        }
    }
}

/// Draws `n` poses uniformly within the configured spans and renders them.
/// Frame `i` lands in sequence `i mod 24 + 1`.
pub fn generate_dataset(n: usize, config: &SynthConfig, seed: u64) -> Result<Vec<Sample>, SynthError> {
    if n == 0 {
        return Err(SynthError::Config("sample count must be positive"));
    }
    if config.angle_span_deg.iter().any(|s| !(*s >= 0.0)) {
        return Err(SynthError::Config("angle spans must be non-negative"));
    }
    let (z_lo, z_hi) = config.distance_mm;
    if !(z_lo <= z_hi) {
        return Err(SynthError::Config("distance range is empty"));
    }
    let mut rng = seeds::rng(seeds::derive_seed(seed, "poses"));
    let uniform = |rng: &mut rand_chacha::ChaCha8Rng, half: f64| {
        if half == 0.0 { 0.0 } else { rng.random_range(-half..=half) }
    };
    let poses: Vec<PoseLabel> = (0..n)
        .map(|_| {
            let [p, r, y] = config.angle_span_deg;
            let euler = EulerAngles::new(uniform(&mut rng, p), uniform(&mut rng, r), uniform(&mut rng, y));
            let z = if z_lo == z_hi { z_lo } else { rng.random_range(z_lo..=z_hi) };
            let center = [
                uniform(&mut rng, config.offset_mm),
                uniform(&mut rng, config.offset_mm),
                z,
            ];
            PoseLabel::from_euler(euler, center)
        })
        .collect();
    let noise_seed = seeds::derive_seed(seed, "noise");
    poses
        .into_par_iter()
        .enumerate()
        .map(|(i, label)| {
            let mut rng = seeds::rng(seeds::derive_indexed(noise_seed, i as u64));
            let depth = render_depth(
                &config.model,
                &label,
                &config.intrinsics,
                config.width,
                config.height,
                &mut rng,
            )?;
            Ok(Sample {
                depth,
                label,
                intrinsics: config.intrinsics,
                subject_id: "synthetic".to_string(),
                sequence_id: format!("{:02}", i % SEQUENCE_COUNT + 1),
                frame_id: format!("{i:05}"),
            })
        })
        .collect()
}
