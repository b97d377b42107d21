//! Ten-way expansion of a preprocessed input: five jittered corner/center
//! crops, four one-sided crops and one Gaussian-noise copy.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::depth_prep::{NetInput, NET_PIXELS, NET_SIZE};
use crate::error::PrepError;
use crate::grid::resample_bilinear;
use crate::seeds;

pub const AUGMENTED_VARIANTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    /// Side of every crop before it is resized back to 64x64.
    pub patch: usize,
    /// Corner crops move up to this many pixels away from their corner.
    pub corner_jitter: usize,
    /// Center crop moves up to this many pixels either way.
    pub center_jitter: usize,
    /// Standard deviation of the additive noise, in normalized units.
    pub noise_sigma: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            patch: 56,
            corner_jitter: 8,
            center_jitter: 2,
            noise_sigma: 0.05,
        }
    }
}

/// Which part of the image a variant came from, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
    Center,
    Bottom,
    Upper,
    Left,
    Right,
    Jitter,
}

pub const VARIANTS: [Variant; AUGMENTED_VARIANTS] = [
    Variant::TopLeft,
    Variant::TopRight,
    Variant::BottomLeft,
    Variant::BottomRight,
    Variant::Center,
    Variant::Bottom,
    Variant::Upper,
    Variant::Left,
    Variant::Right,
    Variant::Jitter,
];

/// Top-left corner of a `patch`-sized crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropOrigin {
    pub left: usize,
    pub top: usize,
}

fn crop_origins<R: Rng>(cfg: &AugmentConfig, rng: &mut R) -> [CropOrigin; 9] {
    let slack = NET_SIZE - cfg.patch;
    let jit = cfg.corner_jitter.min(slack);
    let mut j = || rng.random_range(0..=jit);
    let tl = CropOrigin { left: j(), top: j() };
    let tr = CropOrigin { left: slack - j(), top: j() };
    let bl = CropOrigin { left: j(), top: slack - j() };
    let br = CropOrigin { left: slack - j(), top: slack - j() };
    let mid = slack / 2;
    let cj = cfg.center_jitter.min(mid) as i64;
    let mut c = || (mid as i64 + rng.random_range(-cj..=cj)) as usize;
    let center = CropOrigin { left: c(), top: c() };
    // One-sided crops drop `slack` pixels from the named side and stay
    // centered on the other axis.
    let bottom = CropOrigin { left: mid, top: 0 };
    let upper = CropOrigin { left: mid, top: slack };
    let left = CropOrigin { left: slack, top: mid };
    let right = CropOrigin { left: 0, top: mid };
    [tl, tr, bl, br, center, bottom, upper, left, right]
}

fn crop_and_resize(input: &NetInput, origin: CropOrigin, patch: usize) -> NetInput {
    let mut data = Vec::with_capacity(patch * patch);
    let mut mask = Vec::with_capacity(patch * patch);
    for y in origin.top..origin.top + patch {
        let row = y * NET_SIZE + origin.left;
        data.extend_from_slice(&input.data[row..row + patch]);
        mask.extend_from_slice(&input.foreground[row..row + patch]);
    }
    // Values interpolate across the mask boundary; the mask marks outputs
    // that only saw foreground.
    let all = vec![true; patch * patch];
    let (values, _) = resample_bilinear(&data, &all, patch, patch, NET_SIZE, NET_SIZE);
    let (_, foreground) = resample_bilinear(&data, &mask, patch, patch, NET_SIZE, NET_SIZE);
    NetInput {
        data: values,
        foreground,
    }
}

/// Produces the ten variants in [`VARIANTS`] order. Labels carry over unchanged.
pub fn augment(input: &NetInput, seed: u64, cfg: &AugmentConfig) -> Result<Vec<NetInput>, PrepError> {
    if input.data.len() != NET_PIXELS || input.foreground.len() != NET_PIXELS {
        return Err(PrepError::Dimensions {
            width: input.data.len(),
            height: 1,
            reason: "augmentation expects a 64x64 input",
        });
    }
    if cfg.patch == 0 || cfg.patch > NET_SIZE {
        return Err(PrepError::Dimensions {
            width: cfg.patch,
            height: cfg.patch,
            reason: "patch must fit inside the 64x64 input",
        });
    }
    if !(cfg.noise_sigma >= 0.0) {
        return Err(PrepError::Degenerate("noise sigma must be non-negative"));
    }
    let mut rng = seeds::rng(seed);
    let mut out: Vec<NetInput> = crop_origins(cfg, &mut rng)
        .into_iter()
        .map(|o| crop_and_resize(input, o, cfg.patch))
        .collect();
    out.push(jitter(input, cfg.noise_sigma, &mut rng));
    debug_assert_eq!(out.len(), AUGMENTED_VARIANTS);
    Ok(out)
}

fn jitter<R: Rng>(input: &NetInput, sigma: f64, rng: &mut R) -> NetInput {
    let mut noisy = input.clone();
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("sigma validated");
        for v in &mut noisy.data {
            *v += normal.sample(rng);
        }
    }
    noisy
}

/// Crop origins drawn for `seed`, in [`VARIANTS`] order (first nine).
pub fn crop_plan(seed: u64, cfg: &AugmentConfig) -> [CropOrigin; 9] {
    crop_origins(cfg, &mut seeds::rng(seed))
}
