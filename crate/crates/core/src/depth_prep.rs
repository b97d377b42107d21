//! Turns a raw depth frame and a head-center annotation into the normalized
//! 64x64 network input.
//!
//! The stages run in a fixed order: dynamic crop, foreground segmentation,
//! bilinear resize, mean/variance normalization and the per-row foreground
//! stretch. Every stage is a pure function.

use crate::error::PrepError;
use crate::grid;

/// Side length of the network input.
pub const NET_SIZE: usize = 64;
/// Number of pixels of the network input.
pub const NET_PIXELS: usize = NET_SIZE * NET_SIZE;
/// Physical width of a generic face, in millimeters.
pub const DEFAULT_FACE_WIDTH_MM: f64 = 120.0;
/// Half-width of the depth band around the head center kept as foreground.
pub const DEFAULT_FOREGROUND_BAND_MM: f64 = 150.0;

/// Depth image in millimeters with a per-pixel validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    pub fn new(
        width: usize,
        height: usize,
        data: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self, PrepError> {
        if width == 0 || height == 0 {
            return Err(PrepError::Dimensions {
                width,
                height,
                reason: "width and height must be positive",
            });
        }
        if data.len() != width * height || valid.len() != width * height {
            return Err(PrepError::Dimensions {
                width,
                height,
                reason: "buffer length does not match width*height",
            });
        }
        Ok(Self {
            width,
            height,
            data,
            valid,
        })
    }

    /// Builds a map from sensor readings where 0 marks a missing sample.
    pub fn from_millimeters(width: usize, height: usize, mm: &[u16]) -> Result<Self, PrepError> {
        let data = mm.iter().map(|&v| f64::from(v)).collect();
        let valid = mm.iter().map(|&v| v != 0).collect();
        Self::new(width, height, data, valid)
    }

    /// Builds a fully valid map.
    pub fn from_values(width: usize, height: usize, data: Vec<f64>) -> Result<Self, PrepError> {
        let valid = vec![true; data.len()];
        Self::new(width, height, data, valid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        (x < self.width && y < self.height && self.valid[i]).then(|| self.data[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Depth values rounded to whole millimeters, 0 where invalid.
    pub fn to_millimeters(&self) -> Vec<u16> {
        self.data
            .iter()
            .zip(&self.valid)
            .map(|(&d, &ok)| if ok { d.round().clamp(1.0, 65535.0) as u16 } else { 0 })
            .collect()
    }
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, PrepError> {
        if !(fx > 0.0 && fy > 0.0) || !cx.is_finite() || !cy.is_finite() {
            return Err(PrepError::Degenerate("focal lengths must be positive"));
        }
        Ok(Self { fx, fy, cx, cy })
    }
}

/// Crop rectangle in pixels. `center` plus `width`/`height`; the left/top edge
/// is `center - size / 2` with integer division.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropWindow {
    pub center_x: i64,
    pub center_y: i64,
    pub width: usize,
    pub height: usize,
}

impl CropWindow {
    pub fn left(&self) -> i64 {
        self.center_x - (self.width / 2) as i64
    }

    pub fn top(&self) -> i64 {
        self.center_y - (self.height / 2) as i64
    }
}

/// Normalized 64x64 network input with its foreground mask.
#[derive(Debug, Clone, PartialEq)]
pub struct NetInput {
    pub data: Vec<f64>,
    pub foreground: Vec<bool>,
}

impl NetInput {
    pub fn new(data: Vec<f64>, foreground: Vec<bool>) -> Result<Self, PrepError> {
        if data.len() != NET_PIXELS || foreground.len() != NET_PIXELS {
            return Err(PrepError::Dimensions {
                width: data.len(),
                height: 1,
                reason: "network input must hold 64x64 values",
            });
        }
        Ok(Self { data, foreground })
    }

    pub fn zeros() -> Self {
        Self {
            data: vec![0.0; NET_PIXELS],
            foreground: vec![false; NET_PIXELS],
        }
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * NET_SIZE..(y + 1) * NET_SIZE]
    }
}

/// How the per-row stretch maps output columns onto the source row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StretchMode {
    /// Resample the foreground span `[x_min, x_max]` across the full row.
    #[default]
    ForegroundSpan,
    /// Literal form without the `x_min` offset: sampling starts at column 0
    /// and the upper tap is accepted up to index `w`, reading 0 past the row.
    Verbatim,
}

/// Settings for [`preprocess`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepConfig {
    pub face_width_mm: f64,
    pub band_mm: f64,
    pub stretch: StretchMode,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            face_width_mm: DEFAULT_FACE_WIDTH_MM,
            band_mm: DEFAULT_FOREGROUND_BAND_MM,
            stretch: StretchMode::ForegroundSpan,
        }
    }
}

/// Window of `f * R / Z` pixels per axis centered on the head.
pub fn compute_crop_window(
    intrinsics: &CameraIntrinsics,
    head_center_px: (f64, f64),
    distance_mm: f64,
    face_width_mm: f64,
) -> Result<CropWindow, PrepError> {
    if !(distance_mm > 0.0) || !distance_mm.is_finite() {
        return Err(PrepError::InvalidDistance(distance_mm));
    }
    if !(face_width_mm > 0.0) {
        return Err(PrepError::InvalidFaceWidth(face_width_mm));
    }
    let width = (intrinsics.fx * face_width_mm / distance_mm).round().max(1.0) as usize;
    let height = (intrinsics.fy * face_width_mm / distance_mm).round().max(1.0) as usize;
    Ok(CropWindow {
        center_x: head_center_px.0.round() as i64,
        center_y: head_center_px.1.round() as i64,
        width,
        height,
    })
}

/// Copies the window out of `depth`. The output always has the window's size;
/// pixels falling outside the source image are invalid.
pub fn crop(depth: &DepthMap, window: &CropWindow) -> Result<DepthMap, PrepError> {
    let (left, top) = (window.left(), window.top());
    let (w, h) = (depth.width as i64, depth.height as i64);
    let intersects = left < w
        && top < h
        && left + window.width as i64 > 0
        && top + window.height as i64 > 0;
    if !intersects || window.width == 0 || window.height == 0 {
        return Err(PrepError::EmptyCrop {
            width: depth.width,
            height: depth.height,
        });
    }
    let mut data = vec![0.0; window.width * window.height];
    let mut valid = vec![false; window.width * window.height];
    for y in 0..window.height {
        let sy = top + y as i64;
        if sy < 0 || sy >= h {
            continue;
        }
        for x in 0..window.width {
            let sx = left + x as i64;
            if sx < 0 || sx >= w {
                continue;
            }
            let s = sy as usize * depth.width + sx as usize;
            let o = y * window.width + x;
            data[o] = depth.data[s];
            valid[o] = depth.valid[s];
        }
    }
    DepthMap::new(window.width, window.height, data, valid)
}

/// Keeps valid pixels whose depth lies within `band_mm` of `distance_mm`.
pub fn segment_foreground(
    depth: &DepthMap,
    distance_mm: f64,
    band_mm: f64,
) -> Result<DepthMap, PrepError> {
    if !(band_mm > 0.0) {
        return Err(PrepError::InvalidBand(band_mm));
    }
    let valid = depth
        .data
        .iter()
        .zip(&depth.valid)
        .map(|(&d, &ok)| ok && (d - distance_mm).abs() <= band_mm)
        .collect();
    Ok(DepthMap {
        valid,
        ..depth.clone()
    })
}

/// Bilinear resize to the 64x64 input resolution.
pub fn resize_to_64(depth: &DepthMap) -> Result<DepthMap, PrepError> {
    resize(depth, NET_SIZE, NET_SIZE)
}

pub fn resize(depth: &DepthMap, width: usize, height: usize) -> Result<DepthMap, PrepError> {
    if depth.data.is_empty() || width == 0 || height == 0 {
        return Err(PrepError::EmptyInput);
    }
    let (data, valid) = grid::resample_bilinear(
        &depth.data,
        &depth.valid,
        depth.width,
        depth.height,
        width,
        height,
    );
    DepthMap::new(width, height, data, valid)
}

/// Zero mean and unit population variance over the valid pixels; invalid
/// pixels become 0 and are carried as background.
pub fn normalize(depth: &DepthMap) -> Result<NetInput, PrepError> {
    if depth.width != NET_SIZE || depth.height != NET_SIZE {
        return Err(PrepError::Dimensions {
            width: depth.width,
            height: depth.height,
            reason: "normalize expects a 64x64 map",
        });
    }
    let valid: Vec<f64> = depth
        .data
        .iter()
        .zip(&depth.valid)
        .filter_map(|(&d, &ok)| ok.then_some(d))
        .collect();
    if valid.len() < 2 {
        return Err(PrepError::Degenerate("fewer than two valid pixels"));
    }
    let n = valid.len() as f64;
    let mean = valid.iter().sum::<f64>() / n;
    let var = valid.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if !(var > 0.0) || !var.is_finite() {
        return Err(PrepError::Degenerate("valid region has constant depth"));
    }
    let std = var.sqrt();
    let data = depth
        .data
        .iter()
        .zip(&depth.valid)
        .map(|(&d, &ok)| if ok { (d - mean) / std } else { 0.0 })
        .collect();
    Ok(NetInput {
        data,
        foreground: depth.valid.clone(),
    })
}

/// Stretches each row's foreground span across the full row width.
///
/// Rows without foreground stay zero; a single foreground pixel fills its row.
pub fn row_stretch(input: &NetInput, mode: StretchMode) -> NetInput {
    let w = NET_SIZE;
    let mut out = NetInput::zeros();
    for y in 0..NET_SIZE {
        let row = input.row(y);
        let mask = &input.foreground[y * w..(y + 1) * w];
        let (Some(x_min), Some(x_max)) = (
            mask.iter().position(|&m| m),
            mask.iter().rposition(|&m| m),
        ) else {
            continue;
        };
        let out_row = &mut out.data[y * w..(y + 1) * w];
        if x_min == x_max {
            out_row.fill(row[x_min]);
        } else {
            stretch_row(row, out_row, x_min, x_max, mode);
        }
        out.foreground[y * w..(y + 1) * w].fill(true);
    }
    out
}

/// Resamples `row[x_min..=x_max]` across all of `out` by linear interpolation.
/// Requires `x_min < x_max < row.len()` and `out.len() == row.len()`.
pub fn stretch_row(row: &[f64], out: &mut [f64], x_min: usize, x_max: usize, mode: StretchMode) {
    let w = row.len();
    let span = (x_max - x_min) as f64;
    let last = (w - 1) as f64;
    let (offset, upper_bound) = match mode {
        StretchMode::ForegroundSpan => (x_min as f64, w - 1),
        StretchMode::Verbatim => (0.0, w),
    };
    let sample = |i: usize| row.get(i).copied().unwrap_or(0.0);
    for (x, o) in out.iter_mut().enumerate() {
        // x * span is an exact integer, so the endpoints land exactly on x_min and x_max.
        let x_src = offset + (x as f64 * span) / last;
        let x1 = x_src.floor() as usize;
        let x2 = x1 + 1;
        *o = if x2 <= upper_bound {
            let lambda = x2 as f64 - x_src;
            sample(x1) * lambda + sample(x2) * (1.0 - lambda)
        } else {
            sample(x1)
        };
    }
}

/// Full pipeline: crop, segment, resize, normalize, stretch.
pub fn preprocess(
    depth: &DepthMap,
    intrinsics: &CameraIntrinsics,
    head_center_px: (f64, f64),
    distance_mm: f64,
    config: &PrepConfig,
) -> Result<NetInput, PrepError> {
    let window =
        compute_crop_window(intrinsics, head_center_px, distance_mm, config.face_width_mm)?;
    let cropped = crop(depth, &window)?;
    let fg = segment_foreground(&cropped, distance_mm, config.band_mm)?;
    let resized = resize_to_64(&fg)?;
    let normalized = normalize(&resized)?;
    Ok(row_stretch(&normalized, config.stretch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinect_like() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0).unwrap()
    }

    fn net_input_from_rows(rows: &[(Vec<f64>, Vec<bool>)]) -> NetInput {
        let mut input = NetInput::zeros();
        for (y, (vals, mask)) in rows.iter().enumerate() {
            input.data[y * NET_SIZE..(y + 1) * NET_SIZE].copy_from_slice(vals);
            input.foreground[y * NET_SIZE..(y + 1) * NET_SIZE].copy_from_slice(mask);
        }
        input
    }

    #[test]
    fn crop_window_scales_inversely_with_distance() {
        let w = compute_crop_window(&kinect_like(), (320.0, 240.0), 1000.0, 120.0).unwrap();
        assert_eq!((w.width, w.height), (60, 60));
        assert_eq!((w.center_x, w.center_y), (320, 240));
        let w = compute_crop_window(&kinect_like(), (320.0, 240.0), 600.0, 120.0).unwrap();
        assert_eq!((w.width, w.height), (100, 100));
    }

    #[test]
    fn crop_window_rejects_non_positive_distance() {
        for z in [0.0, -5.0, f64::NAN] {
            assert!(matches!(
                compute_crop_window(&kinect_like(), (0.0, 0.0), z, 120.0),
                Err(PrepError::InvalidDistance(_))
            ));
        }
    }

    #[test]
    fn crop_of_whole_map_is_identity() {
        let map = DepthMap::from_values(4, 4, (0..16).map(f64::from).collect()).unwrap();
        let window = CropWindow {
            center_x: 2,
            center_y: 2,
            width: 4,
            height: 4,
        };
        assert_eq!(crop(&map, &window).unwrap(), map);
    }

    #[test]
    fn crop_marks_outside_pixels_invalid() {
        let map = DepthMap::from_values(4, 4, vec![700.0; 16]).unwrap();
        let window = CropWindow {
            center_x: 0,
            center_y: 2,
            width: 4,
            height: 4,
        };
        let out = crop(&map, &window).unwrap();
        assert_eq!((out.width(), out.height()), (4, 4));
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(out.valid_mask()[y * 4 + x], x >= 2, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn crop_fully_outside_fails() {
        let map = DepthMap::from_values(4, 4, vec![700.0; 16]).unwrap();
        let window = CropWindow {
            center_x: 40,
            center_y: 2,
            width: 4,
            height: 4,
        };
        assert!(matches!(crop(&map, &window), Err(PrepError::EmptyCrop { .. })));
    }

    #[test]
    fn foreground_band_threshold() {
        let map = DepthMap::from_values(3, 1, vec![900.0, 1000.0, 1400.0]).unwrap();
        let fg = segment_foreground(&map, 1000.0, 150.0).unwrap();
        assert_eq!(fg.valid_mask(), &[true, true, false]);
        let flat = DepthMap::from_values(2, 2, vec![1000.0; 4]).unwrap();
        assert_eq!(
            segment_foreground(&flat, 1000.0, 150.0).unwrap().valid_count(),
            4
        );
        assert!(matches!(
            segment_foreground(&map, 1000.0, 0.0),
            Err(PrepError::InvalidBand(_))
        ));
    }

    #[test]
    fn segment_keeps_invalid_pixels_invalid() {
        let map = DepthMap::new(2, 1, vec![1000.0, 1000.0], vec![false, true]).unwrap();
        let fg = segment_foreground(&map, 1000.0, 150.0).unwrap();
        assert_eq!(fg.valid_mask(), &[false, true]);
    }

    #[test]
    fn resize_identity_at_64() {
        let data: Vec<f64> = (0..NET_PIXELS).map(|i| (i as f64 * 0.37).sin() * 50.0 + 900.0).collect();
        let mut valid = vec![true; NET_PIXELS];
        valid[77] = false;
        let map = DepthMap::new(64, 64, data, valid).unwrap();
        let out = resize_to_64(&map).unwrap();
        assert_eq!(out.valid_mask(), map.valid_mask());
        for (a, b) in out.data().iter().zip(map.data()).zip(map.valid_mask()).filter(|(_, &v)| v).map(|(p, _)| p) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn resize_preserves_constants() {
        let map = DepthMap::from_values(128, 128, vec![800.0; 128 * 128]).unwrap();
        let out = resize_to_64(&map).unwrap();
        assert!(out.data().iter().all(|&v| v == 800.0));
        assert_eq!(out.valid_count(), NET_PIXELS);
    }

    #[test]
    fn resize_round_trip_stays_in_range() {
        let map = DepthMap::from_values(2, 2, vec![0.0, 2.0, 0.0, 2.0]).unwrap();
        let down = resize(&map, 1, 1).unwrap();
        let up = resize(&down, 2, 2).unwrap();
        for v in down.data().iter().chain(up.data()) {
            assert!((0.0..=2.0).contains(v));
        }
        let big = resize(&map, 64, 64).unwrap();
        assert!(big.data().iter().all(|v| (0.0..=2.0).contains(v)));
    }

    #[test]
    fn resize_rejects_empty_target() {
        let map = DepthMap::from_values(2, 2, vec![1.0; 4]).unwrap();
        assert!(matches!(resize(&map, 0, 3), Err(PrepError::EmptyInput)));
    }

    fn tile_64(pattern: &[f64]) -> DepthMap {
        let data = (0..NET_PIXELS).map(|i| pattern[i % pattern.len()]).collect();
        DepthMap::from_values(64, 64, data).unwrap()
    }

    #[test]
    fn normalize_hand_example() {
        // Columns alternate 1 and 3: mean 2, population std 1.
        let out = normalize(&tile_64(&[1.0, 3.0])).unwrap();
        assert_eq!(&out.data[..4], &[-1.0, 1.0, -1.0, 1.0]);
        assert!(out.foreground.iter().all(|&m| m));
    }

    #[test]
    fn normalize_is_idempotent() {
        let map = tile_64(&[812.0, 803.5, 790.25, 845.0, 799.0]);
        let once = normalize(&map).unwrap();
        let again = normalize(&DepthMap::from_values(64, 64, once.data.clone()).unwrap()).unwrap();
        for (a, b) in once.data.iter().zip(&again.data) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_constant_and_empty() {
        assert!(matches!(
            normalize(&tile_64(&[5.0])),
            Err(PrepError::Degenerate(_))
        ));
        let empty = DepthMap::new(64, 64, vec![1.0; NET_PIXELS], vec![false; NET_PIXELS]).unwrap();
        assert!(matches!(normalize(&empty), Err(PrepError::Degenerate(_))));
    }

    #[test]
    fn normalize_zeroes_invalid_pixels() {
        let mut valid = vec![true; NET_PIXELS];
        valid[0] = false;
        let data = (0..NET_PIXELS).map(|i| 700.0 + (i % 13) as f64).collect();
        let out = normalize(&DepthMap::new(64, 64, data, valid).unwrap()).unwrap();
        assert_eq!(out.data[0], 0.0);
        assert!(!out.foreground[0]);
    }

    #[test]
    fn stretch_worked_example() {
        // w = 5 analogue of the worked example, evaluated with the same kernel.
        let row = [0.0, 0.0, 5.0, 7.0, 0.0];
        let mut out = [0.0; 5];
        stretch_row(&row, &mut out, 2, 3, StretchMode::ForegroundSpan);
        assert_eq!(out, [5.0, 5.5, 6.0, 6.5, 7.0]);
    }

    #[test]
    fn stretch_verbatim_samples_from_column_zero() {
        let row = [1.0, 3.0, 5.0, 7.0, 0.0];
        let mut out = [0.0; 5];
        stretch_row(&row, &mut out, 2, 3, StretchMode::Verbatim);
        assert_eq!(out, [1.0, 1.5, 2.0, 2.5, 3.0]);
        // Full-span verbatim reaches x2 = w on the last column and reads 0 weight past the row.
        let mut full = [0.0; 5];
        stretch_row(&row, &mut full, 0, 4, StretchMode::Verbatim);
        assert_eq!(full, row);
    }

    #[test]
    fn stretch_degenerate_rows() {
        let mut one = vec![false; NET_SIZE];
        one[10] = true;
        let mut vals = vec![0.0; NET_SIZE];
        vals[10] = 0.75;
        let input = net_input_from_rows(&[
            (vec![0.0; NET_SIZE], vec![false; NET_SIZE]),
            (vals, one),
        ]);
        let out = row_stretch(&input, StretchMode::ForegroundSpan);
        assert!(out.row(0).iter().all(|&v| v == 0.0));
        assert!(out.foreground[..NET_SIZE].iter().all(|&m| !m));
        assert!(out.row(1).iter().all(|&v| v == 0.75));
        assert!(out.foreground[NET_SIZE..2 * NET_SIZE].iter().all(|&m| m));
    }

    proptest! {
        #[test]
        fn crop_window_homogeneous(z in 300.0f64..3000.0, f in 200.0f64..700.0) {
            let k = CameraIntrinsics::new(f, f, 0.0, 0.0).unwrap();
            let near = compute_crop_window(&k, (0.0, 0.0), z, 120.0).unwrap();
            let far = compute_crop_window(&k, (0.0, 0.0), 2.0 * z, 120.0).unwrap();
            let diff = near.width as i64 - 2 * far.width as i64;
            prop_assert!(diff.abs() <= 1, "{} vs {}", near.width, far.width);
        }

        #[test]
        fn normalize_moments(values in prop::collection::vec(-5000.0f64..5000.0, NET_PIXELS),
                             holes in prop::collection::vec(any::<bool>(), NET_PIXELS)) {
            let valid: Vec<bool> = holes.iter().map(|h| !h).collect();
            let map = DepthMap::new(64, 64, values, valid).unwrap();
            if let Ok(out) = normalize(&map) {
                let fg: Vec<f64> = out.data.iter().zip(&out.foreground).filter(|(_, &m)| m).map(|(v, _)| *v).collect();
                let n = fg.len() as f64;
                let mean = fg.iter().sum::<f64>() / n;
                let var = fg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() <= 1e-6);
                prop_assert!((var - 1.0).abs() <= 1e-6);
                prop_assert!(out.data.iter().all(|v| v.is_finite()));
            }
        }

        #[test]
        fn stretch_full_row_identity(values in prop::collection::vec(-3.0f64..3.0, NET_SIZE)) {
            let input = net_input_from_rows(&[(values.clone(), vec![true; NET_SIZE])]);
            let out = row_stretch(&input, StretchMode::ForegroundSpan);
            for (a, b) in out.row(0).iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn stretch_within_foreground_range(values in prop::collection::vec(-3.0f64..3.0, NET_SIZE),
                                           lo in 0usize..32, len in 1usize..32) {
            let hi = lo + len;
            let mask: Vec<bool> = (0..NET_SIZE).map(|x| x >= lo && x <= hi).collect();
            let vals: Vec<f64> = values.iter().zip(&mask).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
            let input = net_input_from_rows(&[(vals.clone(), mask.clone())]);
            let out = row_stretch(&input, StretchMode::ForegroundSpan);
            let fg = vals[lo..=hi].iter();
            let min = fg.clone().cloned().fold(f64::INFINITY, f64::min);
            let max = fg.cloned().fold(f64::NEG_INFINITY, f64::max);
            for &v in out.row(0) {
                prop_assert!(v >= min - 1e-12 && v <= max + 1e-12);
            }
        }
    }
}
