//! Pose annotation and calibration text files.

use std::fmt::Write as _;
use std::path::Path;

use super::geometry::{
    euler_to_rotation, orthonormality_error, rotation_to_euler, EulerAngles, Mat3,
    EULER_CONVENTION, ORTHONORMAL_TOLERANCE,
};
use crate::depth_prep::CameraIntrinsics;
use crate::error::DatasetError;

/// Ground-truth head pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseLabel {
    pub rotation: Mat3,
    pub head_center_mm: [f64; 3],
    pub euler_deg: EulerAngles,
}

impl PoseLabel {
    /// Validates `rotation` and derives its Euler angles.
    pub fn from_rotation(rotation: Mat3, head_center_mm: [f64; 3]) -> Result<Self, DatasetError> {
        let deviation = orthonormality_error(&rotation);
        if !(deviation <= ORTHONORMAL_TOLERANCE) {
            return Err(DatasetError::NotOrthonormal { deviation });
        }
        let euler_deg = rotation_to_euler(&rotation, EULER_CONVENTION)?;
        Ok(Self {
            rotation,
            head_center_mm,
            euler_deg,
        })
    }

    /// Label whose Euler angles are exactly `euler_deg`.
    pub fn from_euler(euler_deg: EulerAngles, head_center_mm: [f64; 3]) -> Self {
        Self {
            rotation: euler_to_rotation(euler_deg, EULER_CONVENTION),
            head_center_mm,
            euler_deg,
        }
    }
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, DatasetError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetError::Parse(format!("malformed number {tok:?}")))
        })
        .collect()
}

/// Three rotation rows followed by the head center in millimeters.
pub fn parse_pose(text: &str) -> Result<PoseLabel, DatasetError> {
    let nums = parse_numbers(text)?;
    if nums.len() != 12 {
        return Err(DatasetError::Parse(format!(
            "pose file must hold 12 numbers (3x3 rotation + center), found {}",
            nums.len()
        )));
    }
    let rotation = [
        [nums[0], nums[1], nums[2]],
        [nums[3], nums[4], nums[5]],
        [nums[6], nums[7], nums[8]],
    ];
    PoseLabel::from_rotation(rotation, [nums[9], nums[10], nums[11]])
}

pub fn format_pose(label: &PoseLabel) -> String {
    let mut s = String::new();
    for row in &label.rotation {
        let _ = writeln!(s, "{} {} {} ", row[0], row[1], row[2]);
    }
    let c = label.head_center_mm;
    let _ = writeln!(s, "\n{} {} {} ", c[0], c[1], c[2]);
    s
}

pub fn load_pose_file(path: impl AsRef<Path>) -> Result<PoseLabel, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    parse_pose(&text)
}

/// Reads the intrinsics from a calibration file whose first nine numbers are
/// the row-major 3x3 camera matrix. Anything after them is ignored.
pub fn parse_calibration(text: &str) -> Result<CameraIntrinsics, DatasetError> {
    let nums = parse_numbers(text)?;
    if nums.len() < 9 {
        return Err(DatasetError::Parse(format!(
            "calibration needs a 3x3 camera matrix, found {} numbers",
            nums.len()
        )));
    }
    CameraIntrinsics::new(nums[0], nums[4], nums[2], nums[5])
        .map_err(|e| DatasetError::Parse(e.to_string()))
}

/// Writes a calibration file in the Biwi layout: camera matrix, distortion,
/// extrinsic rotation and translation, image size.
pub fn format_calibration(k: &CameraIntrinsics, width: usize, height: usize) -> String {
    format!(
        "{} 0 {} \n0 {} {} \n0 0 1 \n\n0 0 0 0 \n\n1 0 0 \n0 1 0 \n0 0 1 \n\n0 0 0 \n\n{} {}\n",
        k.fx, k.cx, k.fy, k.cy, width, height
    )
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<CameraIntrinsics, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    parse_calibration(&text)
}
