//! Dataset ingestion: depth formats, pose and calibration files, geometry
//! helpers, angle normalization and the fixed train/test split.

mod angles;
mod formats;
pub mod geometry;
mod labels;
mod layout;

pub use angles::{AngleNormalizer, DEFAULT_ANGLE_SCALES};
pub use formats::{
    decode_biwi_depth, decode_raw_depth, encode_biwi_depth, encode_raw_depth, load_biwi_depth,
    load_raw_depth,
};
pub use geometry::{
    euler_to_rotation, project_to_pixel, rotation_to_euler, EulerAngles, EulerConvention, Mat3,
    EULER_CONVENTION,
};
pub use labels::{
    format_calibration, format_pose, load_calibration, load_pose_file, parse_calibration,
    parse_pose, PoseLabel,
};
pub use layout::{
    canonical_sequence, make_split, write_dataset, DatasetIndex, DepthFormat, FrameEntry, Sample,
    CALIBRATION_FILE, SEQUENCE_COUNT, TEST_SEQUENCES,
};
