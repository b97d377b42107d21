//! Dataset directory layout and the train/test split.
//!
//! ```text
//! <root>/<seq>/depth.cal
//! <root>/<seq>/frame_<n>_depth.bin   (Biwi run-length)  or  frame_<n>_depth.raw
//! <root>/<seq>/frame_<n>_pose.txt
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::formats::{encode_biwi_depth, encode_raw_depth, load_biwi_depth, load_raw_depth};
use super::labels::{format_calibration, format_pose, load_calibration, load_pose_file, PoseLabel};
use crate::depth_prep::{CameraIntrinsics, DepthMap};
use crate::error::DatasetError;

pub const CALIBRATION_FILE: &str = "depth.cal";
pub const TEST_SEQUENCES: [&str; 2] = ["01", "12"];
pub const SEQUENCE_COUNT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepthFormat {
    #[default]
    Biwi,
    Raw,
}

impl DepthFormat {
    pub fn extension(self) -> &'static str {
        match self {
            DepthFormat::Biwi => "bin",
            DepthFormat::Raw => "raw",
        }
    }

    pub fn load(self, path: &Path) -> Result<DepthMap, DatasetError> {
        match self {
            DepthFormat::Biwi => load_biwi_depth(path),
            DepthFormat::Raw => load_raw_depth(path),
        }
    }

    pub fn encode(self, depth: &DepthMap) -> Vec<u8> {
        match self {
            DepthFormat::Biwi => encode_biwi_depth(depth),
            DepthFormat::Raw => encode_raw_depth(depth),
        }
    }
}

/// One labeled depth frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub depth: DepthMap,
    pub label: PoseLabel,
    pub intrinsics: CameraIntrinsics,
    pub subject_id: String,
    pub sequence_id: String,
    pub frame_id: String,
}

impl Sample {
    pub fn key(&self) -> String {
        format!("{}/{}", self.sequence_id, self.frame_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameEntry {
    pub sequence_id: String,
    pub frame_id: String,
    pub depth_path: PathBuf,
    pub pose_path: PathBuf,
}

/// File index built once, then read concurrently.
#[derive(Debug, Clone)]
pub struct DatasetIndex {
    pub format: DepthFormat,
    pub entries: Vec<FrameEntry>,
    pub calibrations: BTreeMap<String, CameraIntrinsics>,
}

/// Two-digit form for numeric sequence names so "1" and "01" agree.
pub fn canonical_sequence(id: &str) -> String {
    match id.parse::<u32>() {
        Ok(n) => format!("{n:02}"),
        Err(_) => id.to_string(),
    }
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let mut paths = std::fs::read_dir(dir)
        .map_err(|e| DatasetError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| DatasetError::io(dir, err)))
        .collect::<Result<Vec<_>, _>>()?;
    paths.sort();
    Ok(paths)
}

impl DatasetIndex {
    pub fn build(root: impl AsRef<Path>, format: DepthFormat) -> Result<Self, DatasetError> {
        let root = root.as_ref();
        let suffix = format!("_depth.{}", format.extension());
        let mut entries = Vec::new();
        let mut calibrations = BTreeMap::new();
        for seq_dir in read_dir_sorted(root)?.into_iter().filter(|p| p.is_dir()) {
            let Some(seq_name) = seq_dir.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let seq = canonical_sequence(seq_name);
            let mut found = false;
            for path in read_dir_sorted(&seq_dir)? {
                let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                    continue;
                };
                let Some(stem) = name.strip_prefix("frame_").and_then(|n| n.strip_suffix(&suffix))
                else {
                    continue;
                };
                let pose_path = seq_dir.join(format!("frame_{stem}_pose.txt"));
                if !pose_path.is_file() {
                    return Err(DatasetError::Config(format!(
                        "frame {} has no pose file",
                        path.display()
                    )));
                }
                entries.push(FrameEntry {
                    sequence_id: seq.clone(),
                    frame_id: stem.to_string(),
                    depth_path: path,
                    pose_path,
                });
                found = true;
            }
            if found {
                let k = load_calibration(seq_dir.join(CALIBRATION_FILE))?;
                calibrations.insert(seq, k);
            }
        }
        if entries.is_empty() {
            return Err(DatasetError::Config(format!(
                "no frames matching *{suffix} under {}",
                root.display()
            )));
        }
        Ok(Self {
            format,
            entries,
            calibrations,
        })
    }

    pub fn sequences(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| e.sequence_id.clone()).collect()
    }

    pub fn load(&self, entry: &FrameEntry) -> Result<Sample, DatasetError> {
        let depth = self.format.load(&entry.depth_path)?;
        let label = load_pose_file(&entry.pose_path)?;
        let intrinsics = self.calibrations[&entry.sequence_id];
        Ok(Sample {
            depth,
            label,
            intrinsics,
            subject_id: entry.sequence_id.clone(),
            sequence_id: entry.sequence_id.clone(),
            frame_id: entry.frame_id.clone(),
        })
    }

    /// Loads every listed entry in parallel, preserving order.
    pub fn load_all(&self, entries: &[FrameEntry]) -> Result<Vec<Sample>, DatasetError> {
        entries.par_iter().map(|e| self.load(e)).collect()
    }
}

/// Sequences 01 and 12 form the test set, everything else trains.
/// All 24 sequences must be present.
pub fn make_split<T>(
    items: Vec<T>,
    sequence_of: impl Fn(&T) -> &str,
) -> Result<(Vec<T>, Vec<T>), DatasetError> {
    let present: BTreeSet<String> = items
        .iter()
        .map(|t| canonical_sequence(sequence_of(t)))
        .collect();
    let missing: Vec<String> = (1..=SEQUENCE_COUNT)
        .map(|n| format!("{n:02}"))
        .filter(|s| !present.contains(s))
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::MissingSequences(missing));
    }
    Ok(items
        .into_iter()
        .partition(|t| !TEST_SEQUENCES.contains(&canonical_sequence(sequence_of(t)).as_str())))
}

/// Writes samples into the directory layout above, one calibration per sequence.
pub fn write_dataset(
    root: impl AsRef<Path>,
    samples: &[Sample],
    format: DepthFormat,
) -> Result<(), DatasetError> {
    let root = root.as_ref();
    let mut calibrated = BTreeSet::new();
    for s in samples {
        let dir = root.join(&s.sequence_id);
        std::fs::create_dir_all(&dir).map_err(|e| DatasetError::io(&dir, e))?;
        if calibrated.insert(s.sequence_id.clone()) {
            let cal = dir.join(CALIBRATION_FILE);
            let text = format_calibration(&s.intrinsics, s.depth.width(), s.depth.height());
            std::fs::write(&cal, text).map_err(|e| DatasetError::io(&cal, e))?;
        }
        let depth_path = dir.join(format!("frame_{}_depth.{}", s.frame_id, format.extension()));
        std::fs::write(&depth_path, format.encode(&s.depth))
            .map_err(|e| DatasetError::io(&depth_path, e))?;
        let pose_path = dir.join(format!("frame_{}_pose.txt", s.frame_id));
        std::fs::write(&pose_path, format_pose(&s.label))
            .map_err(|e| DatasetError::io(&pose_path, e))?;
    }
    Ok(())
}
