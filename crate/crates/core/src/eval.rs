//! Per-angle error statistics, timing and plot-data export.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::dataset_io::Sample;
use crate::depth_prep::{NetInput, PrepConfig};
use crate::error::{Error, Result};
use crate::pipeline::prepare_sample;
use crate::posenet::PoseNet;

pub const ANGLE_NAMES: [&str; 3] = ["pitch", "roll", "yaw"];

/// Which spread the report's `std` column describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdKind {
    /// Standard deviation of |pred - gt|.
    #[default]
    AbsoluteError,
    /// Standard deviation of pred - gt.
    SignedError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub key: String,
    /// Ground truth (pitch, roll, yaw) in degrees.
    pub truth: [f64; 3],
    pub predicted: [f64; 3],
}

impl FrameRecord {
    pub fn signed_error(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.predicted[i] - self.truth[i])
    }

    pub fn abs_error(&self) -> [f64; 3] {
        self.signed_error().map(f64::abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    /// Preprocessing plus forward pass.
    pub inclusive_ms_per_frame: f64,
    pub forward_ms_per_frame: f64,
}

impl Timing {
    pub fn inclusive_fps(&self) -> f64 {
        1000.0 / self.inclusive_ms_per_frame
    }

    pub fn forward_fps(&self) -> f64 {
        1000.0 / self.forward_ms_per_frame
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_id: String,
    pub dataset_id: String,
    pub records: Vec<FrameRecord>,
    pub mae_deg: [f64; 3],
    pub std_deg: [f64; 3],
    pub std_kind: StdKind,
    pub timing: Option<Timing>,
}

fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

impl EvalReport {
    pub fn from_records(
        records: Vec<FrameRecord>,
        std_kind: StdKind,
        model_id: impl Into<String>,
        dataset_id: impl Into<String>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyTestSet);
        }
        let n = records.len() as f64;
        let mae_deg = [0, 1, 2].map(|i| records.iter().map(|r| r.abs_error()[i]).sum::<f64>() / n);
        let std_deg = [0, 1, 2].map(|i| match std_kind {
            StdKind::AbsoluteError => population_std(records.iter().map(move |r| r.abs_error()[i])),
            StdKind::SignedError => population_std(records.iter().map(move |r| r.signed_error()[i])),
        });
        Ok(Self {
            model_id: model_id.into(),
            dataset_id: dataset_id.into(),
            records,
            mae_deg,
            std_deg,
            std_kind,
            timing: None,
        })
    }

    /// Plain-text summary: one `angle  MAE +- std` line per angle plus timing.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model:   {}", self.model_id);
        let _ = writeln!(s, "dataset: {}", self.dataset_id);
        let _ = writeln!(s, "frames:  {}", self.records.len());
        let kind = match self.std_kind {
            StdKind::AbsoluteError => "absolute",
            StdKind::SignedError => "signed",
        };
        let _ = writeln!(s, "error (deg, MAE +- std of {kind} error):");
        for i in 0..3 {
            let _ = writeln!(s, "  {:<6} {:6.2} +- {:5.2}", ANGLE_NAMES[i], self.mae_deg[i], self.std_deg[i]);
        }
        if let Some(t) = self.timing {
            let _ = writeln!(
                s,
                "timing:  {:.2} ms/frame inclusive ({:.1} frames/s), {:.2} ms/frame forward only ({:.1} frames/s)",
                t.inclusive_ms_per_frame,
                t.inclusive_fps(),
                t.forward_ms_per_frame,
                t.forward_fps()
            );
        }
        s
    }
}

/// Predicts every sample around its annotated head center and scores the
/// predictions against the labels. Frames are processed in parallel.
pub fn evaluate(
    model: &PoseNet,
    samples: &[Sample],
    prep: &PrepConfig,
    std_kind: StdKind,
    dataset_id: &str,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let per: Vec<(FrameRecord, f64, f64)> = samples
        .par_iter()
        .map(|s| {
            let start = Instant::now();
            let input = prepare_sample(s, prep)?;
            let fwd = Instant::now();
            let predicted = model.predict(&input)?.to_array();
            let end = Instant::now();
            Ok((
                FrameRecord {
                    key: s.key(),
                    truth: s.label.euler_deg.to_array(),
                    predicted,
                },
                (end - start).as_secs_f64() * 1e3,
                (end - fwd).as_secs_f64() * 1e3,
            ))
        })
        .collect::<Result<_>>()?;
    let n = per.len() as f64;
    let timing = Timing {
        inclusive_ms_per_frame: per.iter().map(|p| p.1).sum::<f64>() / n,
        forward_ms_per_frame: per.iter().map(|p| p.2).sum::<f64>() / n,
    };
    let records = per.into_iter().map(|p| p.0).collect();
    let mut report = EvalReport::from_records(records, std_kind, model.architecture(), dataset_id)?;
    report.timing = Some(timing);
    Ok(report)
}

/// Counts of absolute error per 1-degree bin, one row per bin, `[pitch, roll, yaw]`.
pub fn error_histogram(report: &EvalReport) -> Vec<[usize; 3]> {
    let bin = |e: f64| e.floor() as usize;
    let bins = report
        .records
        .iter()
        .flat_map(|r| r.abs_error())
        .map(bin)
        .max()
        .map_or(1, |m| m + 1);
    let mut hist = vec![[0usize; 3]; bins];
    for r in &report.records {
        for (i, e) in r.abs_error().into_iter().enumerate() {
            hist[bin(e)][i] += 1;
        }
    }
    hist
}

/// Writes `frames.csv` (per-frame truth, prediction and absolute error),
/// `histogram.csv` (1-degree bins) and `report.txt` into `dir`.
pub fn emit_plot_data(report: &EvalReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("frames.csv"))?;
    w.write_record([
        "frame", "gt_pitch", "pred_pitch", "gt_roll", "pred_roll", "gt_yaw", "pred_yaw", "err_pitch",
        "err_roll", "err_yaw",
    ])?;
    for r in &report.records {
        let e = r.abs_error();
        let mut row = vec![r.key.clone()];
        for i in 0..3 {
            row.push(r.truth[i].to_string());
            row.push(r.predicted[i].to_string());
        }
        row.extend(e.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("histogram.csv"))?;
    w.write_record(["bin_start_deg", "bin_end_deg", "pitch", "roll", "yaw"])?;
    for (b, counts) in error_histogram(report).iter().enumerate() {
        w.write_record([
            b.to_string(),
            (b + 1).to_string(),
            counts[0].to_string(),
            counts[1].to_string(),
            counts[2].to_string(),
        ])?;
    }
    w.flush()?;

    std::fs::write(dir.join("report.txt"), report.to_text())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub frames_per_run: usize,
    /// Forward-only ms/frame of each timed run.
    pub forward_runs_ms: Vec<f64>,
    /// Preprocessing plus forward ms/frame of each timed run.
    pub inclusive_runs_ms: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl BenchReport {
    pub fn timing(&self) -> Timing {
        Timing {
            inclusive_ms_per_frame: mean(&self.inclusive_runs_ms),
            forward_ms_per_frame: mean(&self.forward_runs_ms),
        }
    }

    /// Largest relative deviation of a forward run from the mean.
    pub fn forward_spread(&self) -> f64 {
        let m = mean(&self.forward_runs_ms);
        self.forward_runs_ms.iter().map(|r| (r - m).abs() / m).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let t = self.timing();
        let mut s = String::new();
        let _ = writeln!(s, "frames per run: {}", self.frames_per_run);
        let _ = writeln!(s, "forward runs (ms/frame): {:?}", self.forward_runs_ms);
        let _ = writeln!(s, "inclusive runs (ms/frame): {:?}", self.inclusive_runs_ms);
        let _ = writeln!(
            s,
            "forward:   {:.3} ms/frame, {:.1} frames/s",
            t.forward_ms_per_frame,
            t.forward_fps()
        );
        let _ = writeln!(
            s,
            "inclusive: {:.3} ms/frame, {:.1} frames/s",
            t.inclusive_ms_per_frame,
            t.inclusive_fps()
        );
        s
    }
}

/// Single-threaded warm loop: `warmup` untimed frames, then `runs` timed runs
/// of `frames` frames each, forward-only and with preprocessing.
pub fn bench(
    model: &PoseNet,
    sample: &Sample,
    prep: &PrepConfig,
    warmup: usize,
    runs: usize,
    frames: usize,
) -> Result<BenchReport> {
    let input: NetInput = prepare_sample(sample, prep)?;
    for _ in 0..warmup {
        std::hint::black_box(model.forward_raw(&input)?);
    }
    let runs = runs.max(1);
    let frames = frames.max(1);
    let mut forward_runs_ms = Vec::with_capacity(runs);
    let mut inclusive_runs_ms = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        for _ in 0..frames {
            std::hint::black_box(model.forward_raw(std::hint::black_box(&input))?);
        }
        forward_runs_ms.push(start.elapsed().as_secs_f64() * 1e3 / frames as f64);

        let start = Instant::now();
        for _ in 0..frames {
            let x = prepare_sample(std::hint::black_box(sample), prep)?;
            std::hint::black_box(model.forward_raw(&x)?);
        }
        inclusive_runs_ms.push(start.elapsed().as_secs_f64() * 1e3 / frames as f64);
    }
    Ok(BenchReport {
        frames_per_run: frames,
        forward_runs_ms,
        inclusive_runs_ms,
    })
}
