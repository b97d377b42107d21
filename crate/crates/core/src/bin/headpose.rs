use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use headpose::dataset_io::{
    load_calibration, load_pose_file, write_dataset, AngleNormalizer, DatasetIndex, DepthFormat, Sample,
};
use headpose::depth_prep::{PrepConfig, StretchMode};
use headpose::eval::{bench, emit_plot_data, evaluate, StdKind};
use headpose::nn::SgdConfig;
use headpose::pipeline::{hold_out, load_split, prepare_examples, prepare_sample};
use headpose::posenet::{build_model, train_with, Checkpoint, TrainConfig};
use headpose::seeds::RunSeeds;
use headpose::synthetic::{generate_dataset, SynthConfig};
use headpose::{augment::AugmentConfig, Error, Result};

#[derive(Parser)]
#[command(name = "headpose", version, about = "Head pose estimation from depth images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Biwi,
    Raw,
}

impl From<Format> for DepthFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Biwi => DepthFormat::Biwi,
            Format::Raw => DepthFormat::Raw,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Stretch {
    Span,
    Verbatim,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset root with one directory per sequence.
    #[arg(long)]
    data_root: PathBuf,
    #[arg(long, value_enum, default_value = "biwi")]
    format: Format,
}

#[derive(Args)]
struct PrepArgs {
    /// Assumed face width in millimeters.
    #[arg(long, default_value_t = 120.0)]
    face_width: f64,
    /// Foreground band around the head-center depth, millimeters.
    #[arg(long, default_value_t = 150.0)]
    band: f64,
    #[arg(long, value_enum, default_value = "span")]
    stretch: Stretch,
}

impl PrepArgs {
    fn config(&self) -> PrepConfig {
        PrepConfig {
            face_width_mm: self.face_width,
            band_mm: self.band,
            stretch: match self.stretch {
                Stretch::Span => StretchMode::ForegroundSpan,
                Stretch::Verbatim => StretchMode::Verbatim,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic dataset in the on-disk dataset layout.
    SynthGen {
        #[arg(long, default_value_t = 2400)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "biwi")]
        format: Format,
    },
    /// Write every frame's 64x64 network input as little-endian f64 plus an index.
    Preprocess {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        prep: PrepArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on the training sequences and write a checkpoint.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        prep: PrepArgs,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 5e-4)]
        weight_decay: f64,
        /// Keep the base learning rate for all epochs.
        #[arg(long)]
        constant_lr: bool,
        #[arg(long)]
        no_augment: bool,
        /// Fraction of training frames held out for validation.
        #[arg(long, default_value_t = 0.05)]
        val_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Checkpoint path. Per-epoch metrics go next to it as CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a checkpoint on the test sequences and write plot data.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        prep: PrepArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Report the std of signed instead of absolute errors.
        #[arg(long)]
        signed_std: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict angles for one depth frame.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        depth: PathBuf,
        #[arg(long, value_enum, default_value = "biwi")]
        format: Format,
        /// Calibration file holding the camera matrix.
        #[arg(long)]
        calibration: PathBuf,
        /// Head center "x,y,z" in millimeters.
        #[arg(long, conflicts_with = "pose", value_delimiter = ',', num_args = 3)]
        center: Option<Vec<f64>>,
        /// Pose file to take the head center from.
        #[arg(long)]
        pose: Option<PathBuf>,
        #[command(flatten)]
        prep: PrepArgs,
    },
    /// Time the forward pass, alone and with preprocessing.
    Bench {
        /// Checkpoint to time; a freshly initialized network otherwise.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        frames: usize,
        #[arg(long, default_value_t = 3)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn bench_sample(seed: u64) -> Result<Sample> {
    Ok(generate_dataset(1, &SynthConfig::default(), RunSeeds::from_seed(seed).data)?.remove(0))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SynthGen { n, seed, out, format } => {
            let samples = generate_dataset(n, &SynthConfig::default(), RunSeeds::from_seed(seed).data)?;
            write_dataset(&out, &samples, format.into())?;
            println!("wrote {n} frames to {}", out.display());
        }
        Command::Preprocess { data, prep, out } => {
            let index = DatasetIndex::build(&data.data_root, data.format.into())?;
            let samples = index.load_all(&index.entries)?;
            let examples = prepare_examples(&samples, &prep.config(), &AngleNormalizer::default())?;
            std::fs::create_dir_all(&out)?;
            let mut w = csv::Writer::from_path(out.join("index.csv"))?;
            w.write_record(["frame", "file", "pitch", "roll", "yaw"])?;
            for (s, ex) in samples.iter().zip(&examples) {
                let file = format!("{}_{}.f64", s.sequence_id, s.frame_id);
                let bytes: Vec<u8> = ex.input.data.iter().flat_map(|v| v.to_le_bytes()).collect();
                std::fs::write(out.join(&file), bytes)?;
                let e = s.label.euler_deg;
                w.write_record([s.key(), file, e.pitch.to_string(), e.roll.to_string(), e.yaw.to_string()])?;
            }
            w.flush()?;
            println!("preprocessed {} frames into {}", examples.len(), out.display());
        }
        Command::Train {
            data,
            prep,
            epochs,
            batch_size,
            lr,
            momentum,
            weight_decay,
            constant_lr,
            no_augment,
            val_fraction,
            seed,
            out,
        } => {
            let run = RunSeeds::from_seed(seed);
            let (train_samples, _) = load_split(&data.data_root, data.format.into())?;
            let normalizer = AngleNormalizer::default();
            let examples = prepare_examples(&train_samples, &prep.config(), &normalizer)?;
            let (train_set, val_set) = hold_out(examples, val_fraction, run.split);
            let mut sgd = SgdConfig {
                learning_rate: lr,
                momentum,
                weight_decay,
                schedule: Vec::new(),
            };
            if !constant_lr {
                sgd = sgd.with_step_schedule(epochs);
            }
            let cfg = TrainConfig {
                epochs,
                batch_size,
                sgd,
                augment: (!no_augment).then(AugmentConfig::default),
                seed,
                target_loss: None,
            };
            let mut model = build_model(run.init);
            let history_path = out.with_extension("history.csv");
            let mut history = csv::Writer::from_path(&history_path)?;
            history.write_record(["epoch", "lr", "train_loss", "val_loss", "val_mae_pitch", "val_mae_roll", "val_mae_yaw"])?;
            let mut write_err = None;
            let outcome = train_with(&mut model, &train_set, &val_set, &cfg, normalizer, |m| {
                let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
                let mae = m.val_mae_deg.map(|a| a.map(Some)).unwrap_or([None; 3]);
                let row = [
                    (m.epoch + 1).to_string(),
                    m.learning_rate.to_string(),
                    m.train_loss.to_string(),
                    opt(m.val_loss),
                    opt(mae[0]),
                    opt(mae[1]),
                    opt(mae[2]),
                ];
                if let Err(e) = history.write_record(row).and_then(|_| Ok(history.flush()?)) {
                    write_err.get_or_insert(e);
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            Checkpoint {
                model,
                epoch: outcome.history.len() as u64,
                seed,
            }
            .save(&out)?;
            println!(
                "trained {} epochs on {} frames (final loss {:.6}); checkpoint {}",
                epochs,
                train_set.len(),
                outcome.final_train_loss().unwrap_or(f64::NAN),
                out.display()
            );
        }
        Command::Eval {
            data,
            prep,
            checkpoint,
            signed_std,
            out,
        } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let (_, test) = load_split(&data.data_root, data.format.into())?;
            let kind = if signed_std { StdKind::SignedError } else { StdKind::AbsoluteError };
            let report = evaluate(&ck.model, &test, &prep.config(), kind, &data.data_root.display().to_string())?;
            emit_plot_data(&report, &out)?;
            let b = bench(&ck.model, &test[0], &prep.config(), 10, 3, 50)?;
            std::fs::write(out.join("bench.txt"), b.to_text())?;
            print!("{}", report.to_text());
            print!("{}", b.to_text());
        }
        Command::Predict {
            checkpoint,
            depth,
            format,
            calibration,
            center,
            pose,
            prep,
        } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let center = match (center, pose) {
                (Some(c), _) => [c[0], c[1], c[2]],
                (None, Some(p)) => load_pose_file(&p)?.head_center_mm,
                (None, None) => {
                    return Err(Error::Dataset(headpose::error::DatasetError::Config(
                        "pass --center or --pose to locate the head".into(),
                    )))
                }
            };
            let sample = Sample {
                depth: DepthFormat::from(format).load(&depth)?,
                label: headpose::dataset_io::PoseLabel::from_euler(Default::default(), center),
                intrinsics: load_calibration(&calibration)?,
                subject_id: String::new(),
                sequence_id: String::new(),
                frame_id: depth.display().to_string(),
            };
            let input = prepare_sample(&sample, &prep.config())?;
            let e = ck.model.predict(&input)?;
            println!("pitch {:.3} roll {:.3} yaw {:.3}", e.pitch, e.roll, e.yaw);
        }
        Command::Bench {
            checkpoint,
            frames,
            runs,
            seed,
            out,
        } => {
            let model = match checkpoint {
                Some(p) => Checkpoint::load(&p)?.model,
                None => build_model(RunSeeds::from_seed(seed).init),
            };
            let report = bench(&model, &bench_sample(seed)?, &PrepConfig::default(), 10, runs, frames)?;
            let text = report.to_text();
            print!("{text}");
            if let Some(p) = out {
                write_text(&p, &text)?;
            }
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
