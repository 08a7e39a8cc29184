use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::checkpoint::Checkpoint;
use super::config::RunConfig;
use super::train::{fit, load_split, predict_levels, EpochLog};
use crate::error::{Error, Result};
use crate::metrics::{classification_report, psnr_frames, MetricsReport, Psnr};
use crate::model::{build_model, ModelId};
use crate::preprocess::frame_to_tensor_sized;
use crate::synth::{build_dataset, DatasetManifest, Frame, NoiseLevel, Split, MANIFEST_FILE};

/// Process exit status for an error: 1 usage, 2 data, 3 numeric failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::UnknownModel(_) | Error::InvalidLevel(_) => 1,
        Error::NonFinite(_) => 3,
        _ => 2,
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a manifest file, as lowercase hex.
pub fn manifest_digest(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::at(path))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(Error::at(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(Error::at(path))
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSummary {
    pub out_dir: PathBuf,
    /// `[level][split]` frame counts.
    pub counts: [[usize; 3]; 5],
    pub digest: String,
}

impl fmt::Display for GenSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset: {}", self.out_dir.display())?;
        writeln!(f, "level\ttrain\tval\ttest")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(f, "{}\t{}\t{}\t{}", k + 1, c[0], c[1], c[2])?;
        }
        let total: usize = self.counts.iter().flatten().sum();
        writeln!(f, "total\t{total}")?;
        write!(f, "manifest sha256 {}", self.digest)
    }
}

/// Generates a dataset into `--out` (or the default output directory).
pub fn cmd_gen(cfg: &RunConfig) -> Result<GenSummary> {
    let out_dir = cfg.out_dir("dataset");
    let manifest = build_dataset(&out_dir, &cfg.dataset_config())?;
    Ok(GenSummary {
        digest: manifest_digest(out_dir.join(MANIFEST_FILE))?,
        counts: manifest.counts(),
        out_dir,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub final_checkpoint: PathBuf,
    pub best_checkpoint: PathBuf,
    pub best_epoch: u32,
    pub best_val_accuracy: f64,
    pub log: Vec<EpochLog>,
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "final checkpoint: {}", self.final_checkpoint.display())?;
        write!(
            f,
            "best checkpoint: {} (epoch {}, val accuracy {:.4})",
            self.best_checkpoint.display(),
            self.best_epoch,
            self.best_val_accuracy
        )
    }
}

fn log_text(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch\ttrain_loss\tval_accuracy\n");
    for e in log {
        out.push_str(&format!("{}\t{:.6}\t{:.6}\n", e.epoch, e.train_loss, e.val_accuracy));
    }
    out
}

/// Trains `--model` on the train split, selecting against val. Writes
/// `final.emic`, `best.emic` (each with a `.config` sidecar) and
/// `train_log.tsv` into the output directory.
pub fn cmd_train(cfg: &RunConfig, on_epoch: impl FnMut(&EpochLog)) -> Result<TrainSummary> {
    let (manifest, root) = DatasetManifest::locate(require(&cfg.dataset, "dataset")?)?;
    for split in [Split::Train, Split::Val] {
        if manifest.split(split).next().is_none() {
            return Err(Error::format("manifest", format!("no {split} entries")));
        }
    }
    let id = ModelId::new(cfg.model)?;
    let spec = build_model(id.get())?;
    let side = spec.input_shape[1];
    let train = load_split(&manifest, &root, Split::Train, side)?;
    let val = load_split(&manifest, &root, Split::Val, side)?;

    let out_dir = cfg.out_dir("run");
    create_dir(&out_dir)?;
    let mut net = spec.network::<f32>(cfg.train.seed)?;
    let outcome = fit(&mut net, &train, &val, &cfg.train, on_epoch)?;

    let final_checkpoint = out_dir.join("final.emic");
    let best_checkpoint = out_dir.join("best.emic");
    Checkpoint::from_network(id, cfg.train.epochs, &net, Some(&cfg.train)).save(&final_checkpoint)?;
    Checkpoint::from_network(id, outcome.best_epoch, &outcome.best, Some(&cfg.train)).save(&best_checkpoint)?;
    write_file(&out_dir.join("train_log.tsv"), log_text(&outcome.log))?;
    Ok(TrainSummary {
        final_checkpoint,
        best_checkpoint,
        best_epoch: outcome.best_epoch,
        best_val_accuracy: outcome.best_val_accuracy,
        log: outcome.log,
    })
}

/// Evaluates `--checkpoint` on `--split`, writing `report_<split>.txt`,
/// `report_<split>.csv` and `confusion_<split>.csv`.
pub fn cmd_eval(cfg: &RunConfig) -> Result<MetricsReport> {
    let ckpt = Checkpoint::load(require(&cfg.checkpoint, "checkpoint")?)?;
    let net = ckpt.to_network()?;
    let (manifest, root) = DatasetManifest::locate(require(&cfg.dataset, "dataset")?)?;
    let samples = load_split(&manifest, &root, cfg.split, net.input_shape()[1])?;
    let predicted = predict_levels(&net, &samples)?;
    let truths: Vec<NoiseLevel> = samples.iter().map(|s| s.label).collect();
    let report = classification_report(&predicted, &truths)?;

    let out_dir = cfg.out_dir("run");
    create_dir(&out_dir)?;
    let split = cfg.split.as_str();
    write_file(&out_dir.join(format!("report_{split}.txt")), report.to_text())?;
    write_file(&out_dir.join(format!("report_{split}.csv")), report.to_csv())?;
    write_file(&out_dir.join(format!("confusion_{split}.csv")), report.confusion_csv())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradeLine {
    pub path: PathBuf,
    pub level: NoiseLevel,
    pub probabilities: [f32; 5],
}

impl fmt::Display for GradeLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.path.display(), self.level)?;
        for p in self.probabilities {
            write!(f, "\t{p:.6}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradeOutcome {
    pub lines: Vec<GradeLine>,
    /// One message per skipped file.
    pub warnings: Vec<String>,
}

impl GradeOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.warnings.is_empty() {
            0
        } else {
            2
        }
    }
}

fn collect_frames(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries = fs::read_dir(dir)
        .map_err(Error::at(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(Error::at(dir))?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_frames(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "emif") {
            out.push(path);
        }
    }
    Ok(())
}

/// Grades one frame file or every `.emif` file under a directory (sorted by
/// path). Unreadable frames are skipped and reported as warnings.
pub fn cmd_grade(checkpoint: impl AsRef<Path>, input: impl AsRef<Path>) -> Result<GradeOutcome> {
    let net = Checkpoint::load(checkpoint)?.to_network()?;
    let side = net.input_shape()[1];
    let input = input.as_ref();
    let mut files = Vec::new();
    if input.is_dir() {
        collect_frames(input, &mut files)?;
    } else {
        files.push(input.to_path_buf());
    }
    let mut outcome = GradeOutcome::default();
    for path in files {
        let frame = match Frame::load(&path) {
            Ok(f) => f,
            Err(e) => {
                outcome.warnings.push(format!("skipping {}: {e}", path.display()));
                continue;
            }
        };
        let probs = net.predict(&frame_to_tensor_sized(&frame, side)?)?;
        let level = NoiseLevel::from_index(probs.argmax())?;
        let mut probabilities = [0.0; 5];
        probabilities.copy_from_slice(probs.data());
        outcome.lines.push(GradeLine {
            path,
            level,
            probabilities,
        });
    }
    Ok(outcome)
}

/// PSNR between two frames with an 8-bit peak.
pub fn cmd_psnr(a: impl AsRef<Path>, b: impl AsRef<Path>) -> Result<Psnr> {
    psnr_frames(&Frame::load(a)?, &Frame::load(b)?, 255.0)
}
