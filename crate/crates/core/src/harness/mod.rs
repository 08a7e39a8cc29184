//! Persistence, configuration, training, and the command implementations
//! behind the `emigrade` binary.

mod checkpoint;
mod commands;
mod config;
mod train;

pub use checkpoint::{Checkpoint, EMIC_MAGIC, EMIC_VERSION};
pub use commands::{
    cmd_eval, cmd_gen, cmd_grade, cmd_psnr, cmd_train, exit_code, manifest_digest, GenSummary, GradeLine,
    GradeOutcome, TrainSummary,
};
pub use config::{Overrides, RunConfig, OUT_DIR_ENV};
pub use train::{evaluate, fit, load_split, predict_levels, EpochLog, FitOutcome};
