use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emigrade::harness::{cmd_eval, cmd_gen, cmd_grade, cmd_psnr, cmd_train, exit_code, Overrides, RunConfig};
use emigrade::synth::Split;

#[derive(Parser)]
#[command(name = "emigrade", version, about = "EMI video-noise grading toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=4))]
    model: Option<u8>,
    #[arg(long, global = true)]
    epochs: Option<u32>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    #[arg(long, global = true)]
    l2: Option<f64>,
    #[arg(long, global = true)]
    batch: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    scale: Option<f64>,
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["train", "val", "test"])]
    split: Option<String>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and manifest.
    Gen,
    /// Train a model on the train split, selecting on val.
    Train,
    /// Evaluate a checkpoint on a split and write reports.
    Eval,
    /// Grade a frame file or every frame under a directory.
    Grade { input: PathBuf },
    /// PSNR between two frames.
    Psnr { a: PathBuf, b: PathBuf },
}

impl Cli {
    fn overrides(&self) -> emigrade::Result<Overrides> {
        Ok(Overrides {
            model: self.model,
            epochs: self.epochs,
            lr: self.lr,
            l2: self.l2,
            batch: self.batch,
            seed: self.seed,
            scale: self.scale,
            dataset: self.dataset.clone(),
            checkpoint: self.checkpoint.clone(),
            out: self.out.clone(),
            split: self.split.as_deref().map(str::parse::<Split>).transpose()?,
            ..Overrides::default()
        })
    }

    fn run_config(&self) -> emigrade::Result<RunConfig> {
        let text = match &self.config {
            Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                emigrade::Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
            })?),
            None => None,
        };
        RunConfig::resolve(text.as_deref(), &self.overrides()?)
    }
}

fn run(cli: Cli) -> emigrade::Result<i32> {
    let cfg = cli.run_config()?;
    match &cli.command {
        Command::Gen => println!("{}", cmd_gen(&cfg)?),
        Command::Train => {
            let summary = cmd_train(&cfg, |e| {
                eprintln!("epoch {}\tloss {:.6}\tval accuracy {:.4}", e.epoch, e.train_loss, e.val_accuracy)
            })?;
            println!("{summary}");
        }
        Command::Eval => print!("{}", cmd_eval(&cfg)?.to_text()),
        Command::Grade { input } => {
            let checkpoint = cfg
                .checkpoint
                .as_ref()
                .ok_or_else(|| emigrade::Error::InvalidArgument("--checkpoint is required".into()))?;
            let outcome = cmd_grade(checkpoint, input)?;
            for line in &outcome.lines {
                println!("{line}");
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            return Ok(outcome.exit_code());
        }
        Command::Psnr { a, b } => println!("{}", cmd_psnr(a, b)?),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
