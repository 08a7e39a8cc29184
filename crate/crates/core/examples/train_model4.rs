//! Generates a desk-scale dataset, trains Model 4 on it and prints the
//! test-split report.
//!
//! ```text
//! cargo run --release --example train_model4 -- [scale] [epochs] [l2] [seed]
//! ```

use std::time::Instant;

use emigrade::harness::{cmd_eval, cmd_gen, cmd_train, RunConfig};
use emigrade::synth::Split;

fn main() -> emigrade::Result<()> {
    let mut args = std::env::args().skip(1);
    let scale: f64 = args.next().map_or(0.1, |s| s.parse().expect("scale"));
    let epochs: u32 = args.next().map_or(30, |s| s.parse().expect("epochs"));
    let l2: f64 = args.next().map_or(0.0, |s| s.parse().expect("l2"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let work = std::env::temp_dir().join(format!("emigrade-train-model4-{seed}"));
    let mut cfg = RunConfig {
        scale,
        out: Some(work.join("data")),
        ..RunConfig::default()
    };
    cfg.train.epochs = epochs;
    cfg.train.l2_lambda = l2;
    cfg.train.seed = seed;

    let t = Instant::now();
    println!("{}", cmd_gen(&cfg)?);
    println!("generated in {:.1?}", t.elapsed());

    cfg.dataset = cfg.out.take();
    cfg.out = Some(work.join("run"));
    let t = Instant::now();
    let summary = cmd_train(&cfg, |e| {
        println!(
            "epoch {:>3}  loss {:.5}  val acc {:.4}  ({:.1?})",
            e.epoch,
            e.train_loss,
            e.val_accuracy,
            t.elapsed()
        )
    })?;
    println!("{summary}");

    cfg.checkpoint = Some(summary.final_checkpoint);
    cfg.split = Split::Test;
    print!("{}", cmd_eval(&cfg)?.to_text());
    Ok(())
}
