//! Grades frames with a checkpoint. Without arguments it grades one
//! synthetic frame per level with an untrained Model 4, which shows the
//! output format (the grades themselves are chance).
//!
//! ```text
//! cargo run --release --example grade_frames -- [checkpoint.emic frame-or-dir]
//! ```

use emigrade::harness::{cmd_grade, Checkpoint};
use emigrade::rng::{stream, Purpose};
use emigrade::synth::{inject_noise, render_colour_bars};
use emigrade::{build_model, ModelId, NoiseLevel, NoiseParams, Range};

fn main() -> emigrade::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (checkpoint, input) = match args.as_slice() {
        [c, i] => (c.into(), i.into()),
        _ => {
            let dir = std::env::temp_dir().join("emigrade-grade");
            std::fs::create_dir_all(&dir)?;
            let net = build_model(4)?.network::<f32>(0)?;
            let ckpt = dir.join("untrained.emic");
            Checkpoint::from_network(ModelId::new(4)?, 0, &net, None).save(&ckpt)?;
            let clean = render_colour_bars(320, 180, Range::Studio)?;
            for level in NoiseLevel::ALL {
                let mut rng = stream(1, Purpose::Frame, u64::from(level.get()));
                inject_noise(&clean, level, &NoiseParams::default(), &mut rng)?
                    .save(dir.join(format!("level{level}.emif")))?;
            }
            (ckpt, dir)
        }
    };
    let outcome = cmd_grade(&checkpoint, &input)?;
    println!("path\tlevel\tp1\tp2\tp3\tp4\tp5");
    for line in &outcome.lines {
        println!("{line}");
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
