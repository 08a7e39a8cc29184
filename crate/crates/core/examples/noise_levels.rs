//! Injects each severity level into the clean pattern and reports PSNR
//! against it, showing where a PSNR threshold can and cannot grade.
//!
//! ```text
//! cargo run --release --example noise_levels -- [draws per level]
//! ```

use emigrade::metrics::psnr_frames;
use emigrade::rng::{stream, Purpose};
use emigrade::synth::{inject_noise, render_colour_bars};
use emigrade::{NoiseLevel, NoiseParams, Range};

fn main() -> emigrade::Result<()> {
    let draws: u64 = std::env::args().nth(1).map_or(50, |s| s.parse().expect("draws"));
    let clean = render_colour_bars(640, 360, Range::Studio)?;
    let params = NoiseParams::default();
    let out = std::env::temp_dir().join("emigrade-noise-levels");
    std::fs::create_dir_all(&out)?;

    println!("level  min dB    mean dB   max dB");
    for level in NoiseLevel::ALL {
        let mut psnrs = Vec::new();
        for i in 0..draws {
            let mut rng = stream(params.seed, Purpose::Frame, (u64::from(level.get()) << 40) | i);
            let noisy = inject_noise(&clean, level, &params, &mut rng)?;
            if i == 0 {
                noisy.export_ppm(out.join(format!("level{level}.ppm")))?;
            }
            psnrs.push(psnr_frames(&clean, &noisy, 255.0)?.db().unwrap_or(f64::INFINITY));
        }
        let min = psnrs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = psnrs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = psnrs.iter().sum::<f64>() / psnrs.len() as f64;
        println!("{:>5}  {min:>7.2}  {mean:>8.2}  {max:>7.2}", level.get());
    }
    println!("level 5 is a different picture, not noise: its PSNR says nothing about severity");
    println!("sample frames in {}", out.display());
    Ok(())
}
