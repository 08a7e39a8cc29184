//! Generates a small labelled dataset and prints its manifest.
//!
//! ```text
//! cargo run --release --example build_dataset -- [scale] [out_dir]
//! ```

use emigrade::harness::manifest_digest;
use emigrade::synth::{build_dataset, DatasetConfig, Split, MANIFEST_FILE};

fn main() -> emigrade::Result<()> {
    let mut args = std::env::args().skip(1);
    let scale: f64 = args.next().map_or(0.05, |s| s.parse().expect("scale"));
    let out = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("emigrade-dataset"), Into::into);

    let config = DatasetConfig {
        scale,
        ..DatasetConfig::default()
    };
    let manifest = build_dataset(&out, &config)?;
    for split in Split::ALL {
        println!("{split}: {} frames", manifest.split(split).count());
    }
    for line in manifest.to_text().lines().take(6) {
        println!("  {line}");
    }
    println!("sha256 {}", manifest_digest(out.join(MANIFEST_FILE))?);
    Ok(())
}
