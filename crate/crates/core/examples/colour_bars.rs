//! Renders the 75% colour-bar pattern and writes it out as EMIF and PPM.
//!
//! ```text
//! cargo run --example colour_bars -- [out_dir]
//! ```

use emigrade::synth::{render_colour_bars, Plane, BARS};
use emigrade::Range;

fn main() -> emigrade::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("emigrade-colour-bars"), Into::into);
    std::fs::create_dir_all(&out)?;

    for range in [Range::Studio, Range::Full] {
        let frame = render_colour_bars(1280, 720, range)?;
        println!("{range:?} range, 1280x720");
        let bar = frame.width() / BARS.len();
        for (i, (name, _)) in BARS.iter().enumerate() {
            let [y, cb, cr] = frame.pixel(i * bar + bar / 2, 360);
            println!("  {name:<8} Y={y:<3} Cb={cb:<3} Cr={cr}");
        }
        let stem = format!("bars-{range:?}").to_lowercase();
        frame.save(out.join(format!("{stem}.emif")))?;
        frame.export_ppm(out.join(format!("{stem}.ppm")))?;
        frame.export_pgm(Plane::Y, out.join(format!("{stem}-y.pgm")))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
