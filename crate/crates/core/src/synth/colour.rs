//! BT.601 colour conversion and the colour-bar pattern.

use super::frame::{Frame, Range};
use crate::error::{Error, Result};

/// Bar colours left to right, as unit-amplitude RGB.
pub const BARS: [(&str, [f64; 3]); 8] = [
    ("white", [1.0, 1.0, 1.0]),
    ("yellow", [1.0, 1.0, 0.0]),
    ("cyan", [0.0, 1.0, 1.0]),
    ("green", [0.0, 1.0, 0.0]),
    ("magenta", [1.0, 0.0, 1.0]),
    ("red", [1.0, 0.0, 0.0]),
    ("blue", [0.0, 0.0, 1.0]),
    ("black", [0.0, 0.0, 0.0]),
];

const KR: f64 = 0.299;
const KB: f64 = 0.114;
const KG: f64 = 1.0 - KR - KB;

/// (luma offset, luma excursion, chroma excursion) for a quantisation range.
fn scales(range: Range) -> (f64, f64, f64) {
    match range {
        Range::Studio => (16.0, 219.0, 224.0),
        Range::Full => (0.0, 255.0, 255.0),
    }
}

fn quantise(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// BT.601 conversion of RGB in `[0, 1]` to 8-bit YCbCr.
pub fn rgb_to_ycbcr(rgb: [f64; 3], range: Range) -> [u8; 3] {
    let [r, g, b] = rgb;
    let (offset, y_scale, c_scale) = scales(range);
    let y = KR * r + KG * g + KB * b;
    let cb = (b - y) / (2.0 * (1.0 - KB));
    let cr = (r - y) / (2.0 * (1.0 - KR));
    [
        quantise(offset + y_scale * y),
        quantise(128.0 + c_scale * cb),
        quantise(128.0 + c_scale * cr),
    ]
}

/// Inverse BT.601 conversion to 8-bit RGB.
pub fn ycbcr_to_rgb(ycc: [u8; 3], range: Range) -> [u8; 3] {
    let (offset, y_scale, c_scale) = scales(range);
    let y = (f64::from(ycc[0]) - offset) / y_scale;
    let cb = (f64::from(ycc[1]) - 128.0) / c_scale;
    let cr = (f64::from(ycc[2]) - 128.0) / c_scale;
    let r = y + 2.0 * (1.0 - KR) * cr;
    let b = y + 2.0 * (1.0 - KB) * cb;
    let g = (y - KR * r - KB * b) / KG;
    [quantise(r * 255.0), quantise(g * 255.0), quantise(b * 255.0)]
}

/// The loss-of-lock field: full-amplitude blue.
pub fn flat_blue(range: Range) -> [u8; 3] {
    rgb_to_ycbcr([0.0, 0.0, 1.0], range)
}

/// Eight full-height bars at 75% amplitude.
pub fn render_colour_bars(width: usize, height: usize, range: Range) -> Result<Frame> {
    render_colour_bars_with(width, height, range, 0.75)
}

/// Eight full-height bars at `amplitude` (0–1). Each bar is `width / 8`
/// pixels wide; the last bar absorbs any remainder.
pub fn render_colour_bars_with(width: usize, height: usize, range: Range, amplitude: f64) -> Result<Frame> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "frame dimensions must be positive, got {width}x{height}"
        )));
    }
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::InvalidArgument(format!("bar amplitude {amplitude} outside [0, 1]")));
    }
    let bar_width = (width / BARS.len()).max(1);
    let colours: Vec<[u8; 3]> = BARS
        .iter()
        .map(|(_, rgb)| rgb_to_ycbcr(rgb.map(|c| c * amplitude), range))
        .collect();
    let row: Vec<[u8; 3]> = (0..width)
        .map(|x| colours[(x / bar_width).min(BARS.len() - 1)])
        .collect();

    let n = width * height;
    let mut planes = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for _ in 0..height {
        for (p, plane) in planes.iter_mut().enumerate() {
            plane.extend(row.iter().map(|px| px[p]));
        }
    }
    let [y, cb, cr] = planes;
    Frame::new(width, height, range, y, cb, cr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn studio_reference_colours() {
        assert_eq!(rgb_to_ycbcr([0.0, 0.0, 0.0], Range::Studio), [16, 128, 128]);
        assert_eq!(rgb_to_ycbcr([1.0, 1.0, 1.0], Range::Studio), [235, 128, 128]);
        assert_eq!(flat_blue(Range::Studio), [41, 240, 110]);
        assert_eq!(rgb_to_ycbcr([1.0, 0.0, 0.0], Range::Studio), [81, 90, 240]);
    }

    #[test]
    fn full_range_reference_colours() {
        assert_eq!(rgb_to_ycbcr([0.0, 0.0, 0.0], Range::Full), [0, 128, 128]);
        assert_eq!(rgb_to_ycbcr([1.0, 1.0, 1.0], Range::Full), [255, 128, 128]);
        assert_eq!(flat_blue(Range::Full), [29, 255, 107]);
    }

    #[test]
    fn conversion_roughly_inverts() {
        for (_, rgb) in BARS {
            for range in [Range::Studio, Range::Full] {
                let back = ycbcr_to_rgb(rgb_to_ycbcr(rgb.map(|c| c * 0.75), range), range);
                for (b, c) in back.iter().zip(rgb) {
                    assert!((f64::from(*b) - c * 0.75 * 255.0).abs() <= 2.0, "{rgb:?} -> {back:?}");
                }
            }
        }
    }

    #[test]
    fn bars_are_flat_and_evenly_wide() {
        let f = render_colour_bars(1280, 720, Range::Studio).unwrap();
        for bar in 0..8 {
            let first = f.pixel(bar * 160, 0);
            for x in bar * 160..(bar + 1) * 160 {
                for y in [0, 359, 719] {
                    assert_eq!(f.pixel(x, y), first);
                }
            }
            if bar > 0 {
                assert_ne!(f.pixel(bar * 160 - 1, 0), first);
            }
        }
        assert_eq!(f.pixel(1279, 0), [16, 128, 128]);
        assert_eq!(f.pixel(0, 0), [180, 128, 128]);
    }

    #[test]
    fn remainder_goes_to_last_bar() {
        let f = render_colour_bars(21, 2, Range::Studio).unwrap();
        // bar width 2: columns 14..21 are all black
        for x in 14..21 {
            assert_eq!(f.pixel(x, 1), [16, 128, 128]);
        }
        assert_ne!(f.pixel(13, 1), [16, 128, 128]);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = render_colour_bars(64, 8, Range::Full).unwrap();
        let b = render_colour_bars(64, 8, Range::Full).unwrap();
        assert_eq!(a, b);
        assert!(render_colour_bars(0, 8, Range::Full).is_err());
        assert!(render_colour_bars(8, 0, Range::Full).is_err());
    }
}
