//! Narrowband interference model.
//!
//! Levels 2–4 add one sinusoid per scan line to all three planes:
//!
//! ```text
//! v'(x, row) = v + A·sin(2π·f·x / width + φ0 + drift·row) + burst(row)
//! ```
//!
//! `A`, `f`, `drift` and `φ0` are drawn once per frame; `burst(row)` is
//! `±2A` on lines selected with the level's burst probability and 0
//! elsewhere. Level 1 is sub-LSB Gaussian dither and level 5 is the flat
//! blue loss-of-lock field. Results are rounded and clipped to `[0, 255]`.
//!
//! Draw order (fixed, so frames are reproducible from a stream): `A`, `f`,
//! `drift`, `φ0`, then for each row a burst test and, on a burst, its sign.

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::colour::flat_blue;
use super::frame::{Frame, Plane};
use crate::error::{Error, Result};

/// Severity class 1 (clean) to 5 (loss of lock).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NoiseLevel(u8);

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 5] = [NoiseLevel(1), NoiseLevel(2), NoiseLevel(3), NoiseLevel(4), NoiseLevel(5)];

    pub fn new(level: u8) -> Result<Self> {
        if (1..=5).contains(&level) {
            Ok(Self(level))
        } else {
            Err(Error::InvalidLevel(level))
        }
    }

    /// From a zero-based class index.
    pub fn from_index(index: usize) -> Result<Self> {
        u8::try_from(index + 1)
            .map_err(|_| Error::InvalidLevel(u8::MAX))
            .and_then(Self::new)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based class index.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Inclusive interval in LSB units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRange {
    pub min: f64,
    pub max: f64,
}

impl AmplitudeRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseParams {
    /// Interferer amplitude per level 1–4. Level 1 carries no interferer.
    pub amplitude: [AmplitudeRange; 4],
    /// Interferer frequency, cycles per active line.
    pub cycles_per_line: (f64, f64),
    /// Phase advance per line, radians.
    pub phase_drift_per_line: (f64, f64),
    /// Standard deviation of level-1 dither, LSB.
    pub dither_sigma: f64,
    /// Per-line probability of an impulsive offset, levels 1–4.
    pub burst_probability: [f64; 4],
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            amplitude: [
                AmplitudeRange::new(0.0, 0.0),
                AmplitudeRange::new(4.0, 12.0),
                AmplitudeRange::new(16.0, 40.0),
                AmplitudeRange::new(48.0, 120.0),
            ],
            cycles_per_line: (0.5, 30.0),
            phase_drift_per_line: (0.0, 0.3),
            dither_sigma: 0.5,
            burst_probability: [0.0, 0.0, 0.05, 0.15],
            seed: 0,
        }
    }
}

impl NoiseParams {
    /// Checks ranges are well-formed and that the level amplitude ranges
    /// are disjoint and increasing.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (i, r) in self.amplitude.iter().enumerate() {
            if !(r.min >= 0.0 && r.min <= r.max && r.max.is_finite()) {
                return bad(format!("level {} amplitude range {:?} is not a valid interval", i + 1, r));
            }
        }
        for (i, pair) in self.amplitude.windows(2).enumerate() {
            if pair[0].max >= pair[1].min {
                return bad(format!(
                    "amplitude ranges of levels {} and {} overlap or are out of order",
                    i + 1,
                    i + 2
                ));
            }
        }
        for (name, (lo, hi)) in [
            ("cycles per line", self.cycles_per_line),
            ("phase drift", self.phase_drift_per_line),
        ] {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("{name} range ({lo}, {hi}) is not a valid interval"));
            }
        }
        if !(self.dither_sigma >= 0.0 && self.dither_sigma.is_finite()) {
            return bad(format!("dither sigma {} must be non-negative", self.dither_sigma));
        }
        if self.burst_probability.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad(format!("burst probabilities {:?} outside [0, 1]", self.burst_probability));
        }
        Ok(())
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn to_sample(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Returns a copy of `frame` corrupted at `level`.
pub fn inject_noise(frame: &Frame, level: NoiseLevel, params: &NoiseParams, rng: &mut impl Rng) -> Result<Frame> {
    match level.get() {
        5 => Frame::filled(frame.width(), frame.height(), frame.range(), flat_blue(frame.range())),
        1 => dither(frame, params.dither_sigma, rng),
        _ => Ok(interfere(frame, level, params, rng)),
    }
}

fn dither(frame: &Frame, sigma: f64, rng: &mut impl Rng) -> Result<Frame> {
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut out = frame.clone();
    for plane in Plane::ALL {
        for v in out.plane_mut(plane) {
            *v = to_sample(f64::from(*v) + normal.sample(rng));
        }
    }
    Ok(out)
}

fn interfere(frame: &Frame, level: NoiseLevel, params: &NoiseParams, rng: &mut impl Rng) -> Frame {
    let range = params.amplitude[level.index()];
    let amplitude = uniform(rng, (range.min, range.max));
    let cycles = uniform(rng, params.cycles_per_line);
    let drift = uniform(rng, params.phase_drift_per_line);
    let phase0 = rng.random_range(0.0..TAU);
    let burst_p = params.burst_probability[level.index()];

    let width = frame.width();
    let mut out = frame.clone();
    let mut line = vec![0.0f64; width];
    for row in 0..frame.height() {
        let burst = if rng.random::<f64>() < burst_p {
            if rng.random::<bool>() {
                2.0 * amplitude
            } else {
                -2.0 * amplitude
            }
        } else {
            0.0
        };
        let phase = phase0 + drift * row as f64;
        for (x, w) in line.iter_mut().enumerate() {
            *w = amplitude * (TAU * cycles * x as f64 / width as f64 + phase).sin() + burst;
        }
        for plane in Plane::ALL {
            let samples = &mut out.plane_mut(plane)[row * width..(row + 1) * width];
            for (v, w) in samples.iter_mut().zip(&line) {
                *v = to_sample(f64::from(*v) + w);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::synth::{render_colour_bars, Range};

    fn clean() -> Frame {
        render_colour_bars(160, 90, Range::Studio).unwrap()
    }

    fn mse(a: &Frame, b: &Frame) -> f64 {
        let mut sum = 0.0;
        for p in Plane::ALL {
            for (x, y) in a.plane(p).iter().zip(b.plane(p)) {
                sum += (f64::from(*x) - f64::from(*y)).powi(2);
            }
        }
        sum / (3 * a.width() * a.height()) as f64
    }

    #[test]
    fn level5_is_flat_blue() {
        let mut rng = stream(0, Purpose::Frame, 0);
        let out = inject_noise(&clean(), NoiseLevel::new(5).unwrap(), &NoiseParams::default(), &mut rng).unwrap();
        for y in 0..out.height() {
            for x in 0..out.width() {
                assert_eq!(out.pixel(x, y), [41, 240, 110]);
            }
        }
    }

    #[test]
    fn zero_interference_is_identity() {
        let mut params = NoiseParams::default();
        params.amplitude = [AmplitudeRange::new(0.0, 0.0); 4];
        params.burst_probability = [0.0; 4];
        params.dither_sigma = 0.0;
        let frame = clean();
        for level in 1..=4 {
            let mut rng = stream(1, Purpose::Frame, level);
            let out = inject_noise(&frame, NoiseLevel::new(level as u8).unwrap(), &params, &mut rng).unwrap();
            assert_eq!(out, frame, "level {level}");
        }
    }

    #[test]
    fn level1_dither_stays_within_a_few_lsb() {
        let frame = clean();
        let mut rng = stream(2, Purpose::Frame, 0);
        let out = inject_noise(&frame, NoiseLevel::new(1).unwrap(), &NoiseParams::default(), &mut rng).unwrap();
        assert_ne!(out, frame);
        for p in Plane::ALL {
            for (a, b) in out.plane(p).iter().zip(frame.plane(p)) {
                assert!(a.abs_diff(*b) <= 4);
            }
        }
    }

    #[test]
    fn stronger_levels_have_larger_error() {
        let frame = clean();
        let params = NoiseParams::default();
        let errors: Vec<f64> = (2..=4)
            .map(|l| {
                let mut rng = stream(5, Purpose::Frame, 0);
                mse(&frame, &inject_noise(&frame, NoiseLevel::new(l).unwrap(), &params, &mut rng).unwrap())
            })
            .collect();
        assert!(errors[0] < errors[1] && errors[1] < errors[2], "{errors:?}");
    }

    #[test]
    fn reproducible_from_stream() {
        let frame = clean();
        let params = NoiseParams::default();
        let level = NoiseLevel::new(3).unwrap();
        let a = inject_noise(&frame, level, &params, &mut stream(9, Purpose::Frame, 4)).unwrap();
        let b = inject_noise(&frame, level, &params, &mut stream(9, Purpose::Frame, 4)).unwrap();
        let c = inject_noise(&frame, level, &params, &mut stream(9, Purpose::Frame, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn levels_validated() {
        assert!(NoiseLevel::new(0).is_err());
        assert!(NoiseLevel::new(6).is_err());
        assert_eq!(NoiseLevel::from_index(4).unwrap().get(), 5);
        assert!(NoiseLevel::from_index(5).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(NoiseParams::default().validate().is_ok());
        let mut p = NoiseParams::default();
        p.amplitude[2] = AmplitudeRange::new(10.0, 40.0);
        assert!(p.validate().is_err());
        let mut p = NoiseParams::default();
        p.burst_probability[3] = 1.5;
        assert!(p.validate().is_err());
        let mut p = NoiseParams::default();
        p.cycles_per_line = (5.0, 1.0);
        assert!(p.validate().is_err());
    }
}
