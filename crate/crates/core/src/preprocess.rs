//! Frame-to-tensor pipeline: luma extraction, nearest-neighbour resize to
//! the network input size, and rescaling to `[0, 1]`. Also the random flip
//! augmentation used while training.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::INPUT_SIDE;
use crate::synth::{Frame, NoiseLevel, Plane};
use crate::tensor::Tensor;

/// A row-major 2-D grid of samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<T> {
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height * width != data.len() || height == 0 || width == 0 {
            return Err(Error::InvalidShape(format!(
                "{height}x{width} grid cannot hold {} samples",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }
}

/// A network-ready input with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// `[1, 227, 227]`, values in `[0, 1]`.
    pub tensor: Tensor<f32>,
    pub label: NoiseLevel,
}

/// Source index for output index `out` under pixel-centre alignment:
/// `floor((out + 0.5)·src / dst)`, clamped.
fn nearest(out: usize, src: usize, dst: usize) -> usize {
    ((2 * out + 1) * src / (2 * dst)).min(src - 1)
}

/// Nearest-neighbour resampling. Every output sample is copied from the
/// input, so no new values appear.
pub fn resize_nearest<T: Copy>(grid: &Grid<T>, out_h: usize, out_w: usize) -> Result<Grid<T>> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidArgument(format!(
            "resize target must be positive, got {out_h}x{out_w}"
        )));
    }
    let cols: Vec<usize> = (0..out_w).map(|c| nearest(c, grid.width, out_w)).collect();
    let mut data = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let src = nearest(r, grid.height, out_h) * grid.width;
        data.extend(cols.iter().map(|&c| grid.data[src + c]));
    }
    Grid::new(out_h, out_w, data)
}

/// The Y plane; chroma is discarded.
pub fn to_luma(frame: &Frame) -> Grid<u8> {
    Grid {
        height: frame.height(),
        width: frame.width(),
        data: frame.plane(Plane::Y).to_vec(),
    }
}

/// `value / 255` as a `[1, H, W]` tensor.
pub fn rescale(grid: &Grid<u8>) -> Tensor<f32> {
    let data = grid.data.iter().map(|&v| f32::from(v) / 255.0).collect();
    Tensor::new(vec![1, grid.height, grid.width], data).expect("grid dimensions are positive")
}

/// luma → resize to `side×side` → rescale.
pub fn frame_to_tensor_sized(frame: &Frame, side: usize) -> Result<Tensor<f32>> {
    let luma = to_luma(frame);
    Ok(rescale(&resize_nearest(&luma, side, side)?))
}

/// The standard `1×227×227` network input for a frame.
pub fn frame_to_tensor(frame: &Frame) -> Tensor<f32> {
    frame_to_tensor_sized(frame, INPUT_SIDE).expect("input side is positive")
}

pub fn frame_to_sample(frame: &Frame, label: NoiseLevel) -> Sample {
    Sample {
        tensor: frame_to_tensor(frame),
        label,
    }
}

fn hw(tensor: &Tensor<f32>) -> (usize, usize) {
    let s = tensor.shape();
    (s[s.len() - 2], s[s.len() - 1])
}

/// Reverses column order within every row of every channel.
pub fn flip_horizontal(tensor: &Tensor<f32>) -> Tensor<f32> {
    let (_, w) = hw(tensor);
    let mut out = tensor.clone();
    for row in out.data_mut().chunks_exact_mut(w) {
        row.reverse();
    }
    out
}

/// Reverses row order within every channel.
pub fn flip_vertical(tensor: &Tensor<f32>) -> Tensor<f32> {
    let (h, w) = hw(tensor);
    let mut out = tensor.clone();
    for (src, dst) in tensor
        .data()
        .chunks_exact(h * w)
        .zip(out.data_mut().chunks_exact_mut(h * w))
    {
        for r in 0..h {
            dst[r * w..(r + 1) * w].copy_from_slice(&src[(h - 1 - r) * w..(h - r) * w]);
        }
    }
    out
}

/// Independently flips horizontally and vertically, each with probability
/// one half. The horizontal draw is taken first.
pub fn augment_flip(sample: &Sample, rng: &mut impl Rng) -> Sample {
    let horizontal = rng.random::<bool>();
    let vertical = rng.random::<bool>();
    let mut tensor = sample.tensor.clone();
    if horizontal {
        tensor = flip_horizontal(&tensor);
    }
    if vertical {
        tensor = flip_vertical(&tensor);
    }
    Sample {
        tensor,
        label: sample.label,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::synth::{flat_blue, render_colour_bars, Range};
    use proptest::prelude::*;

    #[test]
    fn upscale_two_by_two() {
        let g = Grid::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        let out = resize_nearest(&g, 4, 4).unwrap();
        assert_eq!(out.data, vec![1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4]);
    }

    #[test]
    fn identity_resize() {
        let g = Grid::new(3, 5, (0..15u8).collect()).unwrap();
        assert_eq!(resize_nearest(&g, 3, 5).unwrap(), g);
    }

    #[test]
    fn hd_frame_to_network_size() {
        let g = Grid::new(720, 1280, vec![0u8; 720 * 1280]).unwrap();
        let out = resize_nearest(&g, 227, 227).unwrap();
        assert_eq!((out.height, out.width, out.data.len()), (227, 227, 227 * 227));
        assert!(resize_nearest(&g, 0, 227).is_err());
    }

    #[test]
    fn luma_of_reference_frames() {
        let blue = Frame::filled(32, 8, Range::Studio, flat_blue(Range::Studio)).unwrap();
        assert!(to_luma(&blue).data.iter().all(|&v| v == 41));
        let bars = render_colour_bars(64, 4, Range::Studio).unwrap();
        let luma = to_luma(&bars);
        assert_eq!(luma.data.len(), 64 * 4);
        for r in 0..4 {
            for c in 56..64 {
                assert_eq!(luma.get(r, c), 16);
            }
        }
    }

    #[test]
    fn rescale_endpoints_and_exact_round_trip() {
        let g = Grid::new(1, 256, (0..=255u8).collect()).unwrap();
        let t = rescale(&g);
        assert_eq!(t.data()[0], 0.0);
        assert_eq!(t.data()[255], 1.0);
        assert_eq!(t.data()[51], 0.2);
        for (i, &v) in t.data().iter().enumerate() {
            let back = v * 255.0;
            assert_eq!(back, i as f32, "value {i}");
        }
    }

    #[test]
    fn pipeline_is_deterministic_and_in_range() {
        let frame = render_colour_bars(1280, 720, Range::Studio).unwrap();
        let a = frame_to_tensor(&frame);
        let b = frame_to_tensor(&frame);
        assert_eq!(a, b);
        assert_eq!(a.shape(), &[1, 227, 227]);
        assert!(a.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn double_flip_is_identity() {
        let t = Tensor::new(vec![1, 3, 4], (0..12).map(|v| v as f32).collect()).unwrap();
        assert_eq!(flip_horizontal(&flip_horizontal(&t)), t);
        assert_eq!(flip_vertical(&flip_vertical(&t)), t);
        assert_eq!(flip_horizontal(&t).data()[..4], [3.0, 2.0, 1.0, 0.0]);
        assert_eq!(flip_vertical(&t).data()[..4], [8.0, 9.0, 10.0, 11.0]);
    }

    #[test]
    fn no_flip_draw_returns_same_sample() {
        let sample = Sample {
            tensor: Tensor::new(vec![1, 2, 3], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap(),
            label: NoiseLevel::new(3).unwrap(),
        };
        // find a stream whose first two booleans are both false
        let idx = (0..64)
            .find(|&i| {
                let mut r = stream(0, Purpose::Augment, i);
                !rand::Rng::random::<bool>(&mut r) && !rand::Rng::random::<bool>(&mut r)
            })
            .unwrap();
        let out = augment_flip(&sample, &mut stream(0, Purpose::Augment, idx));
        assert_eq!(out, sample);
    }

    proptest! {
        #[test]
        fn resize_never_invents_values(h in 1usize..20, w in 1usize..20, oh in 1usize..30, ow in 1usize..30, seed in any::<u64>()) {
            let data: Vec<u16> = (0..h * w).map(|i| (crate::rng::splitmix64(seed ^ i as u64) % 1000) as u16).collect();
            let g = Grid::new(h, w, data.clone()).unwrap();
            let out = resize_nearest(&g, oh, ow).unwrap();
            prop_assert_eq!(out.data.len(), oh * ow);
            for v in &out.data {
                prop_assert!(data.contains(v));
            }
        }

        #[test]
        fn flips_preserve_label_and_values(seed in any::<u64>(), h in 1usize..9, w in 1usize..9) {
            let data: Vec<f32> = (0..h * w).map(|i| (crate::rng::splitmix64(seed ^ i as u64) % 256) as f32 / 255.0).collect();
            let sample = Sample { tensor: Tensor::new(vec![1, h, w], data).unwrap(), label: NoiseLevel::new(2).unwrap() };
            let out = augment_flip(&sample, &mut stream(seed, Purpose::Augment, 0));
            prop_assert_eq!(out.label, sample.label);
            let mut a = out.tensor.data().to_vec();
            let mut b = sample.tensor.data().to_vec();
            a.sort_by(f32::total_cmp);
            b.sort_by(f32::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
