//! 2-D convolution (cross-correlation, no kernel flip) via im2col + GEMM.

use super::layer::{output_extent, LayerSpec};
use super::state::{LayerState, ParamGrads};
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

#[derive(Debug, Clone, Copy)]
struct Geometry {
    channels: usize,
    height: usize,
    width: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
    out_h: usize,
    out_w: usize,
}

impl Geometry {
    fn patch_len(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    fn positions(&self) -> usize {
        self.out_h * self.out_w
    }

    /// Source coordinate for output index `o` and kernel offset `k`, if it
    /// lands inside the (unpadded) input.
    fn source(&self, o: usize, k: usize, extent: usize) -> Option<usize> {
        (o * self.stride + k).checked_sub(self.padding).filter(|&i| i < extent)
    }
}

/// Forward-pass state needed by [`conv2d_backward`].
#[derive(Debug, Clone)]
pub struct ConvCache<T> {
    geometry: Geometry,
    /// im2col matrix, `[channels·k·k, out_h·out_w]`.
    columns: Vec<T>,
}

impl<T> ConvCache<T> {
    pub fn input_shape(&self) -> [usize; 3] {
        [self.geometry.channels, self.geometry.height, self.geometry.width]
    }

    pub fn output_shape(&self, out_channels: usize) -> [usize; 3] {
        [out_channels, self.geometry.out_h, self.geometry.out_w]
    }
}

#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

fn geometry<T: Scalar>(input: &Tensor<T>, state: &LayerState<T>, spec: &LayerSpec) -> Result<Geometry> {
    let LayerSpec::Conv2d {
        out_channels,
        kernel,
        stride,
        padding,
    } = *spec
    else {
        return Err(Error::InvalidLayer(format!("expected a conv2d spec, got {spec:?}")));
    };
    let &[channels, height, width] = input.shape() else {
        return Err(Error::InvalidShape(format!(
            "conv2d expects [C, H, W], got {:?}",
            input.shape()
        )));
    };
    state
        .weights
        .ensure_shape(&[out_channels, channels, kernel, kernel])?;
    state.biases.ensure_shape(&[out_channels])?;
    Ok(Geometry {
        channels,
        height,
        width,
        kernel,
        stride,
        padding,
        out_h: output_extent(height, kernel, stride, padding)?,
        out_w: output_extent(width, kernel, stride, padding)?,
    })
}

fn im2col<T: Scalar>(input: &[T], g: &Geometry) -> Vec<T> {
    let positions = g.positions();
    let mut cols = vec![T::zero(); g.patch_len() * positions];
    for c in 0..g.channels {
        let plane = &input[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = (c * g.kernel + ki) * g.kernel + kj;
                let dst = &mut cols[row * positions..(row + 1) * positions];
                for oy in 0..g.out_h {
                    let Some(iy) = g.source(oy, ki, g.height) else {
                        continue;
                    };
                    let src = &plane[iy * g.width..(iy + 1) * g.width];
                    let out_row = &mut dst[oy * g.out_w..(oy + 1) * g.out_w];
                    for (ox, v) in out_row.iter_mut().enumerate() {
                        if let Some(ix) = g.source(ox, kj, g.width) {
                            *v = src[ix];
                        }
                    }
                }
            }
        }
    }
    cols
}

fn col2im<T: Scalar>(cols: &[T], g: &Geometry) -> Vec<T> {
    let positions = g.positions();
    let mut out = vec![T::zero(); g.channels * g.height * g.width];
    for c in 0..g.channels {
        let plane = &mut out[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = (c * g.kernel + ki) * g.kernel + kj;
                let src = &cols[row * positions..(row + 1) * positions];
                for oy in 0..g.out_h {
                    let Some(iy) = g.source(oy, ki, g.height) else {
                        continue;
                    };
                    for ox in 0..g.out_w {
                        if let Some(ix) = g.source(ox, kj, g.width) {
                            let dst = &mut plane[iy * g.width + ix];
                            *dst = *dst + src[oy * g.out_w + ox];
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn conv2d_forward<T: Scalar>(
    input: &Tensor<T>,
    state: &LayerState<T>,
    spec: &LayerSpec,
) -> Result<(Tensor<T>, ConvCache<T>)> {
    let g = geometry(input, state, spec)?;
    let out_channels = state.biases.len();
    let positions = g.positions();
    let columns = im2col(input.data(), &g);

    let mut out = Vec::with_capacity(out_channels * positions);
    for &b in state.biases.data() {
        out.extend(std::iter::repeat_n(b, positions));
    }
    let k = g.patch_len();
    T::gemm(
        out_channels,
        k,
        positions,
        T::one(),
        state.weights.data(),
        (k as isize, 1),
        &columns,
        (positions as isize, 1),
        T::one(),
        &mut out,
        (positions as isize, 1),
    );
    let out = Tensor::new(vec![out_channels, g.out_h, g.out_w], out)?;
    Ok((out, ConvCache { geometry: g, columns }))
}

pub fn conv2d_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    cache: &ConvCache<T>,
    state: &LayerState<T>,
) -> Result<ConvGrads<T>> {
    let (input, params) = conv2d_backward_inner(grad_out, cache, state, true)?;
    Ok(ConvGrads {
        input: input.expect("input gradient requested"),
        weights: params.weights,
        biases: params.biases,
    })
}

/// Backward pass; skips the input gradient (the most expensive product for
/// a first layer) when `want_input` is false.
pub(crate) fn conv2d_backward_inner<T: Scalar>(
    grad_out: &Tensor<T>,
    cache: &ConvCache<T>,
    state: &LayerState<T>,
    want_input: bool,
) -> Result<(Option<Tensor<T>>, ParamGrads<T>)> {
    let g = &cache.geometry;
    let out_channels = state.biases.len();
    grad_out.ensure_shape(&cache.output_shape(out_channels))?;
    state
        .weights
        .ensure_shape(&[out_channels, g.channels, g.kernel, g.kernel])?;
    let positions = g.positions();
    let k = g.patch_len();
    let go = grad_out.data();

    let biases: Vec<T> = go
        .chunks_exact(positions)
        .map(|row| row.iter().fold(T::zero(), |acc, &v| acc + v))
        .collect();

    let mut weights = vec![T::zero(); out_channels * k];
    T::gemm(
        out_channels,
        positions,
        k,
        T::one(),
        go,
        (positions as isize, 1),
        &cache.columns,
        (1, positions as isize),
        T::zero(),
        &mut weights,
        (k as isize, 1),
    );

    let input = if want_input {
        let mut cols = vec![T::zero(); k * positions];
        T::gemm(
            k,
            out_channels,
            positions,
            T::one(),
            state.weights.data(),
            (1, k as isize),
            go,
            (positions as isize, 1),
            T::zero(),
            &mut cols,
            (positions as isize, 1),
        );
        Some(Tensor::new(
            vec![g.channels, g.height, g.width],
            col2im(&cols, g),
        )?)
    } else {
        None
    };

    Ok((
        input,
        ParamGrads {
            weights: Tensor::new(state.weights.shape().to_vec(), weights)?,
            biases: Tensor::new(vec![out_channels], biases)?,
        },
    ))
}
