use super::layer::{output_extent, LayerSpec};
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Argmax positions recorded by [`maxpool_forward`].
#[derive(Debug, Clone)]
pub struct PoolCache {
    input_shape: [usize; 3],
    output_shape: [usize; 3],
    /// Flat input index chosen by each output element.
    argmax: Vec<usize>,
}

impl PoolCache {
    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }
}

/// Max over each `k×k` window. Ties resolve to the first position in
/// row-major scan order.
pub fn maxpool_forward<T: Scalar>(input: &Tensor<T>, spec: &LayerSpec) -> Result<(Tensor<T>, PoolCache)> {
    let LayerSpec::MaxPool { kernel, stride } = *spec else {
        return Err(Error::InvalidLayer(format!("expected a maxpool spec, got {spec:?}")));
    };
    let &[c, h, w] = input.shape() else {
        return Err(Error::InvalidShape(format!(
            "maxpool expects [C, H, W], got {:?}",
            input.shape()
        )));
    };
    let oh = output_extent(h, kernel, stride, 0)?;
    let ow = output_extent(w, kernel, stride, 0)?;
    let data = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let base = ch * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = base + oy * stride * w + ox * stride;
                for ky in 0..kernel {
                    let row = base + (oy * stride + ky) * w + ox * stride;
                    for idx in row..row + kernel {
                        if data[idx] > data[best] {
                            best = idx;
                        }
                    }
                }
                out.push(data[best]);
                argmax.push(best);
            }
        }
    }
    Ok((
        Tensor::new(vec![c, oh, ow], out)?,
        PoolCache {
            input_shape: [c, h, w],
            output_shape: [c, oh, ow],
            argmax,
        },
    ))
}

/// Routes each upstream value to its window's argmax, accumulating where
/// windows overlap.
pub fn maxpool_backward<T: Scalar>(grad_out: &Tensor<T>, cache: &PoolCache) -> Result<Tensor<T>> {
    grad_out.ensure_shape(&cache.output_shape)?;
    let mut grad = Tensor::zeros(&cache.input_shape);
    let g = grad.data_mut();
    for (&idx, &v) in cache.argmax.iter().zip(grad_out.data()) {
        g[idx] = g[idx] + v;
    }
    Ok(grad)
}
