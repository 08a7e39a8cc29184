use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Conv2d,
    MaxPool,
    Relu,
    Flatten,
    Dense,
    Dropout,
    Softmax,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Conv2d => "Conv2D",
            LayerKind::MaxPool => "Max Pool",
            LayerKind::Relu => "Activation",
            LayerKind::Flatten => "Flatten",
            LayerKind::Dense => "FC",
            LayerKind::Dropout => "Dropout",
            LayerKind::Softmax => "Softmax",
        })
    }
}

/// One layer of a sequential model and its hyperparameters.
///
/// Spatial tensors are `[channels, height, width]`; dense layers take a
/// rank-1 input, so a `Flatten` must precede the first `Dense`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv2d {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    MaxPool {
        kernel: usize,
        stride: usize,
    },
    Relu,
    Flatten,
    Dense {
        out_units: usize,
    },
    /// Inverted dropout; identity outside training.
    Dropout {
        rate: f32,
    },
    /// Only valid as the final layer.
    Softmax,
}

/// `floor((input + 2·padding − kernel) / stride) + 1`, rejecting windows
/// that never fit.
pub fn output_extent(input: usize, kernel: usize, stride: usize, padding: usize) -> Result<usize> {
    if kernel == 0 || stride == 0 {
        return Err(Error::InvalidLayer(format!(
            "kernel ({kernel}) and stride ({stride}) must be at least 1"
        )));
    }
    let padded = input + 2 * padding;
    if padded < kernel {
        return Err(Error::InvalidLayer(format!(
            "window {kernel} does not fit input extent {input} with padding {padding}"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

impl LayerSpec {
    pub fn conv(out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        LayerSpec::Conv2d {
            out_channels,
            kernel,
            stride,
            padding,
        }
    }

    pub fn pool(kernel: usize, stride: usize) -> Self {
        LayerSpec::MaxPool { kernel, stride }
    }

    pub fn dense(out_units: usize) -> Self {
        LayerSpec::Dense { out_units }
    }

    pub fn kind(&self) -> LayerKind {
        match self {
            LayerSpec::Conv2d { .. } => LayerKind::Conv2d,
            LayerSpec::MaxPool { .. } => LayerKind::MaxPool,
            LayerSpec::Relu => LayerKind::Relu,
            LayerSpec::Flatten => LayerKind::Flatten,
            LayerSpec::Dense { .. } => LayerKind::Dense,
            LayerSpec::Dropout { .. } => LayerKind::Dropout,
            LayerSpec::Softmax => LayerKind::Softmax,
        }
    }

    pub fn has_params(&self) -> bool {
        matches!(self, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                stride,
                ..
            } => {
                if out_channels == 0 || kernel == 0 || stride == 0 {
                    return Err(Error::InvalidLayer(format!("{self:?}: sizes must be at least 1")));
                }
            }
            LayerSpec::MaxPool { kernel, stride } => {
                if kernel == 0 || stride == 0 {
                    return Err(Error::InvalidLayer(format!("{self:?}: sizes must be at least 1")));
                }
            }
            LayerSpec::Dense { out_units: 0 } => {
                return Err(Error::InvalidLayer("dense layer needs at least one unit".into()));
            }
            LayerSpec::Dropout { rate } if !(0.0..1.0).contains(&rate) => {
                return Err(Error::InvalidLayer(format!("dropout rate {rate} outside [0, 1)")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        self.validate()?;
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                let [_, h, w] = spatial(input)?;
                Ok(vec![
                    out_channels,
                    output_extent(h, kernel, stride, padding)?,
                    output_extent(w, kernel, stride, padding)?,
                ])
            }
            LayerSpec::MaxPool { kernel, stride } => {
                let [c, h, w] = spatial(input)?;
                Ok(vec![
                    c,
                    output_extent(h, kernel, stride, 0)?,
                    output_extent(w, kernel, stride, 0)?,
                ])
            }
            LayerSpec::Relu | LayerSpec::Dropout { .. } | LayerSpec::Softmax => Ok(input.to_vec()),
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
            LayerSpec::Dense { out_units } => {
                if input.len() != 1 {
                    return Err(Error::InvalidShape(format!(
                        "dense layer expects a rank-1 input, got {input:?}"
                    )));
                }
                Ok(vec![out_units])
            }
        }
    }

    /// Weight and bias shapes for a layer fed with `input`, if it has any.
    pub fn param_shapes(&self, input: &[usize]) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                ..
            } => {
                let [c, _, _] = spatial(input)?;
                Ok(Some((vec![out_channels, c, kernel, kernel], vec![out_channels])))
            }
            LayerSpec::Dense { out_units } => {
                let n: usize = input.iter().product();
                Ok(Some((vec![out_units, n], vec![out_units])))
            }
            _ => Ok(None),
        }
    }

    /// Trainable parameter count for a layer fed with `input`.
    pub fn param_count(&self, input: &[usize]) -> Result<u64> {
        Ok(match self.param_shapes(input)? {
            Some((w, b)) => (w.iter().product::<usize>() + b.iter().product::<usize>()) as u64,
            None => 0,
        })
    }
}

fn spatial(input: &[usize]) -> Result<[usize; 3]> {
    match *input {
        [c, h, w] => Ok([c, h, w]),
        _ => Err(Error::InvalidShape(format!(
            "expected a [channels, height, width] input, got {input:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alexnet_first_layer_geometry() {
        let conv = LayerSpec::conv(32, 11, 4, 0);
        assert_eq!(conv.output_shape(&[1, 227, 227]).unwrap(), vec![32, 55, 55]);
        let pool = LayerSpec::pool(3, 2);
        assert_eq!(pool.output_shape(&[32, 55, 55]).unwrap(), vec![32, 27, 27]);
        assert_eq!(pool.output_shape(&[32, 27, 27]).unwrap(), vec![32, 13, 13]);
        assert_eq!(pool.output_shape(&[32, 13, 13]).unwrap(), vec![32, 6, 6]);
    }

    #[test]
    fn rejects_windows_that_do_not_fit() {
        assert!(output_extent(2, 3, 1, 0).is_err());
        assert_eq!(output_extent(2, 3, 1, 1).unwrap(), 2);
        assert!(LayerSpec::conv(1, 0, 1, 0).validate().is_err());
        assert!(LayerSpec::pool(2, 0).validate().is_err());
        assert!(LayerSpec::Dropout { rate: 1.0 }.validate().is_err());
    }

    #[test]
    fn dense_requires_flattened_input() {
        assert!(LayerSpec::dense(4).output_shape(&[2, 2, 2]).is_err());
        assert_eq!(LayerSpec::Flatten.output_shape(&[2, 2, 2]).unwrap(), vec![8]);
        assert_eq!(LayerSpec::dense(4).output_shape(&[8]).unwrap(), vec![4]);
    }

    #[test]
    fn param_counts() {
        assert_eq!(LayerSpec::conv(32, 11, 4, 0).param_count(&[1, 227, 227]).unwrap(), 3_904);
        assert_eq!(LayerSpec::dense(5).param_count(&[512]).unwrap(), 2_565);
        assert_eq!(LayerSpec::Relu.param_count(&[3]).unwrap(), 0);
    }
}
