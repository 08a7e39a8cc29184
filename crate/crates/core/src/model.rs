//! The four classifier architectures.
//!
//! Model 1 is AlexNet with a single-channel input, no channel grouping, no
//! local response normalisation, and dropout (0.5) after the two hidden
//! fully connected layers. Models 2–4 are progressively smaller networks
//! that share its first-layer geometry. Conv kernels are not part of the
//! published tables; they follow the configuration that reproduces the
//! published parameter totals: an 11×11 stride-4 first convolution, 3×3
//! padding-1 convolutions after it, and 3×3 stride-2 max pooling.

use std::fmt;

use crate::error::{Error, Result};
use crate::nn::{LayerKind, LayerSpec, Network};
use crate::tensor::Scalar;

pub const INPUT_SIDE: usize = 227;
pub const NUM_CLASSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId(u8);

impl ModelId {
    pub const ALL: [ModelId; 4] = [ModelId(1), ModelId(2), ModelId(3), ModelId(4)];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=4).contains(&id) {
            Ok(Self(id))
        } else {
            Err(Error::UnknownModel(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Parameter total printed alongside the published architecture table.
    /// Model 1 has no printed total.
    pub fn published_param_total(self) -> Option<u64> {
        match self.0 {
            2 => Some(2_504_741),
            3 => Some(557_661),
            4 => Some(137_777),
            _ => None,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An architecture: ordered layers over a fixed `1×227×227` input and a
/// five-way softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub layers: Vec<LayerSpec>,
    pub input_shape: [usize; 3],
    pub num_classes: usize,
}

fn conv_block(layers: &mut Vec<LayerSpec>, conv: LayerSpec, pool: bool) {
    layers.push(conv);
    layers.push(LayerSpec::Relu);
    if pool {
        layers.push(LayerSpec::pool(3, 2));
    }
}

fn head(layers: &mut Vec<LayerSpec>, hidden: &[usize], dropout: Option<f32>) {
    layers.push(LayerSpec::Flatten);
    for &units in hidden {
        layers.push(LayerSpec::dense(units));
        layers.push(LayerSpec::Relu);
        if let Some(rate) = dropout {
            layers.push(LayerSpec::Dropout { rate });
        }
    }
    layers.push(LayerSpec::dense(NUM_CLASSES));
    layers.push(LayerSpec::Softmax);
}

/// Convolution widths of the three smaller models.
fn compact_channels(id: u8) -> &'static [usize] {
    match id {
        2 => &[32, 96, 128],
        3 => &[32, 64, 128],
        4 => &[16, 16],
        _ => unreachable!("validated id"),
    }
}

pub fn build_model(id: u8) -> Result<ModelSpec> {
    let id = ModelId::new(id)?;
    let mut layers = Vec::new();
    match id.get() {
        1 => {
            conv_block(&mut layers, LayerSpec::conv(96, 11, 4, 0), true);
            conv_block(&mut layers, LayerSpec::conv(256, 5, 1, 2), true);
            conv_block(&mut layers, LayerSpec::conv(384, 3, 1, 1), false);
            conv_block(&mut layers, LayerSpec::conv(384, 3, 1, 1), false);
            conv_block(&mut layers, LayerSpec::conv(256, 3, 1, 1), true);
            head(&mut layers, &[4096, 4096], Some(0.5));
        }
        n => {
            for (i, &ch) in compact_channels(n).iter().enumerate() {
                let conv = if i == 0 {
                    LayerSpec::conv(ch, 11, 4, 0)
                } else {
                    LayerSpec::conv(ch, 3, 1, 1)
                };
                conv_block(&mut layers, conv, true);
            }
            let hidden = match n {
                2 => 512,
                3 => 100,
                _ => 50,
            };
            head(&mut layers, &[hidden], None);
        }
    }
    let spec = ModelSpec {
        id,
        layers,
        input_shape: [1, INPUT_SIDE, INPUT_SIDE],
        num_classes: NUM_CLASSES,
    };
    spec.layer_shapes()?;
    Ok(spec)
}

/// Conv layers contribute `out·(in·k²+1)`, dense layers `out·(in+1)`.
pub fn param_count(spec: &ModelSpec) -> u64 {
    let mut shape = spec.input_shape.to_vec();
    let mut total = 0;
    for layer in &spec.layers {
        total += layer.param_count(&shape).expect("spec shapes validated at build");
        shape = layer.output_shape(&shape).expect("spec shapes validated at build");
    }
    total
}

/// `[C, H, W]` as `HxWxC`, `[N]` as `N`.
pub fn display_shape(shape: &[usize]) -> String {
    match *shape {
        [c, h, w] => format!("{h}x{w}x{c}"),
        _ => shape.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
    }
}

impl ModelSpec {
    /// Output shape after every layer.
    pub fn layer_shapes(&self) -> Result<Vec<(LayerSpec, Vec<usize>)>> {
        let shapes = crate::nn::network::walk_shapes(&self.layers, &self.input_shape)?;
        match shapes.last().map(Vec::as_slice) {
            Some([n]) if *n == self.num_classes => {}
            other => {
                return Err(Error::InvalidLayer(format!(
                    "model must end in {} outputs, ends in {other:?}",
                    self.num_classes
                )))
            }
        }
        Ok(self.layers.iter().copied().zip(shapes).collect())
    }

    /// Shapes of the rows shown in the architecture table: every conv,
    /// pool, flatten, and dense output (activations and dropout omitted).
    pub fn table_shapes(&self) -> Vec<(LayerKind, Vec<usize>)> {
        self.layer_shapes()
            .expect("validated at build")
            .into_iter()
            .filter(|(l, _)| {
                matches!(
                    l.kind(),
                    LayerKind::Conv2d | LayerKind::MaxPool | LayerKind::Flatten | LayerKind::Dense
                )
            })
            .map(|(l, s)| (l.kind(), s))
            .collect()
    }

    pub fn param_count(&self) -> u64 {
        param_count(self)
    }

    pub fn network<T: Scalar>(&self, seed: u64) -> Result<Network<T>> {
        Network::new(self.layers.clone(), self.input_shape.to_vec(), seed)
    }

    /// Human-readable layer table with shapes and a parameter total.
    pub fn summary(&self) -> String {
        let mut out = format!("CNN Model {}\n{:<12}{}\n", self.id, "Input", display_shape(&self.input_shape));
        for (layer, shape) in self.layer_shapes().expect("validated at build") {
            out.push_str(&format!("{:<12}{}\n", layer.kind().to_string(), display_shape(&shape)));
        }
        out.push_str(&format!("{:<12}{}\n", "Params", group_thousands(self.param_count())));
        out
    }
}

pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
