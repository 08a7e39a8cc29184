use super::activation::{dropout_backward, dropout_forward, relu, relu_backward, DropoutCache, ReluCache};
use super::adam::{adam_step, TrainConfig};
use super::conv::{conv2d_backward_inner, conv2d_forward, ConvCache};
use super::dense::{dense_backward, dense_forward, DenseCache};
use super::layer::LayerSpec;
use super::loss::{softmax, softmax_cross_entropy};
use super::pool::{maxpool_backward, maxpool_forward, PoolCache};
use super::state::{LayerState, ParamGrads};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose, StreamRng};
use crate::tensor::{Scalar, Tensor};

/// Whether stochastic layers (dropout) are active.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut StreamRng),
}

#[derive(Debug, Clone)]
pub enum LayerCache<T> {
    Conv(ConvCache<T>),
    Pool(PoolCache),
    Relu(ReluCache),
    Flatten(Vec<usize>),
    Dense(DenseCache<T>),
    Dropout(DropoutCache<T>),
    Identity,
}

/// Logits plus everything the backward pass needs.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub logits: Tensor<T>,
    caches: Vec<LayerCache<T>>,
}

/// Per-layer parameter gradients, `None` for parameter-free layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T = f32> {
    layers: Vec<Option<ParamGrads<T>>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(net: &Network<T>) -> Self {
        Self {
            layers: net
                .states
                .iter()
                .map(|s| s.as_ref().map(LayerState::zero_grads))
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Option<ParamGrads<T>>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Option<ParamGrads<T>>] {
        &mut self.layers
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::shape(&[self.layers.len()], &[other.layers.len()]));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            match (a, b) {
                (Some(a), Some(b)) => a.add_assign(b)?,
                (None, None) => {}
                _ => return Err(Error::InvalidLayer("gradient layouts differ".into())),
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: T) {
        for g in self.layers.iter_mut().flatten() {
            g.scale(factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().flatten().all(ParamGrads::is_finite)
    }
}

/// A sequential network: a validated layer list and its parameters.
///
/// A trailing [`LayerSpec::Softmax`] is applied by [`Network::predict`];
/// training fuses it into the cross-entropy loss instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T = f32> {
    layers: Vec<LayerSpec>,
    input_shape: Vec<usize>,
    shapes: Vec<Vec<usize>>,
    states: Vec<Option<LayerState<T>>>,
}

/// Output shape after each layer, starting from `input_shape`.
pub(crate) fn walk_shapes(layers: &[LayerSpec], input_shape: &[usize]) -> Result<Vec<Vec<usize>>> {
    if layers.is_empty() {
        return Err(Error::InvalidLayer("a network needs at least one layer".into()));
    }
    if let Some(pos) = layers.iter().position(|l| *l == LayerSpec::Softmax) {
        if pos != layers.len() - 1 {
            return Err(Error::InvalidLayer("softmax is only allowed as the final layer".into()));
        }
    }
    let mut shapes = Vec::with_capacity(layers.len());
    let mut current = input_shape.to_vec();
    for layer in layers {
        current = layer.output_shape(&current)?;
        shapes.push(current.clone());
    }
    Ok(shapes)
}

impl<T: Scalar> Network<T> {
    /// Builds a network with He-normal weights drawn from `seed`.
    pub fn new(layers: Vec<LayerSpec>, input_shape: Vec<usize>, seed: u64) -> Result<Self> {
        let shapes = walk_shapes(&layers, &input_shape)?;
        let mut rng = rng::stream(seed, Purpose::Init, 0);
        let mut states = Vec::with_capacity(layers.len());
        for (i, layer) in layers.iter().enumerate() {
            let in_shape = if i == 0 { &input_shape } else { &shapes[i - 1] };
            states.push(
                layer
                    .param_shapes(in_shape)?
                    .map(|(w, b)| LayerState::he_normal(&w, &b, &mut rng)),
            );
        }
        Ok(Self {
            layers,
            input_shape,
            shapes,
            states,
        })
    }

    /// Builds a network from existing parameters, given in layer order for
    /// the conv and dense layers only.
    pub fn from_states(layers: Vec<LayerSpec>, input_shape: Vec<usize>, params: Vec<LayerState<T>>) -> Result<Self> {
        let shapes = walk_shapes(&layers, &input_shape)?;
        let expected = layers.iter().filter(|l| l.has_params()).count();
        if params.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected parameters for {expected} layers, got {}",
                params.len()
            )));
        }
        let mut params = params.into_iter();
        let mut states = Vec::with_capacity(layers.len());
        for (i, layer) in layers.iter().enumerate() {
            let in_shape = if i == 0 { &input_shape } else { &shapes[i - 1] };
            match layer.param_shapes(in_shape)? {
                Some((w, b)) => {
                    let state = params.next().expect("count checked");
                    state.weights.ensure_shape(&w)?;
                    state.biases.ensure_shape(&b)?;
                    states.push(Some(state));
                }
                None => states.push(None),
            }
        }
        Ok(Self {
            layers,
            input_shape,
            shapes,
            states,
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    /// Output shape of every layer, in order.
    pub fn output_shapes(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    /// Parameter states of the conv and dense layers, in layer order.
    pub fn param_states(&self) -> impl Iterator<Item = &LayerState<T>> {
        self.states.iter().flatten()
    }

    pub fn param_states_mut(&mut self) -> impl Iterator<Item = &mut LayerState<T>> {
        self.states.iter_mut().flatten()
    }

    pub fn state(&self, layer: usize) -> Option<&LayerState<T>> {
        self.states.get(layer).and_then(Option::as_ref)
    }

    pub fn state_mut(&mut self, layer: usize) -> Option<&mut LayerState<T>> {
        self.states.get_mut(layer).and_then(Option::as_mut)
    }

    pub fn param_count(&self) -> usize {
        self.param_states().map(LayerState::param_count).sum()
    }

    fn logit_layers(&self) -> usize {
        match self.layers.last() {
            Some(LayerSpec::Softmax) => self.layers.len() - 1,
            _ => self.layers.len(),
        }
    }

    pub fn forward(&self, input: &Tensor<T>, mut mode: Mode<'_>) -> Result<Forward<T>> {
        input.ensure_shape(&self.input_shape)?;
        let n = self.logit_layers();
        let mut caches = Vec::with_capacity(n);
        let mut x = input.clone();
        for (layer, state) in self.layers[..n].iter().zip(&self.states) {
            let (out, cache) = match (layer, state) {
                (LayerSpec::Conv2d { .. }, Some(st)) => {
                    let (out, c) = conv2d_forward(&x, st, layer)?;
                    (out, LayerCache::Conv(c))
                }
                (LayerSpec::Dense { .. }, Some(st)) => {
                    let (out, c) = dense_forward(&x, st, layer)?;
                    (out, LayerCache::Dense(c))
                }
                (LayerSpec::MaxPool { .. }, _) => {
                    let (out, c) = maxpool_forward(&x, layer)?;
                    (out, LayerCache::Pool(c))
                }
                (LayerSpec::Relu, _) => {
                    let (out, c) = relu(&x);
                    (out, LayerCache::Relu(c))
                }
                (LayerSpec::Flatten, _) => {
                    let shape = x.shape().to_vec();
                    let len = x.len();
                    (x.reshape(vec![len])?, LayerCache::Flatten(shape))
                }
                (LayerSpec::Dropout { rate }, _) => match &mut mode {
                    Mode::Train(rng) => {
                        let (out, c) = dropout_forward(&x, *rate, *rng);
                        (out, LayerCache::Dropout(c))
                    }
                    Mode::Eval => (x, LayerCache::Identity),
                },
                (LayerSpec::Softmax, _) => (softmax(&x), LayerCache::Identity),
                _ => unreachable!("parameter layers always carry state"),
            };
            x = out;
            caches.push(cache);
        }
        Ok(Forward { logits: x, caches })
    }

    /// Backpropagates `grad_logits` (the gradient with respect to
    /// [`Forward::logits`]) to every parameter.
    pub fn backward(&self, forward: &Forward<T>, grad_logits: &Tensor<T>) -> Result<Gradients<T>> {
        grad_logits.ensure_shape(forward.logits.shape())?;
        let first_param = self.states.iter().position(Option::is_some).unwrap_or(usize::MAX);
        let mut grads: Vec<Option<ParamGrads<T>>> = vec![None; self.layers.len()];
        let mut g = grad_logits.clone();
        for i in (0..forward.caches.len()).rev() {
            if i < first_param {
                break;
            }
            let want_input = i > first_param;
            g = match (&forward.caches[i], &self.states[i]) {
                (LayerCache::Conv(c), Some(st)) => {
                    let (input, params) = conv2d_backward_inner(&g, c, st, want_input)?;
                    grads[i] = Some(params);
                    match input {
                        Some(t) => t,
                        None => break,
                    }
                }
                (LayerCache::Dense(c), Some(st)) => {
                    let d = dense_backward(&g, c, st)?;
                    grads[i] = Some(ParamGrads {
                        weights: d.weights,
                        biases: d.biases,
                    });
                    d.input
                }
                (LayerCache::Pool(c), _) => maxpool_backward(&g, c)?,
                (LayerCache::Relu(c), _) => relu_backward(&g, c)?,
                (LayerCache::Flatten(shape), _) => g.reshape(shape.clone())?,
                (LayerCache::Dropout(c), _) => dropout_backward(&g, c)?,
                (LayerCache::Identity, _) => g,
                _ => unreachable!("cache kinds follow layer kinds"),
            };
        }
        for (slot, state) in grads.iter_mut().zip(&self.states) {
            if slot.is_none() {
                *slot = state.as_ref().map(LayerState::zero_grads);
            }
        }
        Ok(Gradients { layers: grads })
    }

    /// Class probabilities (softmax of the logits) without dropout.
    pub fn predict(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        let fwd = self.forward(input, Mode::Eval)?;
        Ok(softmax(&fwd.logits))
    }

    /// Cross-entropy of one labelled input and its parameter gradients.
    pub fn loss_and_gradients(&self, input: &Tensor<T>, label: usize, mode: Mode<'_>) -> Result<(f64, Gradients<T>)> {
        let fwd = self.forward(input, mode)?;
        let xent = softmax_cross_entropy(&fwd.logits, label)?;
        let grads = self.backward(&fwd, &xent.grad_logits)?;
        Ok((xent.loss, grads))
    }

    /// Applies one Adam step to every parameterised layer.
    pub fn apply_gradients(&mut self, grads: &Gradients<T>, config: &TrainConfig) -> Result<()> {
        if grads.layers.len() != self.states.len() {
            return Err(Error::shape(&[self.states.len()], &[grads.layers.len()]));
        }
        for (state, g) in self.states.iter_mut().zip(&grads.layers) {
            if let (Some(state), Some(g)) = (state, g) {
                adam_step(state, g, config)?;
            }
        }
        Ok(())
    }
}
