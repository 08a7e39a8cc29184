use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::tensor::{Scalar, Tensor};

/// First and second Adam moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub m: Tensor<T>,
    pub v: Tensor<T>,
}

impl<T: Scalar> Moments<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            m: Tensor::zeros(shape),
            v: Tensor::zeros(shape),
        }
    }
}

/// Trainable parameters of a conv or dense layer plus optimiser state.
///
/// Conv weights are `[out_channels, in_channels, k, k]`; dense weights are
/// `[out_units, in_units]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState<T = f32> {
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
    pub weight_moments: Moments<T>,
    pub bias_moments: Moments<T>,
    pub step: u64,
}

impl<T: Scalar> LayerState<T> {
    pub fn new(weights: Tensor<T>, biases: Tensor<T>) -> Self {
        let weight_moments = Moments::zeros(weights.shape());
        let bias_moments = Moments::zeros(biases.shape());
        Self {
            weights,
            biases,
            weight_moments,
            bias_moments,
            step: 0,
        }
    }

    /// He-normal weights (variance `2 / fan_in`) and zero biases. Values are
    /// drawn in `f64` so `f32` and `f64` networks from one seed agree.
    pub fn he_normal(weight_shape: &[usize], bias_shape: &[usize], rng: &mut impl Rng) -> Self {
        let fan_in: usize = weight_shape[1..].iter().product();
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std dev");
        let n: usize = weight_shape.iter().product();
        let data = (0..n).map(|_| T::from_f64(normal.sample(rng))).collect();
        let weights = Tensor::new(weight_shape.to_vec(), data).expect("shape matches data");
        Self::new(weights, Tensor::zeros(bias_shape))
    }

    pub fn zero_grads(&self) -> ParamGrads<T> {
        ParamGrads {
            weights: Tensor::zeros(self.weights.shape()),
            biases: Tensor::zeros(self.biases.shape()),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Gradients for one layer's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads<T = f32> {
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

impl<T: Scalar> ParamGrads<T> {
    pub fn add_assign(&mut self, other: &ParamGrads<T>) -> Result<()> {
        self.weights.add_assign(&other.weights)?;
        self.biases.add_assign(&other.biases)
    }

    pub fn scale(&mut self, factor: T) {
        self.weights.scale(factor);
        self.biases.scale(factor);
    }

    pub fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.biases.is_finite()
    }
}
