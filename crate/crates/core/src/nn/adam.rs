use super::state::{LayerState, Moments, ParamGrads};
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Optimiser and schedule settings for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty weight on conv/dense weights; 0 disables it.
    pub l2_lambda: f64,
    pub epochs: u32,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2_lambda: 0.0,
            epochs: 30,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return bad(format!("{name} must lie in [0, 1), got {beta}"));
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return bad(format!("l2 lambda must be non-negative, got {}", self.l2_lambda));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        Ok(())
    }
}

/// One bias-corrected Adam update of a layer's weights and biases. The step
/// counter is incremented before the correction terms are formed.
pub fn adam_step<T: Scalar>(state: &mut LayerState<T>, grads: &ParamGrads<T>, config: &TrainConfig) -> Result<()> {
    grads.weights.ensure_shape(state.weights.shape())?;
    grads.biases.ensure_shape(state.biases.shape())?;
    state.step += 1;
    let t = state.step as i32;
    let correction1 = 1.0 - config.beta1.powi(t);
    let correction2 = 1.0 - config.beta2.powi(t);
    update(&mut state.weights, &mut state.weight_moments, &grads.weights, config, correction1, correction2);
    update(&mut state.biases, &mut state.bias_moments, &grads.biases, config, correction1, correction2);
    Ok(())
}

fn update<T: Scalar>(
    params: &mut Tensor<T>,
    moments: &mut Moments<T>,
    grads: &Tensor<T>,
    config: &TrainConfig,
    correction1: f64,
    correction2: f64,
) {
    let b1 = T::from_f64(config.beta1);
    let b2 = T::from_f64(config.beta2);
    let one = T::one();
    let inv_c1 = T::from_f64(1.0 / correction1);
    let inv_c2 = T::from_f64(1.0 / correction2);
    let lr = T::from_f64(config.learning_rate);
    let eps = T::from_f64(config.epsilon);
    let m = moments.m.data_mut();
    let v = moments.v.data_mut();
    for (((w, m), v), &g) in params.data_mut().iter_mut().zip(m).zip(v).zip(grads.data()) {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        let m_hat = *m * inv_c1;
        let v_hat = *v * inv_c2;
        *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_state(w: f64) -> LayerState<f64> {
        LayerState::new(Tensor::from_vec(vec![w]), Tensor::from_vec(vec![0.0]))
    }

    fn grads(g: f64) -> ParamGrads<f64> {
        ParamGrads {
            weights: Tensor::from_vec(vec![g]),
            biases: Tensor::from_vec(vec![0.0]),
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut st = scalar_state(1.0);
        adam_step(&mut st, &grads(0.0), &TrainConfig::default()).unwrap();
        assert_eq!(st.weights.data(), &[1.0]);
        assert_eq!(st.biases.data(), &[0.0]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // t=1: m = 0.05, v = 0.00025, m̂ = 0.5, v̂ = 0.25, Δ = 1e-3·0.5/(0.5+1e-8)
        let mut st = scalar_state(1.0);
        adam_step(&mut st, &grads(0.5), &TrainConfig::default()).unwrap();
        let expected = 1.0 - 1e-3 * 0.5 / (0.5 + 1e-8);
        assert!((st.weights.data()[0] - expected).abs() < 1e-15);
        assert!((st.weights.data()[0] - 0.999).abs() < 1e-10);
    }

    #[test]
    fn second_identical_step_same_size() {
        // t=2: m = 0.095, v = 0.00049975, m̂ = 0.5, v̂ = 0.25 again.
        let mut st = scalar_state(1.0);
        let cfg = TrainConfig::default();
        adam_step(&mut st, &grads(0.5), &cfg).unwrap();
        let after_one = st.weights.data()[0];
        adam_step(&mut st, &grads(0.5), &cfg).unwrap();
        let second = after_one - st.weights.data()[0];
        assert!((second - 1e-3).abs() < 1e-10, "second update {second}");
        assert_eq!(st.step, 2);
    }

    #[test]
    fn rejects_mismatched_gradients() {
        let mut st = scalar_state(1.0);
        let g = ParamGrads {
            weights: Tensor::from_vec(vec![0.0, 0.0]),
            biases: Tensor::from_vec(vec![0.0]),
        };
        assert!(adam_step(&mut st, &g, &TrainConfig::default()).is_err());
        assert_eq!(st.step, 0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let mut c = TrainConfig::default();
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.beta2 = 1.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.l2_lambda = -0.1;
        assert!(c.validate().is_err());
    }
}
