use rand::Rng;

use crate::error::Result;
use crate::tensor::{Scalar, Tensor};

/// Positions where the ReLU input was strictly positive.
#[derive(Debug, Clone)]
pub struct ReluCache {
    shape: Vec<usize>,
    active: Vec<bool>,
}

pub fn relu<T: Scalar>(input: &Tensor<T>) -> (Tensor<T>, ReluCache) {
    let active: Vec<bool> = input.data().iter().map(|&v| v > T::zero()).collect();
    let out = input.map(|v| if v > T::zero() { v } else { T::zero() });
    (
        out,
        ReluCache {
            shape: input.shape().to_vec(),
            active,
        },
    )
}

/// Passes the upstream gradient where the input was positive; the
/// derivative at exactly zero is taken as zero.
pub fn relu_backward<T: Scalar>(grad_out: &Tensor<T>, cache: &ReluCache) -> Result<Tensor<T>> {
    grad_out.ensure_shape(&cache.shape)?;
    let data = grad_out
        .data()
        .iter()
        .zip(&cache.active)
        .map(|(&g, &on)| if on { g } else { T::zero() })
        .collect();
    Tensor::new(cache.shape.clone(), data)
}

/// Per-element multipliers applied by inverted dropout.
#[derive(Debug, Clone)]
pub struct DropoutCache<T> {
    shape: Vec<usize>,
    scale: Vec<T>,
}

/// Zeroes each element with probability `rate` and scales survivors by
/// `1 / (1 − rate)`.
pub fn dropout_forward<T: Scalar>(
    input: &Tensor<T>,
    rate: f32,
    rng: &mut impl Rng,
) -> (Tensor<T>, DropoutCache<T>) {
    let keep = T::from_f64(1.0 / (1.0 - f64::from(rate)));
    let scale: Vec<T> = (0..input.len())
        .map(|_| {
            if rng.random::<f32>() < rate {
                T::zero()
            } else {
                keep
            }
        })
        .collect();
    let data = input.data().iter().zip(&scale).map(|(&v, &s)| v * s).collect();
    (
        Tensor::new(input.shape().to_vec(), data).expect("same shape"),
        DropoutCache {
            shape: input.shape().to_vec(),
            scale,
        },
    )
}

pub fn dropout_backward<T: Scalar>(grad_out: &Tensor<T>, cache: &DropoutCache<T>) -> Result<Tensor<T>> {
    grad_out.ensure_shape(&cache.shape)?;
    let data = grad_out
        .data()
        .iter()
        .zip(&cache.scale)
        .map(|(&g, &s)| g * s)
        .collect();
    Tensor::new(cache.shape.clone(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn clamps_negatives() {
        let (out, _) = relu(&Tensor::from_vec(vec![-1.0f64, 0.0, 2.5]));
        assert_eq!(out.data(), &[0.0, 0.0, 2.5]);
        let (out, _) = relu(&Tensor::from_vec(vec![-3.0f64, -0.5, -1e-9]));
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gates_gradient() {
        let (_, cache) = relu(&Tensor::from_vec(vec![-1.0f64, 3.0]));
        let g = relu_backward(&Tensor::from_vec(vec![5.0, 5.0]), &cache).unwrap();
        assert_eq!(g.data(), &[0.0, 5.0]);

        let (_, cache) = relu(&Tensor::from_vec(vec![0.0f64]));
        let g = relu_backward(&Tensor::from_vec(vec![1.0]), &cache).unwrap();
        assert_eq!(g.data(), &[0.0]);
    }

    #[test]
    fn dropout_preserves_expectation() {
        let mut rng = stream(3, Purpose::Dropout, 0);
        let input = Tensor::full(&[20_000], 1.0f64);
        let (out, cache) = dropout_forward(&input, 0.5, &mut rng);
        let mean = out.data().iter().sum::<f64>() / out.len() as f64;
        assert!((mean - 1.0).abs() < 0.03, "mean {mean}");
        assert!(out.data().iter().all(|&v| v == 0.0 || v == 2.0));
        let g = dropout_backward(&Tensor::full(&[20_000], 1.0), &cache).unwrap();
        assert_eq!(g, out);
    }
}
