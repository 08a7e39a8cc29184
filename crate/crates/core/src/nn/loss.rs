use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Output of [`softmax_cross_entropy`].
#[derive(Debug, Clone)]
pub struct SoftmaxCrossEntropy<T> {
    pub loss: f64,
    pub probabilities: Tensor<T>,
    /// `p − onehot(label)`.
    pub grad_logits: Tensor<T>,
}

/// Numerically stable softmax (the maximum logit is subtracted first).
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let max = logits
        .data()
        .iter()
        .fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64()));
    let exps: Vec<f64> = logits.data().iter().map(|v| (v.as_f64() - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let probs = exps.into_iter().map(|e| T::from_f64(e / sum)).collect();
    Tensor::new(logits.shape().to_vec(), probs).expect("same shape")
}

/// Softmax followed by negative log-likelihood of `label`, computed via
/// log-sum-exp so large logits do not overflow.
pub fn softmax_cross_entropy<T: Scalar>(logits: &Tensor<T>, label: usize) -> Result<SoftmaxCrossEntropy<T>> {
    let k = logits.len();
    if logits.rank() != 1 || k < 2 {
        return Err(Error::InvalidShape(format!(
            "softmax needs a rank-1 input with at least 2 logits, got {:?}",
            logits.shape()
        )));
    }
    if label >= k {
        return Err(Error::LabelOutOfRange { label, classes: k });
    }
    let values: Vec<f64> = logits.data().iter().map(|v| v.as_f64()).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    let log_norm = max + sum.ln();
    let loss = log_norm - values[label];

    let probs: Vec<f64> = values.iter().map(|v| (v - log_norm).exp()).collect();
    let grad = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| T::from_f64(if i == label { p - 1.0 } else { p }))
        .collect();
    Ok(SoftmaxCrossEntropy {
        loss,
        probabilities: Tensor::new(vec![k], probs.into_iter().map(T::from_f64).collect())?,
        grad_logits: Tensor::new(vec![k], grad)?,
    })
}
