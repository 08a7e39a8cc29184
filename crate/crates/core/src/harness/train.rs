use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::nn::{l2_penalty, Gradients, LayerSpec, Mode, Network, TrainConfig};
use crate::preprocess::{augment_flip, frame_to_tensor_sized, Sample};
use crate::rng::{self, pair_index, Purpose};
use crate::synth::{DatasetManifest, Frame, NoiseLevel, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: u32,
    /// Mean cross-entropy over the epoch plus the L2 penalty.
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub log: Vec<EpochLog>,
    /// Network with the highest validation accuracy (earliest on ties;
    /// epoch 0 is the initial network).
    pub best: Network<f32>,
    pub best_epoch: u32,
    pub best_val_accuracy: f64,
}

/// Reads and preprocesses one split of a dataset to `side×side` inputs.
pub fn load_split(manifest: &DatasetManifest, root: &Path, split: Split, side: usize) -> Result<Vec<Sample>> {
    manifest
        .split(split)
        .map(|e| {
            let frame = Frame::load(root.join(&e.path))?;
            Ok(Sample {
                tensor: frame_to_tensor_sized(&frame, side)?,
                label: e.level,
            })
        })
        .collect()
}

/// Argmax class per sample; ties go to the lower level.
pub fn predict_levels(net: &Network<f32>, samples: &[Sample]) -> Result<Vec<NoiseLevel>> {
    samples
        .iter()
        .map(|s| NoiseLevel::from_index(net.predict(&s.tensor)?.argmax()))
        .collect()
}

pub fn evaluate(net: &Network<f32>, samples: &[Sample]) -> Result<f64> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let predicted = predict_levels(net, samples)?;
    let correct = predicted.iter().zip(samples).filter(|(p, s)| **p == s.label).count();
    Ok(correct as f64 / samples.len() as f64)
}

/// Mini-batch Adam training with per-epoch shuffling and flip augmentation.
///
/// Each epoch draws its sample order from the `(seed, epoch)` shuffle
/// stream and each sample's flips (and dropout masks) from its own
/// `(seed, epoch, index)` stream. Batch gradients are averaged, then the
/// L2 gradient is added before the optimiser step.
pub fn fit(
    net: &mut Network<f32>,
    train: &[Sample],
    val: &[Sample],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<FitOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let stochastic = net.layers().iter().any(|l| matches!(l, LayerSpec::Dropout { .. }));
    let mut best = net.clone();
    let mut best_epoch = 0;
    let mut best_val_accuracy = evaluate(net, val)?;
    let mut log = Vec::with_capacity(config.epochs as usize);

    for epoch in 1..=config.epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng::stream(config.seed, Purpose::Shuffle, u64::from(epoch)));

        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros_like(net);
            let mut batch_loss = 0.0;
            for &i in batch {
                let stream = pair_index(epoch, i as u32);
                let sample = augment_flip(&train[i], &mut rng::stream(config.seed, Purpose::Augment, stream));
                let mut drop_rng = rng::stream(config.seed, Purpose::Dropout, stream);
                let mode = if stochastic { Mode::Train(&mut drop_rng) } else { Mode::Eval };
                let (loss, g) = net.loss_and_gradients(&sample.tensor, sample.label.index(), mode)?;
                batch_loss += loss;
                grads.add_assign(&g)?;
            }
            let n = batch.len() as f64;
            grads.scale(1.0 / n as f32);
            let (penalty, penalty_grads) = l2_penalty(net, config.l2_lambda);
            grads.add_assign(&penalty_grads)?;
            let total = batch_loss / n + penalty;
            if !total.is_finite() || !grads.is_finite() {
                return Err(Error::NonFinite(format!("training loss diverged at epoch {epoch}")));
            }
            loss_sum += total * n;
            net.apply_gradients(&grads, config)?;
        }

        let entry = EpochLog {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_accuracy: evaluate(net, val)?,
        };
        if entry.val_accuracy > best_val_accuracy {
            best = net.clone();
            best_epoch = epoch;
            best_val_accuracy = entry.val_accuracy;
        }
        on_epoch(&entry);
        log.push(entry);
    }
    Ok(FitOutcome {
        log,
        best,
        best_epoch,
        best_val_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    /// Two-class toy set: bright left half vs bright right half.
    fn toy() -> Vec<Sample> {
        (0..32)
            .map(|i| {
                let left = i % 2 == 0;
                let jitter = (i as f32) * 0.01;
                let data = (0..16)
                    .map(|p| {
                        let col = p % 4;
                        if (col < 2) == left {
                            0.8 + jitter
                        } else {
                            0.1
                        }
                    })
                    .collect();
                Sample {
                    tensor: Tensor::new(vec![1, 4, 4], data).unwrap(),
                    label: NoiseLevel::new(if left { 1 } else { 2 }).unwrap(),
                }
            })
            .collect()
    }

    fn toy_net(seed: u64) -> Network<f32> {
        Network::new(
            vec![LayerSpec::Flatten, LayerSpec::dense(8), LayerSpec::Relu, LayerSpec::dense(5), LayerSpec::Softmax],
            vec![1, 4, 4],
            seed,
        )
        .unwrap()
    }

    #[test]
    fn learns_toy_problem_deterministically() {
        let data = toy();
        let cfg = TrainConfig {
            epochs: 20,
            batch_size: 8,
            seed: 5,
            ..TrainConfig::default()
        };
        let mut a = toy_net(1);
        let out_a = fit(&mut a, &data, &data, &cfg, |_| {}).unwrap();
        let mut b = toy_net(1);
        let out_b = fit(&mut b, &data, &data, &cfg, |_| {}).unwrap();
        assert_eq!(a, b);
        assert_eq!(out_a.log, out_b.log);
        assert_eq!(out_a.log.len(), 20);
        assert!(out_a.log.last().unwrap().train_loss < out_a.log[0].train_loss);
    }

    #[test]
    fn zero_epochs_keeps_initial_weights() {
        let data = toy();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let mut net = toy_net(2);
        let out = fit(&mut net, &data, &data, &cfg, |_| {}).unwrap();
        assert_eq!(net, toy_net(2));
        assert!(out.log.is_empty());
        assert_eq!(out.best_epoch, 0);
    }

    #[test]
    fn diverging_run_is_reported() {
        let mut data = toy();
        data[0].tensor.data_mut()[0] = f32::NAN;
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        let err = fit(&mut toy_net(3), &data, &data, &cfg, |_| {}).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }
}
