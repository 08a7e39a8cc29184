//! Finite-difference gradient oracle shared by the gradient and acceptance
//! suites. Every check returns the worst relative error it saw.

#![allow(dead_code)]

use emigrade::nn::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout_backward, dropout_forward, l2_penalty,
    maxpool_backward, maxpool_forward, relu, relu_backward, softmax_cross_entropy, LayerSpec, LayerState, Mode,
    Network,
};
use emigrade::rng::{stream, Purpose};
use emigrade::Tensor;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const H: f64 = 1e-5;
pub const TOL: f64 = 1e-4;

pub fn random(shape: &[usize], seed: u64) -> Tensor<f64> {
    let mut rng = stream(seed, Purpose::Init, 99);
    let n = shape.iter().product();
    let data = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Worst relative error between `analytic` and the central difference of
/// `loss` over every element of `x`.
pub fn check(x: &Tensor<f64>, analytic: &Tensor<f64>, loss: impl Fn(&Tensor<f64>) -> f64) -> f64 {
    assert_eq!(x.shape(), analytic.shape());
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut plus = x.clone();
        plus.data_mut()[i] += H;
        let mut minus = x.clone();
        minus.data_mut()[i] -= H;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * H);
        worst = worst.max(rel_err(analytic.data()[i], numeric));
    }
    worst
}

/// Scalar probe `sum(out * r)`, whose gradient with respect to `out` is `r`.
pub fn project(out: &Tensor<f64>, r: &Tensor<f64>) -> f64 {
    out.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

pub fn conv_error(spec: LayerSpec, input_shape: &[usize], seed: u64) -> f64 {
    let LayerSpec::Conv2d { out_channels, kernel, .. } = spec else {
        panic!("not a conv layer")
    };
    let x = random(input_shape, seed);
    let state = LayerState::new(
        random(&[out_channels, input_shape[0], kernel, kernel], seed + 1),
        random(&[out_channels], seed + 2),
    );
    let (out, cache) = conv2d_forward(&x, &state, &spec).unwrap();
    let r = random(out.shape(), seed + 3);
    let g = conv2d_backward(&r, &cache, &state).unwrap();

    let input = check(&x, &g.input, |x| project(&conv2d_forward(x, &state, &spec).unwrap().0, &r));
    let weights = check(&state.weights, &g.weights, |w| {
        let st = LayerState::new(w.clone(), state.biases.clone());
        project(&conv2d_forward(&x, &st, &spec).unwrap().0, &r)
    });
    let biases = check(&state.biases, &g.biases, |b| {
        let st = LayerState::new(state.weights.clone(), b.clone());
        project(&conv2d_forward(&x, &st, &spec).unwrap().0, &r)
    });
    input.max(weights).max(biases)
}

pub fn conv_errors() -> f64 {
    [
        conv_error(LayerSpec::conv(3, 3, 1, 1), &[2, 6, 6], 1),
        conv_error(LayerSpec::conv(4, 5, 2, 0), &[3, 8, 8], 2),
        conv_error(LayerSpec::conv(2, 3, 2, 1), &[1, 7, 7], 3),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn maxpool_error() -> f64 {
    let spec = LayerSpec::pool(3, 2);
    let x = random(&[2, 7, 7], 10);
    let (out, cache) = maxpool_forward(&x, &spec).unwrap();
    let r = random(out.shape(), 11);
    let g = maxpool_backward(&r, &cache).unwrap();
    check(&x, &g, |x| project(&maxpool_forward(x, &spec).unwrap().0, &r))
}

pub fn relu_error() -> f64 {
    // keep inputs away from the kink
    let x = random(&[1, 8, 8], 20).map(|v| if v.abs() < 1e-2 { 0.5 } else { v });
    let (out, cache) = relu(&x);
    let r = random(out.shape(), 21);
    let g = relu_backward(&r, &cache).unwrap();
    check(&x, &g, |x| project(&relu(x).0, &r))
}

pub fn flatten_error() -> f64 {
    let x = random(&[2, 3, 2], 25);
    let r = random(&[12], 26);
    let flat = |x: &Tensor<f64>| x.clone().reshape(vec![12]).unwrap();
    let g = r.clone().reshape(vec![2, 3, 2]).unwrap();
    check(&x, &g, |x| project(&flat(x), &r))
}

pub fn dropout_error() -> f64 {
    let x = random(&[16], 30);
    let mask_rng = || stream(5, Purpose::Dropout, 0);
    let (out, cache) = dropout_forward(&x, 0.5, &mut mask_rng());
    let r = random(out.shape(), 31);
    let g = dropout_backward(&r, &cache).unwrap();
    check(&x, &g, |x| project(&dropout_forward(x, 0.5, &mut mask_rng()).0, &r))
}

pub fn dense_error() -> f64 {
    let spec = LayerSpec::dense(7);
    let x = random(&[12], 40);
    let state = LayerState::new(random(&[7, 12], 41), random(&[7], 42));
    let (out, cache) = dense_forward(&x, &state, &spec).unwrap();
    let r = random(out.shape(), 43);
    let g = dense_backward(&r, &cache, &state).unwrap();
    let input = check(&x, &g.input, |x| project(&dense_forward(x, &state, &spec).unwrap().0, &r));
    let weights = check(&state.weights, &g.weights, |w| {
        let st = LayerState::new(w.clone(), state.biases.clone());
        project(&dense_forward(&x, &st, &spec).unwrap().0, &r)
    });
    let biases = check(&state.biases, &g.biases, |b| {
        let st = LayerState::new(state.weights.clone(), b.clone());
        project(&dense_forward(&x, &st, &spec).unwrap().0, &r)
    });
    input.max(weights).max(biases)
}

pub fn softmax_xent_error() -> f64 {
    (0..5)
        .map(|label| {
            let z = random(&[5], 50 + label as u64).map(|v| 3.0 * v);
            let g = softmax_cross_entropy(&z, label).unwrap().grad_logits;
            check(&z, &g, |z| softmax_cross_entropy(z, label).unwrap().loss)
        })
        .fold(0.0, f64::max)
}

/// Model 4 scaled to a 1×32×32 input: the 11/4 stem does not fit, so the
/// first conv becomes 5/2; channel widths and the FC50 head are kept.
pub fn reduced_model4() -> Vec<LayerSpec> {
    vec![
        LayerSpec::conv(16, 5, 2, 0),
        LayerSpec::Relu,
        LayerSpec::pool(3, 2),
        LayerSpec::conv(16, 3, 1, 1),
        LayerSpec::Relu,
        LayerSpec::pool(3, 2),
        LayerSpec::Flatten,
        LayerSpec::dense(50),
        LayerSpec::Relu,
        LayerSpec::dense(5),
        LayerSpec::Softmax,
    ]
}

fn perturbed(net: &Network<f64>, layer: usize, bias: bool, i: usize, delta: f64) -> Network<f64> {
    let mut n = net.clone();
    let st = n.state_mut(layer).unwrap();
    let t = if bias { &mut st.biases } else { &mut st.weights };
    t.data_mut()[i] += delta;
    n
}

/// Worst error over every parameter of `net` for the scalar `loss`, and
/// the number of parameters checked.
fn network_error(
    net: &Network<f64>,
    grads: &emigrade::nn::Gradients<f64>,
    loss: impl Fn(&Network<f64>) -> f64,
) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (layer, g) in grads.layers().iter().enumerate() {
        let Some(g) = g else { continue };
        for (bias, analytic) in [(false, &g.weights), (true, &g.biases)] {
            for i in 0..analytic.len() {
                let numeric =
                    (loss(&perturbed(net, layer, bias, i, H)) - loss(&perturbed(net, layer, bias, i, -H))) / (2.0 * H);
                worst = worst.max(rel_err(analytic.data()[i], numeric));
                checked += 1;
            }
        }
    }
    (worst, checked)
}

pub fn reduced_model4_error() -> (f64, usize) {
    let net = Network::<f64>::new(reduced_model4(), vec![1, 32, 32], 3).unwrap();
    let mut rng = stream(8, Purpose::Augment, 0);
    let x = Tensor::new(vec![1, 32, 32], (0..1024).map(|_| rng.random::<f64>()).collect()).unwrap();
    let label = 2;
    let (_, grads) = net.loss_and_gradients(&x, label, Mode::Eval).unwrap();
    network_error(&net, &grads, |n| n.loss_and_gradients(&x, label, Mode::Eval).unwrap().0)
}

pub fn l2_penalty_error() -> f64 {
    let net = Network::<f64>::new(reduced_model4(), vec![1, 32, 32], 4).unwrap();
    let lambda = 0.01;
    let (_, grads) = l2_penalty(&net, lambda);
    network_error(&net, &grads, |n| l2_penalty(n, lambda).0).0
}
