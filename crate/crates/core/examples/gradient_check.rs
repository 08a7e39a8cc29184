//! Compares backpropagated gradients of a small network with central
//! finite differences in f64.

use emigrade::nn::{LayerSpec, Mode, Network};
use emigrade::Tensor;

fn main() -> emigrade::Result<()> {
    let layers = vec![
        LayerSpec::conv(4, 3, 1, 1),
        LayerSpec::Relu,
        LayerSpec::pool(2, 2),
        LayerSpec::Flatten,
        LayerSpec::dense(5),
        LayerSpec::Softmax,
    ];
    let net = Network::<f64>::new(layers, vec![1, 8, 8], 1)?;
    let x = Tensor::new(vec![1, 8, 8], (0..64).map(|i| ((i * 37) % 17) as f64 / 17.0).collect())?;
    let label = 3;
    let (_, grads) = net.loss_and_gradients(&x, label, Mode::Eval)?;

    let h = 1e-5;
    for (layer, g) in grads.layers().iter().enumerate() {
        let Some(g) = g else { continue };
        let mut worst: f64 = 0.0;
        for i in 0..g.weights.len() {
            let loss_at = |delta: f64| {
                let mut n = net.clone();
                n.state_mut(layer).unwrap().weights.data_mut()[i] += delta;
                n.loss_and_gradients(&x, label, Mode::Eval).unwrap().0
            };
            let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
            let analytic = g.weights.data()[i];
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6));
        }
        println!(
            "layer {layer} ({}): {} weights, worst relative error {worst:.2e}",
            net.layers()[layer].kind(),
            g.weights.len()
        );
    }
    Ok(())
}
