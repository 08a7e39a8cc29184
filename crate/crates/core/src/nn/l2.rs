use super::network::{Gradients, Network};
use crate::tensor::Scalar;

/// `λ·Σw²` over conv and dense weights (biases excluded), together with its
/// gradient `2λw` laid out like the network's parameter gradients.
pub fn l2_penalty<T: Scalar>(net: &Network<T>, lambda: f64) -> (f64, Gradients<T>) {
    let mut grads = Gradients::zeros_like(net);
    if lambda == 0.0 {
        return (0.0, grads);
    }
    let loss = lambda * net.param_states().map(|s| s.weights.sum_squares()).sum::<f64>();
    let two_lambda = T::from_f64(2.0 * lambda);
    for (g, state) in grads.layers_mut().iter_mut().flatten().zip(net.param_states()) {
        for (gw, &w) in g.weights.data_mut().iter_mut().zip(state.weights.data()) {
            *gw = two_lambda * w;
        }
    }
    (loss, grads)
}
