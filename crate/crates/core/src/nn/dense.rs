use super::layer::LayerSpec;
use super::state::LayerState;
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

#[derive(Debug, Clone)]
pub struct DenseCache<T> {
    input: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct DenseGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

/// `W·x + b` for a rank-1 input.
pub fn dense_forward<T: Scalar>(
    input: &Tensor<T>,
    state: &LayerState<T>,
    spec: &LayerSpec,
) -> Result<(Tensor<T>, DenseCache<T>)> {
    let LayerSpec::Dense { out_units } = *spec else {
        return Err(Error::InvalidLayer(format!("expected a dense spec, got {spec:?}")));
    };
    if input.rank() != 1 {
        return Err(Error::InvalidShape(format!(
            "dense layer expects a rank-1 input, got {:?}",
            input.shape()
        )));
    }
    let n = input.len();
    state.weights.ensure_shape(&[out_units, n])?;
    state.biases.ensure_shape(&[out_units])?;

    let mut out = state.biases.data().to_vec();
    T::gemm(
        out_units,
        n,
        1,
        T::one(),
        state.weights.data(),
        (n as isize, 1),
        input.data(),
        (1, 1),
        T::one(),
        &mut out,
        (1, 1),
    );
    Ok((
        Tensor::new(vec![out_units], out)?,
        DenseCache {
            input: input.data().to_vec(),
        },
    ))
}

pub fn dense_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    cache: &DenseCache<T>,
    state: &LayerState<T>,
) -> Result<DenseGrads<T>> {
    let m = state.biases.len();
    let n = cache.input.len();
    grad_out.ensure_shape(&[m])?;
    state.weights.ensure_shape(&[m, n])?;
    let g = grad_out.data();

    let mut weights = Vec::with_capacity(m * n);
    for &gi in g {
        weights.extend(cache.input.iter().map(|&x| gi * x));
    }

    let mut input = vec![T::zero(); n];
    T::gemm(
        n,
        m,
        1,
        T::one(),
        state.weights.data(),
        (1, n as isize),
        g,
        (1, 1),
        T::zero(),
        &mut input,
        (1, 1),
    );

    Ok(DenseGrads {
        input: Tensor::new(vec![n], input)?,
        weights: Tensor::new(vec![m, n], weights)?,
        biases: grad_out.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(w: Vec<f64>, m: usize, n: usize, b: Vec<f64>) -> LayerState<f64> {
        LayerState::new(Tensor::new(vec![m, n], w).unwrap(), Tensor::new(vec![m], b).unwrap())
    }

    #[test]
    fn two_by_two_product() {
        let st = layer(vec![1.0, 2.0, 3.0, 4.0], 2, 2, vec![0.5, -0.5]);
        let (out, _) = dense_forward(&Tensor::from_vec(vec![1.0, 1.0]), &st, &LayerSpec::dense(2)).unwrap();
        assert_eq!(out.data(), &[3.5, 6.5]);
    }

    #[test]
    fn identity_weights_pass_through() {
        let n = 6;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        let st = layer(w, n, n, vec![0.0; n]);
        let x = Tensor::from_vec(vec![0.5, -1.0, 2.0, 3.5, 0.0, -7.25]);
        let (out, _) = dense_forward(&x, &st, &LayerSpec::dense(n)).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn figure_width() {
        let st = LayerState::<f32>::new(Tensor::zeros(&[512, 4608]), Tensor::zeros(&[512]));
        let (out, _) = dense_forward(&Tensor::zeros(&[4608]), &st, &LayerSpec::dense(512)).unwrap();
        assert_eq!(out.shape(), &[512]);
    }

    #[test]
    fn backward_by_hand() {
        let st = layer(vec![1.0, 2.0, 3.0, 4.0], 2, 2, vec![0.0, 0.0]);
        let (_, cache) = dense_forward(&Tensor::from_vec(vec![2.0, -1.0]), &st, &LayerSpec::dense(2)).unwrap();
        let g = dense_backward(&Tensor::from_vec(vec![1.0, 0.5]), &cache, &st).unwrap();
        assert_eq!(g.weights.data(), &[2.0, -1.0, 1.0, -0.5]);
        assert_eq!(g.biases.data(), &[1.0, 0.5]);
        assert_eq!(g.input.data(), &[2.5, 4.0]);
    }

    #[test]
    fn rejects_wrong_input_width() {
        let st = layer(vec![0.0; 6], 2, 3, vec![0.0; 2]);
        let err = dense_forward(&Tensor::from_vec(vec![1.0, 1.0]), &st, &LayerSpec::dense(2)).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }
}
