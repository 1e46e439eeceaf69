//! Mean cross-entropy loss and its gradient with respect to every parameter.

use crate::arch::LayerSpec;
use crate::error::{Error, Result};
use crate::layers;
use crate::model::{Dataset, FloatModel, LayerParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Softmax cross-entropy of one logit vector. Returns `(loss, ∂loss/∂logits)`.
pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], label: usize) -> (T, Vec<T>) {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    let loss = sum.ln() + max - logits[label];
    let mut grad: Vec<T> = exps.into_iter().map(|e| e / sum).collect();
    grad[label] -= T::one();
    (loss, grad)
}

/// Mean cross-entropy over a batch.
pub fn mean_loss<T: Scalar>(model: &FloatModel<T>, batch: &Dataset<T>) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = T::zero();
    for (x, &y) in batch.inputs().iter().zip(batch.labels()) {
        let logits = model.forward(x)?;
        total += softmax_cross_entropy(&logits, y).0;
    }
    Ok(total / T::of_usize(batch.len()))
}

/// Gradient of the mean cross-entropy over `batch`, one entry per parametric
/// layer in the same layout as the model's parameters. Also returns the loss.
pub fn gradient<T: Scalar>(model: &FloatModel<T>, batch: &Dataset<T>) -> Result<(T, Vec<LayerParams<T>>)> {
    let samples: Vec<(&Tensor<T>, usize)> = batch.inputs().iter().zip(batch.labels().iter().copied()).collect();
    gradient_of(model, &samples)
}

pub(crate) fn gradient_of<T: Scalar>(
    model: &FloatModel<T>,
    samples: &[(&Tensor<T>, usize)],
) -> Result<(T, Vec<LayerParams<T>>)> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let arch = model.architecture();
    let mut grads: Vec<LayerParams<T>> = model
        .params()
        .iter()
        .map(|p| LayerParams {
            weight: Tensor::zeros(p.weight.shape().to_vec()),
            bias: Tensor::zeros(p.bias.shape().to_vec()),
        })
        .collect();
    let scale = T::one() / T::of_usize(samples.len());
    let mut total = T::zero();

    for &(x, y) in samples {
        model.check_input(x)?;
        let acts = model.forward_trace(x.data());
        let (loss, mut dy) = softmax_cross_entropy(acts.last().unwrap(), y);
        total += loss;
        let mut p = model.params().len();
        for (i, layer) in arch.layers().iter().enumerate().rev() {
            let xin = &acts[i];
            let in_shape = arch.shape_at(i);
            dy = match *layer {
                LayerSpec::Conv2D {
                    kernel,
                    stride,
                    padding,
                    ..
                } => {
                    p -= 1;
                    let (dx, dw, db) = layers::conv_backward(
                        in_shape,
                        arch.shape_at(i + 1),
                        kernel,
                        stride,
                        padding,
                        xin,
                        model.params()[p].weight.data(),
                        &dy,
                    );
                    accumulate(&mut grads[p], &dw, &db, scale);
                    dx
                }
                LayerSpec::Dense {
                    in_features,
                    out_features,
                } => {
                    p -= 1;
                    let (dx, dw, db) =
                        layers::dense_backward(in_features, out_features, xin, model.params()[p].weight.data(), &dy);
                    accumulate(&mut grads[p], &dw, &db, scale);
                    dx
                }
                LayerSpec::ReLU => layers::relu_backward(xin, &dy),
                LayerSpec::MaxPool { window } => layers::maxpool_backward(in_shape, window, xin, &dy),
                LayerSpec::Flatten => dy,
            };
        }
    }
    Ok((total * scale, grads))
}

fn accumulate<T: Scalar>(g: &mut LayerParams<T>, dw: &[T], db: &[T], scale: T) {
    for (a, &b) in g.weight.data_mut().iter_mut().zip(dw) {
        *a += b * scale;
    }
    for (a, &b) in g.bias.data_mut().iter_mut().zip(db) {
        *a += b * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_of_uniform_logits() {
        let (loss, g) = softmax_cross_entropy(&[0.0f64; 4], 2);
        assert!((loss - 4f64.ln()).abs() < 1e-12);
        assert!((g[2] + 0.75).abs() < 1e-12);
        assert!((g[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_is_stable_for_large_logits() {
        let (loss, _) = softmax_cross_entropy(&[1000.0f32, 0.0], 0);
        assert!(loss.is_finite() && loss.abs() < 1e-6);
    }
}
