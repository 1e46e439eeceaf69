//! Minibatch SGD on mean cross-entropy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::arch::Architecture;
use crate::backprop::{gradient_of, mean_loss};
use crate::error::{Error, Result};
use crate::model::{Dataset, FloatModel, LayerParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("epochs, batch size and learning rate must be positive"));
        }
        Ok(())
    }
}

/// He-normal weights, zero biases.
pub fn init_model<T: Scalar>(arch: &Architecture, seed: u64) -> FloatModel<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = arch
        .parametric()
        .map(|(_, spec)| {
            let shape = spec.weight_shape().unwrap();
            let std = (2.0 / spec.filter_size() as f64).sqrt();
            let dist = Normal::new(0.0, std).expect("positive std");
            let n = shape.iter().product();
            let data = (0..n).map(|_| T::of(dist.sample(&mut rng))).collect();
            LayerParams {
                weight: Tensor::from_parts_unchecked(shape, data),
                bias: Tensor::zeros(vec![spec.filter_count()]),
            }
        })
        .collect();
    FloatModel::new(arch.clone(), params).expect("initialized parameters match the architecture")
}

pub fn train<T: Scalar>(arch: &Architecture, data: &Dataset<T>, cfg: &TrainConfig) -> Result<FloatModel<T>> {
    train_with_history(arch, data, cfg).map(|(m, _)| m)
}

/// Trains and also returns the full-dataset mean loss after every epoch.
pub fn train_with_history<T: Scalar>(
    arch: &Architecture,
    data: &Dataset<T>,
    cfg: &TrainConfig,
) -> Result<(FloatModel<T>, Vec<T>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.input_shape() != arch.input_shape() || data.classes() != arch.classes() {
        return Err(Error::Shape {
            expected: arch.input_shape().to_vec(),
            found: data.input_shape().to_vec(),
        });
    }
    let mut model = init_model(arch, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let lr = T::of(cfg.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&Tensor<T>, usize)> =
                chunk.iter().map(|&i| (&data.inputs()[i], data.labels()[i])).collect();
            let (loss, grads) = gradient_of(&model, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            for (p, g) in model.params_mut().iter_mut().zip(&grads) {
                for (w, &d) in p.weight.data_mut().iter_mut().zip(g.weight.data()) {
                    *w -= lr * d;
                }
                for (b, &d) in p.bias.data_mut().iter_mut().zip(g.bias.data()) {
                    *b -= lr * d;
                }
            }
        }
        let loss = mean_loss(&model, data)?;
        let finite = model
            .params()
            .iter()
            .all(|p| p.weight.data().iter().chain(p.bias.data()).all(|v| v.is_finite()));
        if !loss.is_finite() || !finite {
            return Err(Error::Diverged { epoch });
        }
        history.push(loss);
    }
    Ok((model, history))
}
