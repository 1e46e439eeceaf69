//! Float-precision models, datasets and inference.

use rayon::prelude::*;

use crate::arch::{Architecture, LayerSpec};
use crate::error::{Error, Result};
use crate::layers;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Weights and bias of one conv or dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatModel<T> {
    arch: Architecture,
    params: Vec<LayerParams<T>>,
}

impl<T: Scalar> FloatModel<T> {
    /// `params` holds one entry per parametric layer, in layer order.
    pub fn new(arch: Architecture, params: Vec<LayerParams<T>>) -> Result<Self> {
        if params.len() != arch.parametric_count() {
            return Err(Error::Architecture(format!(
                "{} parameter sets for {} parametric layers",
                params.len(),
                arch.parametric_count()
            )));
        }
        for ((_, spec), p) in arch.parametric().zip(&params) {
            let ws = spec.weight_shape().unwrap();
            if p.weight.shape() != ws.as_slice() {
                return Err(Error::Shape {
                    expected: ws,
                    found: p.weight.shape().to_vec(),
                });
            }
            if p.bias.shape() != [spec.filter_count()] {
                return Err(Error::Shape {
                    expected: vec![spec.filter_count()],
                    found: p.bias.shape().to_vec(),
                });
            }
            let finite = |t: &Tensor<T>| t.data().iter().all(|v| v.is_finite());
            if !finite(&p.weight) || !finite(&p.bias) {
                return Err(Error::invalid("model parameters must be finite"));
            }
        }
        Ok(Self { arch, params })
    }

    /// All-zero weights and biases.
    pub fn zeros(arch: Architecture) -> Self {
        let params = arch
            .parametric()
            .map(|(_, l)| LayerParams {
                weight: Tensor::zeros(l.weight_shape().unwrap()),
                bias: Tensor::zeros(vec![l.filter_count()]),
            })
            .collect();
        Self { arch, params }
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[LayerParams<T>] {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut [LayerParams<T>] {
        &mut self.params
    }

    pub fn cast<U: Scalar>(&self) -> FloatModel<U> {
        FloatModel {
            arch: self.arch.clone(),
            params: self
                .params
                .iter()
                .map(|p| LayerParams {
                    weight: p.weight.cast(),
                    bias: p.bias.cast(),
                })
                .collect(),
        }
    }

    /// Runs inference on one sample and returns the logits.
    pub fn forward(&self, input: &Tensor<T>) -> Result<Vec<T>> {
        self.check_input(input)?;
        Ok(self.forward_trace(input.data()).pop().unwrap())
    }

    pub(crate) fn check_input(&self, input: &Tensor<T>) -> Result<()> {
        if input.shape() != self.arch.input_shape() {
            return Err(Error::Shape {
                expected: self.arch.input_shape().to_vec(),
                found: input.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Activations entering every layer, plus the final output as the last element.
    pub(crate) fn forward_trace(&self, input: &[T]) -> Vec<Vec<T>> {
        let mut acts = Vec::with_capacity(self.arch.layers().len() + 1);
        acts.push(input.to_vec());
        let mut p = 0;
        for (i, layer) in self.arch.layers().iter().enumerate() {
            let x = acts.last().unwrap();
            let in_shape = self.arch.shape_at(i);
            let y = match *layer {
                LayerSpec::Conv2D {
                    kernel,
                    stride,
                    padding,
                    ..
                } => {
                    let lp = &self.params[p];
                    p += 1;
                    layers::conv_forward(
                        in_shape,
                        self.arch.shape_at(i + 1),
                        kernel,
                        stride,
                        padding,
                        x,
                        lp.weight.data(),
                        lp.bias.data(),
                    )
                }
                LayerSpec::Dense {
                    in_features,
                    out_features,
                } => {
                    let lp = &self.params[p];
                    p += 1;
                    layers::dense_forward(in_features, out_features, x, lp.weight.data(), lp.bias.data())
                }
                LayerSpec::ReLU => layers::relu_forward(x),
                LayerSpec::MaxPool { window } => layers::maxpool_forward(in_shape, window, x),
                LayerSpec::Flatten => x.clone(),
            };
            acts.push(y);
        }
        acts
    }

    /// Predicted class of one sample.
    pub fn predict(&self, input: &Tensor<T>) -> Result<usize> {
        Ok(argmax(&self.forward(input)?))
    }

    /// Fraction of samples whose predicted class equals the label.
    pub fn accuracy(&self, data: &Dataset<T>) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.input_shape() != self.arch.input_shape() {
            return Err(Error::Shape {
                expected: self.arch.input_shape().to_vec(),
                found: data.input_shape().to_vec(),
            });
        }
        let correct: usize = data
            .inputs()
            .par_iter()
            .zip(data.labels().par_iter())
            .filter(|(x, &y)| argmax(self.forward_trace(x.data()).last().unwrap()) == y)
            .count();
        Ok(correct as f64 / data.len() as f64)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<T: PartialOrd>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Labelled samples sharing one input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    inputs: Vec<Tensor<T>>,
    labels: Vec<usize>,
    classes: usize,
    input_shape: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: Vec<Tensor<T>>, labels: Vec<usize>, classes: usize, input_shape: Vec<usize>) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        if let Some(x) = inputs.iter().find(|x| x.shape() != input_shape.as_slice()) {
            return Err(Error::Shape {
                expected: input_shape,
                found: x.shape().to_vec(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::invalid(format!("label {l} out of range for {classes} classes")));
        }
        Ok(Self {
            inputs,
            labels,
            classes,
            input_shape,
        })
    }

    /// The first `n` samples (or all, if fewer).
    pub fn take(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            inputs: self.inputs[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
            classes: self.classes,
            input_shape: self.input_shape.clone(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            inputs: self.inputs.iter().map(Tensor::cast).collect(),
            labels: self.labels.clone(),
            classes: self.classes,
            input_shape: self.input_shape.clone(),
        }
    }
}

impl<T> Dataset<T> {
    pub fn inputs(&self) -> &[Tensor<T>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
