//! Quantized models: integer weight codes with per-layer scales.

use super::code::{BitWidth, Code};
use super::scheme::{compute_scale, dequantize, quantize, QuantParams};
use crate::arch::Architecture;
use crate::error::{Error, Result};
use crate::model::{Dataset, FloatModel, LayerParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// One quantized conv or dense layer. Codes share the float weight layout.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantLayer<T> {
    pub params: QuantParams<T>,
    pub codes: Vec<i8>,
    /// Biases stay in floating point and are never quantized.
    pub bias: Tensor<T>,
}

impl<T: Scalar> QuantLayer<T> {
    pub fn code(&self, index: usize) -> Code {
        Code::new(self.codes[index], self.params.width).expect("stored codes are in range")
    }

    pub fn dequantized(&self, index: usize) -> T {
        dequantize(self.code(index), self.params.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantModel<T> {
    arch: Architecture,
    layers: Vec<QuantLayer<T>>,
}

impl<T: Scalar> QuantModel<T> {
    pub fn new(arch: Architecture, layers: Vec<QuantLayer<T>>) -> Result<Self> {
        if layers.len() != arch.parametric_count() {
            return Err(Error::Architecture(format!(
                "{} quantized layers for {} parametric layers",
                layers.len(),
                arch.parametric_count()
            )));
        }
        for ((_, spec), l) in arch.parametric().zip(&layers) {
            let n = spec.filter_count() * spec.filter_size();
            if l.codes.len() != n {
                return Err(Error::Shape {
                    expected: spec.weight_shape().unwrap(),
                    found: vec![l.codes.len()],
                });
            }
            if l.bias.shape() != [spec.filter_count()] {
                return Err(Error::Shape {
                    expected: vec![spec.filter_count()],
                    found: l.bias.shape().to_vec(),
                });
            }
            let w = l.params.width;
            if let Some(c) = l.codes.iter().find(|&&c| c < w.min_value() || c > w.max_value()) {
                return Err(Error::invalid(format!("code {c} out of range for {w}-bit layer")));
            }
            if !(l.params.scale > T::zero() && l.params.scale.is_finite()) {
                return Err(Error::invalid("quantization scale must be positive and finite"));
            }
        }
        Ok(Self { arch, layers })
    }

    /// Quantizes every weight with its layer's symmetric scale; biases pass through.
    pub fn quantize(model: &FloatModel<T>, width: BitWidth) -> Result<Self> {
        let layers = model
            .params()
            .iter()
            .map(|p| {
                let scale = compute_scale(p.weight.data(), width)?;
                let codes = p
                    .weight
                    .data()
                    .iter()
                    .map(|&w| quantize(w, scale, width).value())
                    .collect();
                Ok(QuantLayer {
                    params: QuantParams { width, scale },
                    codes,
                    bias: p.bias.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            arch: model.architecture().clone(),
            layers,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[QuantLayer<T>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [QuantLayer<T>] {
        &mut self.layers
    }

    /// Float model whose weights are `code · scale`.
    pub fn dequantize(&self) -> FloatModel<T> {
        let params = self
            .arch
            .parametric()
            .zip(&self.layers)
            .map(|((_, spec), l)| LayerParams {
                weight: Tensor::from_parts_unchecked(
                    spec.weight_shape().unwrap(),
                    l.codes.iter().map(|&c| T::of(c as f64) * l.params.scale).collect(),
                ),
                bias: l.bias.clone(),
            })
            .collect();
        FloatModel::new(self.arch.clone(), params).expect("dequantized model matches its architecture")
    }

    /// Fake-quantized inference: dequantize, then run the float forward pass.
    pub fn forward(&self, input: &Tensor<T>) -> Result<Vec<T>> {
        self.dequantize().forward(input)
    }

    pub fn accuracy(&self, data: &Dataset<T>) -> Result<f64> {
        self.dequantize().accuracy(data)
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.codes.len()).sum()
    }

    /// Σ over layers of (#weights × N_q).
    pub fn total_weight_bits(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.codes.len() * l.params.width.bits() as usize)
            .sum()
    }
}
