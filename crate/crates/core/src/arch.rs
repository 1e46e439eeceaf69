//! Layer-graph description of a feed-forward network.

use crate::error::{Error, Result};

/// One layer of a sequential network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    /// 2-D convolution over a `C×H×W` input with square kernels and zero padding.
    Conv2D {
        c_in: usize,
        c_out: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Dense {
        in_features: usize,
        out_features: usize,
    },
    ReLU,
    /// Non-overlapping max pooling (stride equals window); trailing rows/columns are dropped.
    MaxPool {
        window: usize,
    },
    Flatten,
}

impl LayerSpec {
    /// Conv2D with stride 1 and no padding.
    pub fn conv(c_in: usize, c_out: usize, kernel: usize) -> Self {
        LayerSpec::Conv2D {
            c_in,
            c_out,
            kernel,
            stride: 1,
            padding: 0,
        }
    }

    pub fn dense(in_features: usize, out_features: usize) -> Self {
        LayerSpec::Dense {
            in_features,
            out_features,
        }
    }

    pub fn is_parametric(&self) -> bool {
        matches!(self, LayerSpec::Conv2D { .. } | LayerSpec::Dense { .. })
    }

    /// Weight tensor shape: `[c_out, c_in, k, k]` for conv, `[out, in]` for dense.
    pub fn weight_shape(&self) -> Option<Vec<usize>> {
        match *self {
            LayerSpec::Conv2D {
                c_in, c_out, kernel, ..
            } => Some(vec![c_out, c_in, kernel, kernel]),
            LayerSpec::Dense {
                in_features,
                out_features,
            } => Some(vec![out_features, in_features]),
            _ => None,
        }
    }

    /// Number of filters (output channels or output rows).
    pub fn filter_count(&self) -> usize {
        match *self {
            LayerSpec::Conv2D { c_out, .. } => c_out,
            LayerSpec::Dense { out_features, .. } => out_features,
            _ => 0,
        }
    }

    /// Number of weights in a single filter (`C_in·K·K`, or `in_features`).
    pub fn filter_size(&self) -> usize {
        match *self {
            LayerSpec::Conv2D { c_in, kernel, .. } => c_in * kernel * kernel,
            LayerSpec::Dense { in_features, .. } => in_features,
            _ => 0,
        }
    }

    /// Output shape for the given input shape, or an error when they do not compose.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match *self {
            LayerSpec::Conv2D {
                c_in,
                c_out,
                kernel,
                stride,
                padding,
            } => {
                if c_in == 0 || c_out == 0 || kernel == 0 || stride == 0 {
                    return Err(Error::Architecture(format!(
                        "conv dimensions must be positive: {self:?}"
                    )));
                }
                let [c, h, w] = *input else {
                    return Err(Error::Architecture(format!(
                        "conv expects a C×H×W input, got {input:?}"
                    )));
                };
                if c != c_in {
                    return Err(Error::Architecture(format!(
                        "conv expects {c_in} input channels, got {c}"
                    )));
                }
                let (hp, wp) = (h + 2 * padding, w + 2 * padding);
                if hp < kernel || wp < kernel {
                    return Err(Error::Architecture(format!(
                        "kernel {kernel} larger than padded input {hp}×{wp}"
                    )));
                }
                Ok(vec![c_out, (hp - kernel) / stride + 1, (wp - kernel) / stride + 1])
            }
            LayerSpec::Dense {
                in_features,
                out_features,
            } => {
                if in_features == 0 || out_features == 0 {
                    return Err(Error::Architecture(format!(
                        "dense dimensions must be positive: {self:?}"
                    )));
                }
                if input != [in_features] {
                    return Err(Error::Architecture(format!(
                        "dense expects a flat input of {in_features}, got {input:?}"
                    )));
                }
                Ok(vec![out_features])
            }
            LayerSpec::ReLU => Ok(input.to_vec()),
            LayerSpec::MaxPool { window } => {
                let [c, h, w] = *input else {
                    return Err(Error::Architecture(format!(
                        "maxpool expects a C×H×W input, got {input:?}"
                    )));
                };
                if window == 0 || h < window || w < window {
                    return Err(Error::Architecture(format!(
                        "maxpool window {window} does not fit {h}×{w}"
                    )));
                }
                Ok(vec![c, h / window, w / window])
            }
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
        }
    }
}

/// A validated sequential architecture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    layers: Vec<LayerSpec>,
    input_shape: Vec<usize>,
    classes: usize,
    shapes: Vec<Vec<usize>>,
}

impl Architecture {
    pub fn new(layers: Vec<LayerSpec>, input_shape: Vec<usize>, classes: usize) -> Result<Self> {
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(Error::Architecture(format!(
                "input shape {input_shape:?} must be positive"
            )));
        }
        if !layers.iter().any(LayerSpec::is_parametric) {
            return Err(Error::Architecture(
                "at least one conv or dense layer is required".into(),
            ));
        }
        let mut shapes = vec![input_shape.clone()];
        for (i, layer) in layers.iter().enumerate() {
            let next = layer
                .output_shape(shapes.last().unwrap())
                .map_err(|e| Error::Architecture(format!("layer {i}: {e}")))?;
            shapes.push(next);
        }
        let out = shapes.last().unwrap();
        if out.iter().product::<usize>() != classes || out.len() != 1 {
            return Err(Error::Architecture(format!(
                "final output shape {out:?} does not match {classes} classes"
            )));
        }
        Ok(Self {
            layers,
            input_shape,
            classes,
            shapes,
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Activation shape entering layer `i`; index `layers().len()` is the output.
    pub fn shape_at(&self, i: usize) -> &[usize] {
        &self.shapes[i]
    }

    /// Parametric layers in order, paired with their index in `layers()`.
    pub fn parametric(&self) -> impl Iterator<Item = (usize, &LayerSpec)> {
        self.layers.iter().enumerate().filter(|(_, l)| l.is_parametric())
    }

    pub fn parametric_count(&self) -> usize {
        self.parametric().count()
    }

    /// The parametric layer with parametric index `p`.
    pub fn parametric_layer(&self, p: usize) -> Option<&LayerSpec> {
        self.parametric().nth(p).map(|(_, l)| l)
    }

    pub fn weight_count(&self) -> usize {
        self.parametric().map(|(_, l)| l.filter_count() * l.filter_size()).sum()
    }

    /// Conv(1→8, K3) → ReLU → MaxPool(2) → Conv(8→16, K3) → ReLU → Flatten → Dense(16→classes)
    /// on a 1×8×8 input.
    pub fn desk_cnn(classes: usize) -> Result<Self> {
        Self::new(
            vec![
                LayerSpec::conv(1, 8, 3),
                LayerSpec::ReLU,
                LayerSpec::MaxPool { window: 2 },
                LayerSpec::conv(8, 16, 3),
                LayerSpec::ReLU,
                LayerSpec::Flatten,
                LayerSpec::dense(16, classes),
            ],
            vec![1, 8, 8],
            classes,
        )
    }
}
