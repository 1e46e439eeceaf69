//! Float model files: header, then per parametric layer the weight tensor and
//! the bias vector, each as `ndim: u32`, `dims: [u32; ndim]`, `values: [f32]`.

use std::fs;
use std::path::Path;

use super::header::{read_architecture, read_magic, write_header};
use super::reader::Reader;
use super::MODEL_MAGIC;
use crate::error::{Error, Result};
use crate::model::{FloatModel, LayerParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Serializes a model. Values are stored as `f32`.
pub fn write_model<T: Scalar>(model: &FloatModel<T>) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(&mut out, MODEL_MAGIC, model.architecture());
    for p in model.params() {
        write_tensor(&mut out, &p.weight);
        write_tensor(&mut out, &p.bias);
    }
    out
}

pub(crate) fn write_tensor<T: Scalar>(out: &mut Vec<u8>, t: &Tensor<T>) {
    out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
    for &d in t.shape() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&v.as_f32().to_le_bytes());
    }
}

fn read_tensor<T: Scalar>(r: &mut Reader<'_>, expected: &[usize]) -> Result<Tensor<T>> {
    let at = r.offset();
    let ndim = r.u32()? as usize;
    if ndim > 8 {
        return Err(Error::parse(
            format!("byte {at}"),
            format!("implausible tensor rank {ndim}"),
        ));
    }
    let shape = (0..ndim)
        .map(|_| r.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    if shape != expected {
        return Err(Error::parse(
            format!("byte {at}"),
            format!("tensor shape {shape:?} does not match architecture {expected:?}"),
        ));
    }
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| r.f32().map(|v| T::of(v as f64)))
        .collect::<Result<Vec<_>>>()?;
    Tensor::new(shape, data).map_err(|e| Error::parse(format!("byte {at}"), e.to_string()))
}

pub fn read_model<T: Scalar>(bytes: &[u8]) -> Result<FloatModel<T>> {
    let mut r = Reader::new(bytes);
    read_magic(&mut r, MODEL_MAGIC)?;
    let arch = read_architecture(&mut r)?;
    let mut params = Vec::new();
    for (_, spec) in arch.parametric() {
        let weight = read_tensor(&mut r, &spec.weight_shape().unwrap())?;
        let bias = read_tensor(&mut r, &[spec.filter_count()])?;
        params.push(LayerParams { weight, bias });
    }
    r.finish()?;
    FloatModel::new(arch, params)
}

pub fn save_model<T: Scalar>(model: &FloatModel<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_model(model))?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<FloatModel<T>> {
    read_model(&fs::read(path)?)
}
