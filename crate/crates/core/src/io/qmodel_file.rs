//! Quantized and partially recovered model files.
//!
//! Per parametric layer: `N_q: u8`, `scale: f64`, one signed byte per weight
//! code (sign-extended from `N_q` bits), then the biases as `f32`. Partial
//! files append, per layer, one mask byte per weight with the recovered-bit
//! mask in its low `N_q` bits; their codes hold zeros at unrecovered bits.

use std::fs;
use std::path::Path;

use super::header::{read_architecture, read_magic, write_header};
use super::reader::Reader;
use super::{PARTIAL_MAGIC, QMODEL_MAGIC};
use crate::arch::Architecture;
use crate::error::{Error, Result};
use crate::quant::{BitWidth, Code, QuantLayer, QuantModel, QuantParams};
use crate::recovery::{PartialLayer, PartialModel};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

struct LayerBody<T> {
    params: QuantParams<T>,
    codes: Vec<i8>,
    bias: Tensor<T>,
}

fn write_layer<T: Scalar>(
    out: &mut Vec<u8>,
    params: &QuantParams<T>,
    codes: impl Iterator<Item = i8>,
    bias: &Tensor<T>,
) {
    out.push(params.width.bits());
    out.extend_from_slice(&params.scale.as_f64().to_le_bytes());
    out.extend(codes.map(|c| c as u8));
    for &b in bias.data() {
        out.extend_from_slice(&b.as_f32().to_le_bytes());
    }
}

fn read_layers<T: Scalar>(r: &mut Reader<'_>, arch: &Architecture) -> Result<Vec<LayerBody<T>>> {
    arch.parametric()
        .map(|(_, spec)| {
            let at = r.offset();
            let width = BitWidth::new(r.u8()?).map_err(|e| Error::parse(format!("byte {at}"), e.to_string()))?;
            let at = r.offset();
            let scale = r.f64()?;
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::parse(
                    format!("byte {at}"),
                    format!("scale {scale} is not positive"),
                ));
            }
            let n = spec.filter_count() * spec.filter_size();
            let at = r.offset();
            let codes: Vec<i8> = r.bytes(n)?.iter().map(|&b| b as i8).collect();
            if let Some(i) = codes
                .iter()
                .position(|&c| c < width.min_value() || c > width.max_value())
            {
                return Err(Error::parse(
                    format!("byte {}", at + i),
                    format!("code {} out of range for {width}-bit", codes[i]),
                ));
            }
            let bias = (0..spec.filter_count())
                .map(|_| r.f32().map(|v| T::of(v as f64)))
                .collect::<Result<Vec<_>>>()?;
            Ok(LayerBody {
                params: QuantParams {
                    width,
                    scale: T::of(scale),
                },
                codes,
                bias: Tensor::new(vec![spec.filter_count()], bias).map_err(|e| r.error(e.to_string()))?,
            })
        })
        .collect()
}

pub fn write_qmodel<T: Scalar>(model: &QuantModel<T>) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(&mut out, QMODEL_MAGIC, model.architecture());
    for l in model.layers() {
        write_layer(&mut out, &l.params, l.codes.iter().copied(), &l.bias);
    }
    out
}

pub fn read_qmodel<T: Scalar>(bytes: &[u8]) -> Result<QuantModel<T>> {
    let mut r = Reader::new(bytes);
    read_magic(&mut r, QMODEL_MAGIC)?;
    let arch = read_architecture(&mut r)?;
    let layers = read_layers(&mut r, &arch)?
        .into_iter()
        .map(|b| QuantLayer {
            params: b.params,
            codes: b.codes,
            bias: b.bias,
        })
        .collect();
    r.finish()?;
    QuantModel::new(arch, layers)
}

pub fn write_partial<T: Scalar>(model: &PartialModel<T>) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(&mut out, PARTIAL_MAGIC, model.architecture());
    for l in model.layers() {
        let w = l.params.width;
        write_layer(
            &mut out,
            &l.params,
            l.bits.iter().map(|&b| Code::from_bits(b, w).value()),
            &l.bias,
        );
    }
    for l in model.layers() {
        out.extend_from_slice(&l.masks);
    }
    out
}

pub fn read_partial<T: Scalar>(bytes: &[u8]) -> Result<PartialModel<T>> {
    let mut r = Reader::new(bytes);
    read_magic(&mut r, PARTIAL_MAGIC)?;
    let arch = read_architecture(&mut r)?;
    let bodies = read_layers::<T>(&mut r, &arch)?;
    let mut layers = Vec::with_capacity(bodies.len());
    for b in bodies {
        let w = b.params.width;
        let at = r.offset();
        let masks = r.bytes(b.codes.len())?.to_vec();
        let bits: Vec<u8> = b.codes.iter().map(|&c| (c as u8) & w.mask()).collect();
        for (i, (&bit, &m)) in bits.iter().zip(&masks).enumerate() {
            if m & !w.mask() != 0 || bit & !m != 0 {
                return Err(Error::parse(
                    format!("byte {}", at + i),
                    "mask has bits above N_q or a code sets an unrecovered bit",
                ));
            }
        }
        layers.push(PartialLayer {
            params: b.params,
            bits,
            masks,
            bias: b.bias,
        });
    }
    r.finish()?;
    PartialModel::new(arch, layers)
}

pub fn save_qmodel<T: Scalar>(model: &QuantModel<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_qmodel(model))?;
    Ok(())
}

pub fn load_qmodel<T: Scalar>(path: impl AsRef<Path>) -> Result<QuantModel<T>> {
    read_qmodel(&fs::read(path)?)
}

pub fn save_partial<T: Scalar>(model: &PartialModel<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_partial(model))?;
    Ok(())
}

pub fn load_partial<T: Scalar>(path: impl AsRef<Path>) -> Result<PartialModel<T>> {
    read_partial(&fs::read(path)?)
}
