//! Reference rankings: uniformly random bits and a single-shot gradient ranking.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::importance::FilterRef;
use super::record::FlipRecord;
use crate::backprop;
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::quant::QuantModel;
use crate::scalar::Scalar;

/// `(layer, flat weight index)` → record.
fn record_at<T: Scalar>(model: &QuantModel<T>, layer: usize, index: usize, bit: u8) -> FlipRecord {
    let size = model.architecture().parametric_layer(layer).unwrap().filter_size();
    FlipRecord {
        filter: FilterRef {
            layer,
            filter: index / size,
        },
        weight: index % size,
        bit,
    }
}

/// `n_bf` distinct (weight, bit) pairs drawn uniformly without replacement
/// from every weight bit of every layer.
pub fn select_random_bits<T: Scalar>(model: &QuantModel<T>, n_bf: usize, seed: u64) -> Result<Vec<FlipRecord>> {
    let total = model.total_weight_bits();
    if n_bf == 0 || n_bf > total {
        return Err(Error::invalid(format!(
            "number of bit flips {n_bf} must be in 1..={total}"
        )));
    }
    // Bits are enumerated layer by layer, weight-major.
    let mut offsets = Vec::with_capacity(model.layers().len());
    let mut acc = 0;
    for l in model.layers() {
        offsets.push(acc);
        acc += l.codes.len() * l.params.width.bits() as usize;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, total, n_bf)
        .into_iter()
        .map(|g| {
            let layer = offsets.partition_point(|&o| o <= g) - 1;
            let nb = model.layers()[layer].params.width.bits() as usize;
            let local = g - offsets[layer];
            record_at(model, layer, local / nb, (local % nb) as u8)
        })
        .collect())
}

/// Ranks weights by `|∂loss/∂w|` on the dequantized model and keeps those
/// whose sign-bit flip moves the weight in the loss-ascent direction.
pub fn select_gradient_bits<T: Scalar>(
    model: &QuantModel<T>,
    batch: &Dataset<T>,
    n_bf: usize,
) -> Result<Vec<FlipRecord>> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_bf == 0 || n_bf > model.weight_count() {
        return Err(Error::invalid(format!(
            "number of bit flips {n_bf} must be in 1..={}",
            model.weight_count()
        )));
    }
    let (_, grads) = backprop::gradient(&model.dequantize(), batch)?;
    let mut ranked: Vec<(usize, usize, T)> = grads
        .iter()
        .enumerate()
        .flat_map(|(l, g)| g.weight.data().iter().enumerate().map(move |(i, &v)| (l, i, v)))
        .collect();
    // Stable sort keeps (layer, index) order among equal magnitudes.
    ranked.sort_by(|a, b| b.2.abs().partial_cmp(&a.2.abs()).expect("finite gradients"));

    let mut out = Vec::with_capacity(n_bf);
    for (layer, i, g) in ranked {
        let ql = &model.layers()[layer];
        let code = ql.code(i);
        // Sign flip moves the value by −2^(N_q−1) for non-negative codes, +2^(N_q−1) otherwise.
        let delta = if code.is_negative() { T::one() } else { -T::one() };
        if delta * g > T::zero() {
            out.push(record_at(model, layer, i, ql.params.width.sign_bit()));
            if out.len() == n_bf {
                return Ok(out);
            }
        }
    }
    Err(Error::invalid(format!(
        "only {} weights have a loss-increasing sign flip, {n_bf} requested",
        out.len()
    )))
}
