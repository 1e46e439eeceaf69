//! Magnitude-based vulnerable bit selection.
//!
//! Repeatedly picks the filter with the largest normalized L2 norm, takes its
//! largest-magnitude weight not already selected, records that weight's sign
//! bit, flips it in a working copy and rescores only that filter.

use super::importance::{filter_importance, FilterRef};
use super::record::FlipRecord;
use crate::error::{Error, Result};
use crate::quant::{Code, QuantModel};
use crate::scalar::Scalar;

struct FilterState<T> {
    filter: FilterRef,
    /// Range of this filter in its layer's code vector.
    start: usize,
    size: usize,
    score: T,
    chosen: Vec<bool>,
    remaining: usize,
}

/// Top `n_bf` sign bits by normalized filter L2 norm. Ties go to the lowest
/// `(layer, filter)` and then the lowest weight index.
pub fn select_vulnerable_bits<T: Scalar>(model: &QuantModel<T>, n_bf: usize) -> Result<Vec<FlipRecord>> {
    let total = model.weight_count();
    if n_bf == 0 || n_bf > total {
        return Err(Error::invalid(format!(
            "number of bit flips {n_bf} must be in 1..={total}"
        )));
    }
    let mut codes: Vec<Vec<i8>> = model.layers().iter().map(|l| l.codes.clone()).collect();
    let dequant = |layer: usize, c: i8| T::of(c as f64) * model.layers()[layer].params.scale;

    let mut filters = Vec::new();
    for (layer, (_, spec)) in model.architecture().parametric().enumerate() {
        let size = spec.filter_size();
        for filter in 0..spec.filter_count() {
            let start = filter * size;
            let w: Vec<T> = codes[layer][start..start + size]
                .iter()
                .map(|&c| dequant(layer, c))
                .collect();
            filters.push(FilterState {
                filter: FilterRef { layer, filter },
                start,
                size,
                score: filter_importance(&w),
                chosen: vec![false; size],
                remaining: size,
            });
        }
    }

    let mut selected = Vec::with_capacity(n_bf);
    while selected.len() < n_bf {
        let mut best: Option<usize> = None;
        for (i, f) in filters.iter().enumerate() {
            if f.remaining > 0 && best.is_none_or(|b| f.score > filters[b].score) {
                best = Some(i);
            }
        }
        let f = &mut filters[best.expect("unselected weights remain")];
        let layer = f.filter.layer;
        let slice = &mut codes[layer][f.start..f.start + f.size];

        let mut pick: Option<usize> = None;
        for (k, &c) in slice.iter().enumerate() {
            if f.chosen[k] {
                continue;
            }
            let mag = (c as i16).abs();
            if pick.is_none_or(|p| mag > (slice[p] as i16).abs()) {
                pick = Some(k);
            }
        }
        let k = pick.expect("filter has unselected weights");
        f.chosen[k] = true;
        f.remaining -= 1;

        let width = model.layers()[layer].params.width;
        selected.push(FlipRecord {
            filter: f.filter,
            weight: k,
            bit: width.sign_bit(),
        });
        slice[k] = Code::new(slice[k], width).expect("code in range").flip_sign().value();
        let w: Vec<T> = slice.iter().map(|&c| dequant(layer, c)).collect();
        f.score = filter_importance(&w);
    }
    Ok(selected)
}
