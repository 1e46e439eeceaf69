//! Filter-wise L2 norms and size-normalized importance scores.

use crate::quant::QuantModel;
use crate::scalar::Scalar;

/// A filter: output channel of a conv layer or output row of a dense layer.
///
/// `layer` counts parametric layers only (0 is the first conv/dense layer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FilterRef {
    pub layer: usize,
    pub filter: usize,
}

pub fn filter_l2<T: Scalar>(weights: &[T]) -> T {
    weights.iter().map(|&w| w * w).sum::<T>().sqrt()
}

/// L2 norm divided by the number of weights in the filter (`C_in·K·K`).
pub fn filter_importance<T: Scalar>(weights: &[T]) -> T {
    filter_l2(weights) / T::of_usize(weights.len())
}

/// Dequantized weights of one filter.
pub fn filter_weights<T: Scalar>(model: &QuantModel<T>, f: FilterRef) -> Vec<T> {
    let layer = &model.layers()[f.layer];
    let size = filter_size(model, f.layer);
    (f.filter * size..(f.filter + 1) * size)
        .map(|i| layer.dequantized(i))
        .collect()
}

pub(crate) fn filter_size<T: Scalar>(model: &QuantModel<T>, layer: usize) -> usize {
    model
        .architecture()
        .parametric_layer(layer)
        .expect("layer index valid")
        .filter_size()
}

/// Importance of every filter, layer-major.
pub fn all_importances<T: Scalar>(model: &QuantModel<T>) -> Vec<(FilterRef, T)> {
    let mut out = Vec::new();
    for (layer, (_, spec)) in model.architecture().parametric().enumerate() {
        for filter in 0..spec.filter_count() {
            let f = FilterRef { layer, filter };
            out.push((f, filter_importance(&filter_weights(model, f))));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_examples() {
        assert_eq!(filter_l2(&[3.0f64, 4.0]), 5.0);
        assert_eq!(filter_l2(&[0.0f32; 9]), 0.0);
        let n = filter_l2(&[2.0f64; 8]);
        assert!((n - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn importance_examples() {
        assert_eq!(filter_importance(&[2.0f64; 4]), 1.0);
        assert_eq!(filter_importance(&[3.0f64, 4.0]), 2.5);
        let base = [0.3f64, -1.2, 0.7];
        let scaled: Vec<f64> = base.iter().map(|w| w * 4.0).collect();
        assert_eq!(filter_importance(&scaled), 4.0 * filter_importance(&base));
    }
}
