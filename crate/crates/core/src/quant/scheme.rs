//! Layer-wise symmetric uniform quantization.

use super::code::{BitWidth, Code};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bit width and scale of one quantized layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams<T> {
    pub width: BitWidth,
    pub scale: T,
}

/// `max|w| / (2^(N_q−1) − 1)`, or 1 for an all-zero layer.
pub fn compute_scale<T: Scalar>(weights: &[T], width: BitWidth) -> Result<T> {
    if weights.is_empty() {
        return Err(Error::invalid("cannot compute a scale for an empty weight set"));
    }
    let mut max = T::zero();
    for &w in weights {
        if !w.is_finite() {
            return Err(Error::invalid("weights contain a non-finite value"));
        }
        max = max.max(w.abs());
    }
    if max == T::zero() {
        return Ok(T::one());
    }
    Ok(max / T::of(width.max_value() as f64))
}

/// Rounds `w / scale` half away from zero and clamps to the code range.
pub fn quantize<T: Scalar>(w: T, scale: T, width: BitWidth) -> Code {
    let q = (w / scale).round();
    let lo = T::of(width.min_value() as f64);
    let hi = T::of(width.max_value() as f64);
    let v = q.max(lo).min(hi);
    Code::new(v.as_f64() as i8, width).expect("clamped value is in range")
}

pub fn dequantize<T: Scalar>(code: Code, scale: T) -> T {
    T::of(code.value() as f64) * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(b: u8) -> BitWidth {
        BitWidth::new(b).unwrap()
    }

    #[test]
    fn scale_examples() {
        let s = compute_scale(&[-1.27f64, 0.5], w(8)).unwrap();
        assert!((s - 0.01).abs() < 1e-15);
        assert_eq!(compute_scale(&[0.0f64; 4], w(8)).unwrap(), 1.0);
        assert_eq!(compute_scale(&[3.0f64], w(4)).unwrap(), 3.0 / 7.0);
    }

    #[test]
    fn scale_rejects_nan_and_empty() {
        assert!(compute_scale(&[1.0f64, f64::NAN], w(8)).is_err());
        assert!(compute_scale::<f32>(&[], w(8)).is_err());
    }

    #[test]
    fn quantize_examples() {
        let c = quantize(0.0f64, 0.37, w(8));
        assert_eq!(c.value(), 0);
        assert_eq!(dequantize(c, 0.37), 0.0);

        for b in BitWidth::SUPPORTED {
            let weights = [0.3f32, -0.91, 0.77];
            let s = compute_scale(&weights, w(b)).unwrap();
            assert_eq!(quantize(-0.91f32, s, w(b)).value(), w(b).max_value().wrapping_neg());
            assert_eq!(quantize(0.91f32, s, w(b)).value(), w(b).max_value());
        }

        let c = quantize(-1.283f64, 0.01, w(8));
        assert_eq!(c.value(), -128);
        assert!((dequantize(c, 0.01f64) + 1.28).abs() < 1e-12);
    }

    #[test]
    fn rounds_half_away_from_zero_and_clamps() {
        assert_eq!(quantize(2.5f64, 1.0, w(8)).value(), 3);
        assert_eq!(quantize(-2.5f64, 1.0, w(8)).value(), -3);
        assert_eq!(quantize(100.0f64, 1.0, w(4)).value(), 7);
        assert_eq!(quantize(-100.0f64, 1.0, w(4)).value(), -8);
    }

    proptest! {
        #[test]
        fn round_trip_within_half_step(x in -2.0f64..2.0, s in 0.001f64..0.5, bi in 0usize..3) {
            let width = w(BitWidth::SUPPORTED[bi]);
            let lo = width.min_value() as f64 * s;
            let hi = width.max_value() as f64 * s;
            let clamped = x.max(lo).min(hi);
            let back = dequantize(quantize(x, s, width), s);
            prop_assert!((back - clamped).abs() <= s / 2.0 + 1e-9);
        }
    }
}
