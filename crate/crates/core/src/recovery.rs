//! Simulated partial parameter extraction.
//!
//! Every weight bit is independently exposed with probability `rp`. The
//! draws come from a ChaCha8 stream seeded with the 64-bit run seed and are
//! consumed in layer order, then weight order, then bit position from LSB to
//! sign bit, one Bernoulli draw per bit. Architecture and scales are copied
//! verbatim.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arch::Architecture;
use crate::error::{Error, Result};
use crate::quant::{BitWidth, Code, QuantModel, QuantParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// The recovered bits of one weight. Bits outside `mask` are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartialCode {
    bits: u8,
    mask: u8,
    width: BitWidth,
}

impl PartialCode {
    pub fn new(bits: u8, mask: u8, width: BitWidth) -> Self {
        let mask = mask & width.mask();
        Self {
            bits: bits & mask,
            mask,
            width,
        }
    }

    pub fn full(code: Code) -> Self {
        Self::new(code.bits(), code.width().mask(), code.width())
    }

    pub fn unknown(width: BitWidth) -> Self {
        Self::new(0, 0, width)
    }

    /// Recovered bit values (zero at unknown positions).
    pub fn bits(self) -> u8 {
        self.bits
    }

    /// Set bits mark recovered positions.
    pub fn mask(self) -> u8 {
        self.mask
    }

    pub fn width(self) -> BitWidth {
        self.width
    }

    pub fn is_known(self, position: u8) -> bool {
        (self.mask >> position) & 1 == 1
    }

    pub fn is_complete(self) -> bool {
        self.mask == self.width.mask()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialLayer<T> {
    pub params: QuantParams<T>,
    /// Recovered bit patterns, zero where unrecovered.
    pub bits: Vec<u8>,
    /// Per-weight recovery masks in the low `N_q` bits.
    pub masks: Vec<u8>,
    pub bias: Tensor<T>,
}

impl<T> PartialLayer<T> {
    pub fn code(&self, index: usize) -> PartialCode {
        PartialCode::new(self.bits[index], self.masks[index], self.params.width)
    }
}

/// The attacker's view of a victim: codes with per-bit known-masks.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialModel<T> {
    arch: Architecture,
    layers: Vec<PartialLayer<T>>,
}

impl<T: Scalar> PartialModel<T> {
    pub fn new(arch: Architecture, mut layers: Vec<PartialLayer<T>>) -> Result<Self> {
        if layers.len() != arch.parametric_count() {
            return Err(Error::Architecture(format!(
                "{} partial layers for {} parametric layers",
                layers.len(),
                arch.parametric_count()
            )));
        }
        for ((_, spec), l) in arch.parametric().zip(layers.iter_mut()) {
            let n = spec.filter_count() * spec.filter_size();
            if l.bits.len() != n || l.masks.len() != n {
                return Err(Error::Shape {
                    expected: vec![n],
                    found: vec![l.bits.len(), l.masks.len()],
                });
            }
            if l.bias.shape() != [spec.filter_count()] {
                return Err(Error::Shape {
                    expected: vec![spec.filter_count()],
                    found: l.bias.shape().to_vec(),
                });
            }
            let wm = l.params.width.mask();
            for (b, m) in l.bits.iter_mut().zip(l.masks.iter_mut()) {
                *m &= wm;
                *b &= *m;
            }
        }
        Ok(Self { arch, layers })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[PartialLayer<T>] {
        &self.layers
    }

    pub fn total_bits(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.bits.len() * l.params.width.bits() as usize)
            .sum()
    }

    pub fn recovered_bits(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| &l.masks)
            .map(|m| m.count_ones() as usize)
            .sum()
    }

    /// Recovered-bit count over total bit count.
    pub fn actual_recovery_rate(&self) -> f64 {
        self.recovered_bits() as f64 / self.total_bits() as f64
    }
}

/// Exposes each victim weight bit with probability `rp`, deterministically in `seed`.
pub fn simulate_recovery<T: Scalar>(victim: &QuantModel<T>, rp: f64, seed: u64) -> Result<PartialModel<T>> {
    if !(0.0..=1.0).contains(&rp) {
        return Err(Error::invalid(format!("recovery rate {rp} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = victim
        .layers()
        .iter()
        .map(|l| {
            let width = l.params.width;
            let masks: Vec<u8> = l
                .codes
                .iter()
                .map(|_| (0..width.bits()).fold(0u8, |m, p| if rng.random_bool(rp) { m | (1 << p) } else { m }))
                .collect();
            let bits = l.codes.iter().zip(&masks).map(|(&c, &m)| (c as u8) & m).collect();
            PartialLayer {
                params: l.params,
                bits,
                masks,
                bias: l.bias.clone(),
            }
        })
        .collect();
    Ok(PartialModel {
        arch: victim.architecture().clone(),
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::LayerSpec;
    use crate::model::{FloatModel, LayerParams};

    /// Dense 125→10 victim: 1250 weights, 10,000 bits at 8-bit.
    fn victim() -> QuantModel<f32> {
        let arch = Architecture::new(vec![LayerSpec::dense(125, 10)], vec![125], 10).unwrap();
        let w: Vec<f32> = (0..1250).map(|i| ((i * 37 % 255) as f32 - 127.0) / 100.0).collect();
        let m = FloatModel::new(
            arch,
            vec![LayerParams {
                weight: Tensor::new(vec![10, 125], w).unwrap(),
                bias: Tensor::zeros(vec![10]),
            }],
        )
        .unwrap();
        QuantModel::quantize(&m, BitWidth::new(8).unwrap()).unwrap()
    }

    #[test]
    fn full_recovery_copies_everything() {
        let v = victim();
        let p = simulate_recovery(&v, 1.0, 3).unwrap();
        assert!(p.layers()[0].masks.iter().all(|&m| m == 0xff));
        let codes: Vec<i8> = p.layers()[0].bits.iter().map(|&b| b as i8).collect();
        assert_eq!(codes, v.layers()[0].codes);
        assert_eq!(p.actual_recovery_rate(), 1.0);
    }

    #[test]
    fn zero_recovery_exposes_nothing() {
        let p = simulate_recovery(&victim(), 0.0, 3).unwrap();
        assert!(p.layers()[0].masks.iter().all(|&m| m == 0));
        assert!(p.layers()[0].bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn rate_is_near_target() {
        let p = simulate_recovery(&victim(), 0.7, 2024).unwrap();
        assert_eq!(p.total_bits(), 10_000);
        let n = p.recovered_bits();
        assert!((6800..=7200).contains(&n), "recovered {n}");
    }

    #[test]
    fn deterministic_in_seed_and_varies_across_seeds() {
        let v = victim();
        let a = simulate_recovery(&v, 0.5, 11).unwrap();
        assert_eq!(a, simulate_recovery(&v, 0.5, 11).unwrap());
        assert_ne!(
            a.layers()[0].masks,
            simulate_recovery(&v, 0.5, 12).unwrap().layers()[0].masks
        );
    }

    #[test]
    fn recovered_bits_match_victim() {
        let v = victim();
        let before = v.clone();
        let p = simulate_recovery(&v, 0.4, 5).unwrap();
        assert_eq!(v, before);
        for (i, &c) in v.layers()[0].codes.iter().enumerate() {
            let pc = p.layers()[0].code(i);
            assert_eq!(pc.bits(), (c as u8) & pc.mask());
        }
    }

    #[test]
    fn rejects_invalid_rate() {
        assert!(simulate_recovery(&victim(), 1.5, 0).is_err());
        assert!(simulate_recovery(&victim(), f64::NAN, 0).is_err());
    }
}
