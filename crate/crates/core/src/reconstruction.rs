//! Filling unrecovered weight bits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quant::{Code, QuantLayer, QuantModel};
use crate::recovery::{PartialCode, PartialModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReconstructionMethod {
    /// Closer-to-zero: pick the completion with the smallest magnitude.
    Czr,
    AllZeros,
    AllOnes,
}

impl ReconstructionMethod {
    pub const ALL: [ReconstructionMethod; 3] = [Self::Czr, Self::AllZeros, Self::AllOnes];

    pub fn name(self) -> &'static str {
        match self {
            Self::Czr => "czr",
            Self::AllZeros => "all-zeros",
            Self::AllOnes => "all-ones",
        }
    }
}

impl fmt::Display for ReconstructionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReconstructionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "czr" => Ok(Self::Czr),
            "all-zeros" | "allzeros" | "zeros" => Ok(Self::AllZeros),
            "all-ones" | "allones" | "ones" => Ok(Self::AllOnes),
            _ => Err(Error::invalid(format!("unknown reconstruction method {s:?}"))),
        }
    }
}

fn fill(partial: PartialCode, ones: bool) -> Code {
    let unknown = !partial.mask() & partial.width().mask();
    let bits = if ones { partial.bits() | unknown } else { partial.bits() };
    Code::from_bits(bits, partial.width())
}

/// Completes a partially recovered code. Recovered bits are kept verbatim.
///
/// CZR follows the sign bit: a known 0 fills zeros, a known 1 fills ones.
/// With the sign unknown, both completions are built and the one with the
/// smaller magnitude wins; a tie goes to the non-negative candidate.
pub fn reconstruct_code(partial: PartialCode, method: ReconstructionMethod) -> Code {
    match method {
        ReconstructionMethod::AllZeros => fill(partial, false),
        ReconstructionMethod::AllOnes => fill(partial, true),
        ReconstructionMethod::Czr => {
            let sign = partial.width().sign_bit();
            if partial.is_known(sign) {
                let negative = (partial.bits() >> sign) & 1 == 1;
                fill(partial, negative)
            } else {
                let pos = fill(partial, false);
                let neg = fill(partial, true);
                if (neg.value() as i16).abs() < pos.value() as i16 {
                    neg
                } else {
                    pos
                }
            }
        }
    }
}

/// Exhaustive reference for CZR: the completion with minimal `|value|`, ties
/// toward the non-negative value and then toward the smaller bit pattern.
pub fn oracle_min_abs(partial: PartialCode) -> Code {
    let width = partial.width();
    let unknown = !partial.mask() & width.mask();
    let mut best: Option<Code> = None;
    for pattern in 0..=width.mask() {
        if pattern & partial.mask() != partial.bits() {
            continue;
        }
        debug_assert_eq!(pattern & !unknown & width.mask(), partial.bits());
        let cand = Code::from_bits(pattern, width);
        let key = |c: Code| ((c.value() as i16).abs(), c.value() < 0, c.bits());
        if best.is_none_or(|b| key(cand) < key(b)) {
            best = Some(cand);
        }
    }
    best.expect("at least one completion exists")
}

/// Reconstructs every weight; architecture, scales and biases pass through.
pub fn reconstruct_model<T: Scalar>(partial: &PartialModel<T>, method: ReconstructionMethod) -> QuantModel<T> {
    let layers = partial
        .layers()
        .iter()
        .map(|l| QuantLayer {
            params: l.params,
            codes: (0..l.bits.len())
                .map(|i| reconstruct_code(l.code(i), method).value())
                .collect(),
            bias: l.bias.clone(),
        })
        .collect();
    QuantModel::new(partial.architecture().clone(), layers).expect("reconstructed codes are in range")
}
