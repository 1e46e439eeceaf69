//! End-to-end attack: recover, reconstruct, rank on the surrogate, flip the victim.

use std::fmt;
use std::str::FromStr;

use super::baselines::{select_gradient_bits, select_random_bits};
use super::fl2r::select_vulnerable_bits;
use super::inject::apply_flip_in_place;
use super::record::FlipRecord;
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::quant::QuantModel;
use crate::reconstruction::{reconstruct_model, ReconstructionMethod};
use crate::recovery::simulate_recovery;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankingMethod {
    /// Normalized filter-wise L2 norm ranking (data-free).
    Fl2r,
    RandomBits {
        seed: u64,
    },
    /// White-box reference; uses the first `batch` samples of the evaluation set.
    GradientBaseline {
        batch: usize,
    },
}

impl RankingMethod {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Fl2r => "fl2r",
            Self::RandomBits { .. } => "random",
            Self::GradientBaseline { .. } => "gradient",
        }
    }

    /// Ranks bits on `surrogate`. `data` is only read by the gradient baseline.
    pub fn select<T: Scalar>(
        &self,
        surrogate: &QuantModel<T>,
        n_bf: usize,
        data: &Dataset<T>,
    ) -> Result<Vec<FlipRecord>> {
        match *self {
            Self::Fl2r => select_vulnerable_bits(surrogate, n_bf),
            Self::RandomBits { seed } => select_random_bits(surrogate, n_bf, seed),
            Self::GradientBaseline { batch } => select_gradient_bits(surrogate, &data.take(batch), n_bf),
        }
    }
}

/// `fl2r`, `random:<seed>`, `gradient:<batch>`.
impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fl2r => f.write_str("fl2r"),
            Self::RandomBits { seed } => write!(f, "random:{seed}"),
            Self::GradientBaseline { batch } => write!(f, "gradient:{batch}"),
        }
    }
}

impl FromStr for RankingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |default: u64| -> Result<u64> {
            arg.map_or(Ok(default), |a| {
                a.trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad ranking parameter in {s:?}")))
            })
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "fl2r" if arg.is_none() => Ok(Self::Fl2r),
            "random" => Ok(Self::RandomBits { seed: num(0)? }),
            "gradient" => Ok(Self::GradientBaseline {
                batch: num(64)? as usize,
            }),
            _ => Err(Error::invalid(format!("unknown ranking method {s:?}"))),
        }
    }
}

/// Parameters echoed into every trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    pub bit_width: u8,
    pub recovery_rate: f64,
    pub seed: u64,
    pub ranking: RankingMethod,
    pub reconstruction: ReconstructionMethod,
    pub n_bf: usize,
}

/// Result of one attack run.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackTrace {
    pub config: AttackConfig,
    /// Fraction of bits the simulated extraction actually exposed.
    pub recovered_fraction: f64,
    /// Accuracy of the attacker's reconstructed model on the evaluation set.
    pub surrogate_accuracy: f64,
    pub flips: Vec<FlipRecord>,
    /// Victim accuracy before any flip, then after each flip (length `n_bf + 1`).
    pub accuracy: Vec<f64>,
}

/// Runs the full pipeline. The ranking only ever sees the surrogate, so bits
/// hidden by the recovery mask never influence which bits are chosen.
pub fn run_attack<T: Scalar>(
    victim: &QuantModel<T>,
    recovery_rate: f64,
    seed: u64,
    ranking: RankingMethod,
    reconstruction: ReconstructionMethod,
    n_bf: usize,
    eval: &Dataset<T>,
) -> Result<AttackTrace> {
    let widths: Vec<u8> = victim.layers().iter().map(|l| l.params.width.bits()).collect();
    let bit_width = widths[0];
    if widths.iter().any(|&w| w != bit_width) {
        return Err(Error::invalid("victim layers use mixed bit widths"));
    }
    let partial = simulate_recovery(victim, recovery_rate, seed)?;
    let surrogate = reconstruct_model(&partial, reconstruction);
    let flips = ranking.select(&surrogate, n_bf, eval)?;

    let mut current = victim.clone();
    let mut accuracy = Vec::with_capacity(n_bf + 1);
    accuracy.push(current.accuracy(eval)?);
    for r in &flips {
        apply_flip_in_place(&mut current, r)?;
        accuracy.push(current.accuracy(eval)?);
    }
    Ok(AttackTrace {
        config: AttackConfig {
            bit_width,
            recovery_rate,
            seed,
            ranking,
            reconstruction,
            n_bf,
        },
        recovered_fraction: partial.actual_recovery_rate(),
        surrogate_accuracy: surrogate.accuracy(eval)?,
        flips,
        accuracy,
    })
}
