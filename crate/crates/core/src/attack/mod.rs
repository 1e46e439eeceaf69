//! Vulnerable bit ranking and fault injection.

mod baselines;
mod fl2r;
mod importance;
mod inject;
mod pipeline;
mod record;
mod trace_file;

pub use baselines::{select_gradient_bits, select_random_bits};
pub use fl2r::select_vulnerable_bits;
pub use importance::{all_importances, filter_importance, filter_l2, filter_weights, FilterRef};
pub use inject::apply_flips;
pub use pipeline::{run_attack, AttackConfig, AttackTrace, RankingMethod};
pub use record::FlipRecord;
pub use trace_file::TRACE_MAGIC;

#[cfg(test)]
mod tests;
