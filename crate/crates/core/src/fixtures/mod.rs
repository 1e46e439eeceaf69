//! Self-contained victim creation: synthetic data and a small trainer.

mod desk;
mod synth;
mod train;

pub use crate::backprop::{gradient, mean_loss, softmax_cross_entropy};
pub use desk::{build_victim, TrainSpec, Victim};
pub use synth::{gen_synthetic, SynthSpec};
pub use train::{init_model, train, train_with_history, TrainConfig};
