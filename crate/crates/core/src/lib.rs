//! Simulation of semi-black-box bit-flip attacks on quantized neural networks.
//!
//! The pipeline mirrors an attacker who has the victim's architecture and a
//! partial copy of its weight bits:
//!
//! 1. [`recovery::simulate_recovery`] exposes each weight bit with a fixed probability.
//! 2. [`reconstruction::reconstruct_model`] fills the missing bits (closer-to-zero by default).
//! 3. [`attack::select_vulnerable_bits`] ranks sign bits on the reconstructed surrogate
//!    by normalized filter L2 norm.
//! 4. [`attack::apply_flips`] injects the chosen flips into the true victim.
//!
//! [`attack::run_attack`] chains the four stages and records the victim's accuracy
//! after every flip.
//!
//! Float containers are generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

pub mod arch;
pub mod attack;
pub mod backprop;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod io;
mod layers;
pub mod model;
pub mod quant;
pub mod reconstruction;
pub mod recovery;
mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor32 = tensor::Tensor<f32>;
pub type Tensor64 = tensor::Tensor<f64>;
pub type FloatModel32 = model::FloatModel<f32>;
pub type FloatModel64 = model::FloatModel<f64>;
pub type Dataset32 = model::Dataset<f32>;
pub type Dataset64 = model::Dataset<f64>;
pub type QuantModel32 = quant::QuantModel<f32>;
pub type QuantModel64 = quant::QuantModel<f64>;
pub type PartialModel32 = recovery::PartialModel<f32>;
pub type PartialModel64 = recovery::PartialModel<f64>;
