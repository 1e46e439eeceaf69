//! Symmetric uniform quantization and bit-level code algebra.

mod code;
mod model;
mod scheme;

pub use code::{BitWidth, Code};
pub use model::{QuantLayer, QuantModel};
pub use scheme::{compute_scale, dequantize, quantize, QuantParams};
