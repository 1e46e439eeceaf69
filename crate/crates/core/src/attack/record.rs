use std::fmt;

use super::importance::{filter_size, FilterRef};
use crate::error::{Error, Result};
use crate::quant::QuantModel;
use crate::scalar::Scalar;

/// One bit flip: `weight` indexes the flattened `(c, k1, k2)` position inside the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlipRecord {
    pub filter: FilterRef,
    pub weight: usize,
    pub bit: u8,
}

impl FlipRecord {
    pub fn new(layer: usize, filter: usize, weight: usize, bit: u8) -> Self {
        Self {
            filter: FilterRef { layer, filter },
            weight,
            bit,
        }
    }

    /// Index into the layer's flat code vector, after checking every field.
    pub fn code_index<T: Scalar>(&self, model: &QuantModel<T>) -> Result<usize> {
        let spec = model
            .architecture()
            .parametric_layer(self.filter.layer)
            .ok_or_else(|| Error::invalid(format!("{self}: no parametric layer {}", self.filter.layer)))?;
        if self.filter.filter >= spec.filter_count() {
            return Err(Error::invalid(format!("{self}: filter out of range")));
        }
        if self.weight >= spec.filter_size() {
            return Err(Error::invalid(format!("{self}: weight out of range")));
        }
        if self.bit >= model.layers()[self.filter.layer].params.width.bits() {
            return Err(Error::invalid(format!("{self}: bit position out of range")));
        }
        Ok(self.filter.filter * filter_size(model, self.filter.layer) + self.weight)
    }
}

impl fmt::Display for FlipRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "layer {} filter {} weight {} bit {}",
            self.filter.layer, self.filter.filter, self.weight, self.bit
        )
    }
}
