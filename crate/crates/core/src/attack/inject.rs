use super::record::FlipRecord;
use crate::error::Result;
use crate::quant::QuantModel;
use crate::scalar::Scalar;

/// XORs each recorded bit into the victim's true codes, in order.
pub fn apply_flips<T: Scalar>(victim: &QuantModel<T>, records: &[FlipRecord]) -> Result<QuantModel<T>> {
    let mut out = victim.clone();
    for r in records {
        apply_flip_in_place(&mut out, r)?;
    }
    Ok(out)
}

pub(crate) fn apply_flip_in_place<T: Scalar>(model: &mut QuantModel<T>, record: &FlipRecord) -> Result<()> {
    let i = record.code_index(model)?;
    let layer = &mut model.layers_mut()[record.filter.layer];
    let flipped = layer.code(i).flip_bit(record.bit)?;
    layer.codes[i] = flipped.value();
    Ok(())
}
