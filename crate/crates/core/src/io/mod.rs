//! On-disk formats.
//!
//! Model-like files start with a text header (magic line, architecture,
//! `end`) followed by a little-endian binary payload.

mod data_file;
mod header;
mod model_file;
mod qmodel_file;
mod reader;

pub use data_file::{load_dataset, read_dataset, save_dataset, write_dataset};
pub use model_file::{load_model, read_model, save_model, write_model};
pub use qmodel_file::{
    load_partial, load_qmodel, read_partial, read_qmodel, save_partial, save_qmodel, write_partial, write_qmodel,
};

pub const MODEL_MAGIC: &str = "bitsiege-model-v1";
pub const QMODEL_MAGIC: &str = "bitsiege-qmodel-v1";
pub const PARTIAL_MAGIC: &str = "bitsiege-partial-v1";
pub const DATA_MAGIC: &str = "bitsiege-data-v1";
