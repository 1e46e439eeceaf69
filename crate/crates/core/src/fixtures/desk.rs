//! The frozen desk-scale victim used by the experiments and the acceptance suite.

use serde::{Deserialize, Serialize};

use super::synth::{gen_synthetic, SynthSpec};
use super::train::{train, TrainConfig};
use crate::arch::Architecture;
use crate::error::Result;
use crate::model::{Dataset, FloatModel};

/// Data and training settings for one victim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub data: SynthSpec,
    pub train: TrainConfig,
}

impl TrainSpec {
    /// 4 classes, 200 samples per class, noise 0.3 on 1×8×8 inputs.
    pub fn desk() -> Self {
        Self {
            data: SynthSpec {
                classes: 4,
                samples_per_class: 200,
                input_shape: vec![1, 8, 8],
                noise: 0.3,
                seed: 1,
            },
            train: TrainConfig {
                epochs: 10,
                learning_rate: 0.05,
                batch_size: 16,
                seed: 1,
            },
        }
    }
}

/// A trained victim with its data splits.
#[derive(Debug, Clone)]
pub struct Victim {
    pub model: FloatModel<f32>,
    pub train: Dataset<f32>,
    pub test: Dataset<f32>,
}

/// Generates data and trains the desk CNN described by `spec`.
pub fn build_victim(spec: &TrainSpec) -> Result<Victim> {
    let (train_set, test) = gen_synthetic::<f32>(&spec.data)?;
    let arch = Architecture::desk_cnn(spec.data.classes)?;
    let model = train(&arch, &train_set, &spec.train)?;
    Ok(Victim {
        model,
        train: train_set,
        test,
    })
}
