//! Prototype-plus-noise classification data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub classes: usize,
    /// Training samples per class; the test split uses the same count.
    pub samples_per_class: usize,
    #[serde(default = "default_input_shape")]
    pub input_shape: Vec<usize>,
    pub noise: f64,
    pub seed: u64,
}

fn default_input_shape() -> Vec<usize> {
    vec![1, 8, 8]
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.samples_per_class == 0 {
            return Err(Error::invalid(
                "synthetic data needs ≥2 classes and ≥1 sample per class",
            ));
        }
        if self.input_shape.is_empty() || self.input_shape.contains(&0) {
            return Err(Error::invalid("input shape must be positive"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::invalid("noise must be a finite non-negative number"));
        }
        if self.classes > self.input_shape.iter().product() {
            return Err(Error::invalid("more classes than input dimensions"));
        }
        Ok(())
    }

    /// Class prototypes: Gram-Schmidt orthogonalized Gaussian vectors with
    /// unit RMS entries.
    pub fn prototypes(&self) -> Vec<Vec<f64>> {
        let dim: usize = self.input_shape.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(0);
        let mut protos: Vec<Vec<f64>> = Vec::with_capacity(self.classes);
        while protos.len() < self.classes {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            for p in &protos {
                let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / dim as f64;
                v.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
            }
            let rms = (v.iter().map(|a| a * a).sum::<f64>() / dim as f64).sqrt();
            if rms > 1e-6 {
                protos.push(v.into_iter().map(|a| a / rms).collect());
            }
        }
        protos
    }
}

/// Generates `(train, test)` splits with independent noise draws.
pub fn gen_synthetic<T: Scalar>(spec: &SynthSpec) -> Result<(Dataset<T>, Dataset<T>)> {
    spec.validate()?;
    let protos = spec.prototypes();
    let split = |stream: u64| -> Result<Dataset<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream);
        let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid(e.to_string()))?;
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..spec.samples_per_class {
            for (class, p) in protos.iter().enumerate() {
                let x: Vec<T> = p.iter().map(|&v| T::of(v + noise.sample(&mut rng))).collect();
                inputs.push(Tensor::new(spec.input_shape.clone(), x)?);
                labels.push(class);
            }
        }
        Dataset::new(inputs, labels, spec.classes, spec.input_shape.clone())
    };
    Ok((split(1)?, split(2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::argmax;

    fn spec(noise: f64) -> SynthSpec {
        SynthSpec {
            classes: 4,
            samples_per_class: 10,
            input_shape: vec![1, 8, 8],
            noise,
            seed: 7,
        }
    }

    #[test]
    fn noiseless_samples_equal_prototypes() {
        let s = spec(0.0);
        let (train, test) = gen_synthetic::<f64>(&s).unwrap();
        let protos = s.prototypes();
        for d in [&train, &test] {
            for (x, &y) in d.inputs().iter().zip(d.labels()) {
                assert_eq!(x.data(), protos[y].as_slice());
                // Nearest prototype by dot product recovers the label.
                let scores: Vec<f64> = protos
                    .iter()
                    .map(|p| p.iter().zip(x.data()).map(|(a, b)| a * b).sum())
                    .collect();
                assert_eq!(argmax(&scores), y);
            }
        }
    }

    #[test]
    fn prototypes_are_orthogonal() {
        let p = spec(0.3).prototypes();
        for i in 0..p.len() {
            for j in 0..i {
                let dot: f64 = p[i].iter().zip(&p[j]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn deterministic_and_disjoint() {
        let (a, b) = gen_synthetic::<f32>(&spec(0.3)).unwrap();
        let (a2, _) = gen_synthetic::<f32>(&spec(0.3)).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a.inputs()[0], b.inputs()[0]);
        assert_eq!(a.len(), 40);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(-1.0);
        assert!(gen_synthetic::<f32>(&s).is_err());
        s.noise = 0.1;
        s.classes = 100;
        assert!(gen_synthetic::<f32>(&s).is_err());
    }
}
