//! Dataset files: a text header (`shape`, `classes`, `samples`, `end`), the
//! samples as `f32` in sample-major order, then one `u8` label per sample.

use std::fs;
use std::path::Path;

use super::header::read_magic;
use super::reader::Reader;
use super::DATA_MAGIC;
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub fn write_dataset<T: Scalar>(data: &Dataset<T>) -> Result<Vec<u8>> {
    if data.classes() > 256 {
        return Err(Error::invalid("labels are stored as bytes; at most 256 classes"));
    }
    let dims: Vec<String> = data.input_shape().iter().map(usize::to_string).collect();
    let mut out = format!(
        "{DATA_MAGIC}\nshape {}\nclasses {}\nsamples {}\nend\n",
        dims.join(" "),
        data.classes(),
        data.len()
    )
    .into_bytes();
    for x in data.inputs() {
        for &v in x.data() {
            out.extend_from_slice(&v.as_f32().to_le_bytes());
        }
    }
    out.extend(data.labels().iter().map(|&l| l as u8));
    Ok(out)
}

pub fn read_dataset<T: Scalar>(bytes: &[u8]) -> Result<Dataset<T>> {
    let mut r = Reader::new(bytes);
    read_magic(&mut r, DATA_MAGIC)?;
    let mut field = |lineno: usize, key: &str| -> Result<Vec<usize>> {
        let loc = format!("line {lineno}");
        let line = r.line()?;
        let mut words = line.split_whitespace();
        if words.next() != Some(key) {
            return Err(Error::parse(loc, format!("expected {key:?}, found {line:?}")));
        }
        words
            .map(|w| w.parse().map_err(|_| Error::parse(&loc, format!("bad number {w:?}"))))
            .collect()
    };
    let shape = field(2, "shape")?;
    let classes = field(3, "classes")?;
    let samples = field(4, "samples")?;
    if !field(5, "end")?.is_empty() {
        return Err(Error::parse("line 5", "expected end"));
    }
    let (&[classes], &[samples]) = (&classes[..], &samples[..]) else {
        return Err(Error::parse("header", "classes and samples take one value each"));
    };
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::parse("line 2", "shape must be positive"));
    }
    let dim: usize = shape.iter().product();
    let mut inputs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let at = r.offset();
        let x = (0..dim)
            .map(|_| r.f32().map(|v| T::of(v as f64)))
            .collect::<Result<Vec<_>>>()?;
        inputs.push(Tensor::new(shape.clone(), x).map_err(|e| Error::parse(format!("byte {at}"), e.to_string()))?);
    }
    let at = r.offset();
    let labels: Vec<usize> = r.bytes(samples)?.iter().map(|&b| b as usize).collect();
    r.finish()?;
    Dataset::new(inputs, labels, classes, shape).map_err(|e| Error::parse(format!("byte {at}"), e.to_string()))
}

pub fn save_dataset<T: Scalar>(data: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_dataset(data)?)?;
    Ok(())
}

pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    read_dataset(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{gen_synthetic, SynthSpec};

    #[test]
    fn round_trip() {
        let spec = SynthSpec {
            classes: 4,
            samples_per_class: 3,
            input_shape: vec![1, 8, 8],
            noise: 0.3,
            seed: 2,
        };
        let (train, _) = gen_synthetic::<f32>(&spec).unwrap();
        let bytes = write_dataset(&train).unwrap();
        assert!(bytes.starts_with(b"bitsiege-data-v1\nshape 1 8 8\nclasses 4\nsamples 12\nend\n"));
        let back: crate::model::Dataset<f32> = read_dataset(&bytes).unwrap();
        assert_eq!(back, train);
        assert_eq!(write_dataset(&back).unwrap(), bytes);
    }

    #[test]
    fn rejects_bad_label() {
        let spec = SynthSpec {
            classes: 4,
            samples_per_class: 1,
            input_shape: vec![4],
            noise: 0.0,
            seed: 2,
        };
        let (train, _) = gen_synthetic::<f32>(&spec).unwrap();
        let mut bytes = write_dataset(&train).unwrap();
        *bytes.last_mut().unwrap() = 9;
        assert!(matches!(read_dataset::<f32>(&bytes), Err(Error::Parse { .. })));
    }
}
