//! Text encoding of architectures.
//!
//! ```text
//! <magic>
//! input 1 8 8
//! classes 4
//! conv2d c_in=1 c_out=8 kernel=3 stride=1 padding=0
//! relu
//! maxpool window=2
//! flatten
//! dense in_features=16 out_features=4
//! end
//! ```

use std::collections::HashMap;
use std::fmt::Write;

use super::reader::Reader;
use crate::arch::{Architecture, LayerSpec};
use crate::error::{Error, Result};

pub(crate) fn write_header(out: &mut Vec<u8>, magic: &str, arch: &Architecture) {
    let mut s = String::new();
    writeln!(s, "{magic}").unwrap();
    let dims: Vec<String> = arch.input_shape().iter().map(usize::to_string).collect();
    writeln!(s, "input {}", dims.join(" ")).unwrap();
    writeln!(s, "classes {}", arch.classes()).unwrap();
    for layer in arch.layers() {
        match *layer {
            LayerSpec::Conv2D {
                c_in,
                c_out,
                kernel,
                stride,
                padding,
            } => writeln!(
                s,
                "conv2d c_in={c_in} c_out={c_out} kernel={kernel} stride={stride} padding={padding}"
            ),
            LayerSpec::Dense {
                in_features,
                out_features,
            } => writeln!(s, "dense in_features={in_features} out_features={out_features}"),
            LayerSpec::ReLU => writeln!(s, "relu"),
            LayerSpec::MaxPool { window } => writeln!(s, "maxpool window={window}"),
            LayerSpec::Flatten => writeln!(s, "flatten"),
        }
        .unwrap();
    }
    s.push_str("end\n");
    out.extend_from_slice(s.as_bytes());
}

pub(crate) fn read_magic(r: &mut Reader<'_>, magic: &str) -> Result<()> {
    let line = r.line()?;
    if line != magic {
        return Err(Error::parse(
            "line 1",
            format!("expected format tag {magic:?}, found {line:?}"),
        ));
    }
    Ok(())
}

/// Parses the architecture lines following the magic line, through `end`.
pub(crate) fn read_architecture(r: &mut Reader<'_>) -> Result<Architecture> {
    let mut input: Option<Vec<usize>> = None;
    let mut classes: Option<usize> = None;
    let mut layers = Vec::new();
    let mut lineno = 1;
    loop {
        lineno += 1;
        let loc = format!("line {lineno}");
        let line = r.line()?;
        let mut words = line.split_whitespace();
        let Some(head) = words.next() else {
            return Err(Error::parse(loc, "empty header line"));
        };
        let rest: Vec<&str> = words.collect();
        match head {
            "end" => break,
            "input" => input = Some(rest.iter().map(|w| num(w, &loc)).collect::<Result<_>>()?),
            "classes" => {
                let [v] = rest[..] else {
                    return Err(Error::parse(loc, "classes takes one value"));
                };
                classes = Some(num(v, &loc)?);
            }
            kind => layers.push(parse_layer(kind, &rest, &loc)?),
        }
    }
    let input = input.ok_or_else(|| Error::parse("header", "missing input line"))?;
    let classes = classes.ok_or_else(|| Error::parse("header", "missing classes line"))?;
    Architecture::new(layers, input, classes).map_err(|e| Error::parse("header", e.to_string()))
}

fn num(s: &str, loc: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(loc, format!("expected an unsigned integer, found {s:?}")))
}

fn parse_layer(kind: &str, fields: &[&str], loc: &str) -> Result<LayerSpec> {
    let mut kv = HashMap::new();
    for f in fields {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| Error::parse(loc, format!("expected key=value, found {f:?}")))?;
        kv.insert(k, num(v, loc)?);
    }
    let mut get = |k: &str| {
        kv.remove(k)
            .ok_or_else(|| Error::parse(loc, format!("{kind} is missing field {k}")))
    };
    let layer = match kind {
        "conv2d" => LayerSpec::Conv2D {
            c_in: get("c_in")?,
            c_out: get("c_out")?,
            kernel: get("kernel")?,
            stride: get("stride")?,
            padding: get("padding")?,
        },
        "dense" => LayerSpec::Dense {
            in_features: get("in_features")?,
            out_features: get("out_features")?,
        },
        "maxpool" => LayerSpec::MaxPool { window: get("window")? },
        "relu" => LayerSpec::ReLU,
        "flatten" => LayerSpec::Flatten,
        other => return Err(Error::parse(loc, format!("unknown layer kind {other:?}"))),
    };
    if let Some(k) = kv.keys().next() {
        return Err(Error::parse(loc, format!("unexpected field {k} for {kind}")));
    }
    Ok(layer)
}
