//! Text serialization of attack traces.
//!
//! ```text
//! format bitsiege-trace-v1
//! nq 8
//! rp 0.7
//! seed 3
//! ranking fl2r
//! recon czr
//! n_bf 2
//! recovered_fraction 0.7012
//! surrogate_accuracy 0.93
//! flips 2
//! 0 3 4 7
//! 0 5 1 7
//! accuracy 3
//! 1
//! 0.9
//! 0.5
//! ```
//!
//! Flip lines are `layer filter weight bit`. Reals use the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write;

use super::pipeline::{AttackConfig, AttackTrace};
use super::record::FlipRecord;
use crate::error::{Error, Result};

pub const TRACE_MAGIC: &str = "bitsiege-trace-v1";

impl AttackTrace {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        writeln!(s, "format {TRACE_MAGIC}").unwrap();
        writeln!(s, "nq {}", c.bit_width).unwrap();
        writeln!(s, "rp {}", c.recovery_rate).unwrap();
        writeln!(s, "seed {}", c.seed).unwrap();
        writeln!(s, "ranking {}", c.ranking).unwrap();
        writeln!(s, "recon {}", c.reconstruction).unwrap();
        writeln!(s, "n_bf {}", c.n_bf).unwrap();
        writeln!(s, "recovered_fraction {}", self.recovered_fraction).unwrap();
        writeln!(s, "surrogate_accuracy {}", self.surrogate_accuracy).unwrap();
        writeln!(s, "flips {}", self.flips.len()).unwrap();
        for f in &self.flips {
            writeln!(s, "{} {} {} {}", f.filter.layer, f.filter.filter, f.weight, f.bit).unwrap();
        }
        writeln!(s, "accuracy {}", self.accuracy.len()).unwrap();
        for a in &self.accuracy {
            writeln!(s, "{a}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cur = Lines {
            lines: text.lines().collect(),
            pos: 0,
        };
        fn parse<V: std::str::FromStr>((n, v): (usize, String)) -> Result<V> {
            v.parse()
                .map_err(|_| Error::parse(format!("line {n}"), format!("cannot parse {v:?}")))
        }
        let (n, magic) = cur.field("format")?;
        if magic != TRACE_MAGIC {
            return Err(Error::parse(
                format!("line {n}"),
                format!("unsupported format {magic:?}"),
            ));
        }
        let bit_width = parse(cur.field("nq")?)?;
        let recovery_rate = parse(cur.field("rp")?)?;
        let seed = parse(cur.field("seed")?)?;
        let (n, r) = cur.field("ranking")?;
        let ranking = r
            .parse()
            .map_err(|e: Error| Error::parse(format!("line {n}"), e.to_string()))?;
        let (n, r) = cur.field("recon")?;
        let reconstruction = r
            .parse()
            .map_err(|e: Error| Error::parse(format!("line {n}"), e.to_string()))?;
        let n_bf = parse(cur.field("n_bf")?)?;
        let recovered_fraction = parse(cur.field("recovered_fraction")?)?;
        let surrogate_accuracy = parse(cur.field("surrogate_accuracy")?)?;
        let count: usize = parse(cur.field("flips")?)?;
        let mut flips = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = cur.next()?;
            let v: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::parse(format!("line {n}"), format!("bad flip record {line:?}"));
            let [l, f, w, b] = v[..] else { return Err(bad()) };
            flips.push(FlipRecord::new(
                l.parse().map_err(|_| bad())?,
                f.parse().map_err(|_| bad())?,
                w.parse().map_err(|_| bad())?,
                b.parse().map_err(|_| bad())?,
            ));
        }
        let count: usize = parse(cur.field("accuracy")?)?;
        let mut accuracy = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = cur.next()?;
            let a: f64 = parse((n, line.trim().to_string()))?;
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::parse(
                    format!("line {n}"),
                    format!("accuracy {a} outside [0, 1]"),
                ));
            }
            accuracy.push(a);
        }
        if let Some(i) = cur.lines[cur.pos..].iter().position(|l| !l.trim().is_empty()) {
            return Err(Error::parse(format!("line {}", cur.pos + i + 1), "trailing content"));
        }
        Ok(AttackTrace {
            config: AttackConfig {
                bit_width,
                recovery_rate,
                seed,
                ranking,
                reconstruction,
                n_bf,
            },
            recovered_fraction,
            surrogate_accuracy,
            flips,
            accuracy,
        })
    }
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    /// Next line with its 1-based number.
    fn next(&mut self) -> Result<(usize, &'a str)> {
        let line = self
            .lines
            .get(self.pos)
            .ok_or_else(|| Error::parse("end of trace", "unexpected end of file"))?;
        self.pos += 1;
        Ok((self.pos, line))
    }

    fn field(&mut self, key: &str) -> Result<(usize, String)> {
        let (n, line) = self.next()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
            _ => Err(Error::parse(
                format!("line {n}"),
                format!("expected {key:?}, found {line:?}"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::RankingMethod;
    use crate::reconstruction::ReconstructionMethod;

    fn sample() -> AttackTrace {
        AttackTrace {
            config: AttackConfig {
                bit_width: 8,
                recovery_rate: 0.7,
                seed: 3,
                ranking: RankingMethod::GradientBaseline { batch: 32 },
                reconstruction: ReconstructionMethod::AllOnes,
                n_bf: 2,
            },
            recovered_fraction: 0.70123,
            surrogate_accuracy: 0.1 + 0.2,
            flips: vec![FlipRecord::new(0, 3, 4, 7), FlipRecord::new(2, 1, 0, 7)],
            accuracy: vec![1.0, 0.9, 0.5],
        }
    }

    #[test]
    fn round_trip() {
        let t = sample();
        let text = t.to_text();
        assert!(text.starts_with("format bitsiege-trace-v1\nnq 8\nrp 0.7\n"));
        assert!(text.contains("\n0 3 4 7\n2 1 0 7\naccuracy 3\n"));
        assert_eq!(AttackTrace::from_text(&text).unwrap(), t);
    }

    #[test]
    fn errors_name_the_line() {
        let text = sample().to_text().replace("0 3 4 7", "0 3 x 7");
        match AttackTrace::from_text(&text) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 11"),
            other => panic!("{other:?}"),
        }
        assert!(AttackTrace::from_text("format bitsiege-trace-v0\n").is_err());
    }
}
