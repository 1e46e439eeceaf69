//! Experiment configuration files (TOML).
//!
//! ```toml
//! victim = "victim.bsm"          # float model; quantized at each bit width
//! eval = "test.bsd"              # evaluation dataset
//! bit_widths = [8, 6, 4]
//! recovery_rates = [0.6, 0.8, 1.0]
//! seeds = [0, 1, 2]              # or: seed_count = 10 (seeds seed_base..seed_base+10)
//! rankings = ["fl2r", "random", "gradient:64"]
//! reconstructions = ["czr", "all-zeros", "all-ones"]
//! n_bf = 100
//! out = "results"                # optional
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.
//! `random` without a parameter draws its bits with the run seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::attack::{AttackConfig, RankingMethod};
use crate::error::{Error, Result};
use crate::quant::BitWidth;
use crate::reconstruction::ReconstructionMethod;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    victim: PathBuf,
    eval: PathBuf,
    bit_widths: Vec<u8>,
    recovery_rates: Vec<f64>,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    seed_count: Option<usize>,
    #[serde(default)]
    seed_base: Option<u64>,
    rankings: Vec<String>,
    reconstructions: Vec<String>,
    n_bf: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

/// How a ranking entry is instantiated per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingChoice {
    Fixed(RankingMethod),
    /// Random bits seeded with the run seed.
    RandomPerRun,
}

impl RankingChoice {
    pub fn for_seed(self, seed: u64) -> RankingMethod {
        match self {
            Self::Fixed(r) => r,
            Self::RandomPerRun => RankingMethod::RandomBits { seed },
        }
    }
}

/// A validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub victim: PathBuf,
    pub eval: PathBuf,
    pub bit_widths: Vec<BitWidth>,
    pub recovery_rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rankings: Vec<RankingChoice>,
    pub reconstructions: Vec<ReconstructionMethod>,
    pub n_bf: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let loc = e
                .span()
                .map(|s| format!("line {}", text[..s.start].matches('\n').count() + 1))
                .unwrap_or_else(|| "config".into());
            Error::parse(loc, e.message().to_string())
        })?;
        let bad = |m: String| Error::parse("config", m);

        let bit_widths = raw
            .bit_widths
            .iter()
            .map(|&b| BitWidth::new(b))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| bad(e.to_string()))?;
        if let Some(rp) = raw.recovery_rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(bad(format!("recovery rate {rp} outside [0, 1]")));
        }
        let seeds = match (raw.seeds, raw.seed_count) {
            (Some(s), None) => {
                if raw.seed_base.is_some() {
                    return Err(bad("seed_base only applies to seed_count".into()));
                }
                s
            }
            (None, Some(n)) => {
                let b = raw.seed_base.unwrap_or(0);
                (0..n as u64).map(|i| b + i).collect()
            }
            _ => return Err(bad("give exactly one of seeds or seed_count".into())),
        };
        let rankings = raw
            .rankings
            .iter()
            .map(|r| {
                if r.trim().eq_ignore_ascii_case("random") {
                    Ok(RankingChoice::RandomPerRun)
                } else {
                    r.parse().map(RankingChoice::Fixed)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| bad(e.to_string()))?;
        let reconstructions = raw
            .reconstructions
            .iter()
            .map(|r| r.parse())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| bad(e.to_string()))?;
        let cfg = Self {
            victim: base.join(raw.victim),
            eval: base.join(raw.eval),
            bit_widths,
            recovery_rates: raw.recovery_rates,
            seeds,
            rankings,
            reconstructions,
            n_bf: raw.n_bf,
            out: raw.out.map(|o| base.join(o)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let empty = [
            ("bit_widths", self.bit_widths.is_empty()),
            ("recovery_rates", self.recovery_rates.is_empty()),
            ("seeds", self.seeds.is_empty()),
            ("rankings", self.rankings.is_empty()),
            ("reconstructions", self.reconstructions.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::parse("config", format!("{name} must not be empty")));
        }
        if self.n_bf == 0 {
            return Err(Error::parse("config", "n_bf must be positive"));
        }
        Ok(())
    }

    /// Replaces the seeds with `base, base+1, ...`, keeping their count.
    pub fn rebase_seeds(&mut self, base: u64) {
        let n = self.seeds.len() as u64;
        self.seeds = (0..n).map(|i| base + i).collect();
    }

    /// Every run in the Cartesian product, ordered by bit width, rate, seed,
    /// ranking, reconstruction.
    pub fn runs(&self) -> Vec<AttackConfig> {
        let mut out = Vec::new();
        for &w in &self.bit_widths {
            for &rp in &self.recovery_rates {
                for &seed in &self.seeds {
                    for &ranking in &self.rankings {
                        for &reconstruction in &self.reconstructions {
                            out.push(AttackConfig {
                                bit_width: w.bits(),
                                recovery_rate: rp,
                                seed,
                                ranking: ranking.for_seed(seed),
                                reconstruction,
                                n_bf: self.n_bf,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Stable file stem for a run: the first 16 hex digits of the SHA-256 of its
/// canonical description.
pub fn run_id(cfg: &AttackConfig) -> String {
    let key = format!(
        "nq={} rp={} seed={} ranking={} recon={} n_bf={}",
        cfg.bit_width, cfg.recovery_rate, cfg.seed, cfg.ranking, cfg.reconstruction, cfg.n_bf
    );
    let digest = Sha256::digest(key.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
victim = "v.bsm"
eval = "data/test.bsd"
bit_widths = [8, 4]
recovery_rates = [0.5, 1.0]
seed_count = 3
seed_base = 10
rankings = ["fl2r", "random", "gradient:16"]
reconstructions = ["czr"]
n_bf = 5
"#;

    #[test]
    fn parses_and_expands() {
        let c = ExperimentConfig::parse(BASIC, Path::new("/cfg")).unwrap();
        assert_eq!(c.victim, PathBuf::from("/cfg/v.bsm"));
        assert_eq!(c.eval, PathBuf::from("/cfg/data/test.bsd"));
        assert_eq!(c.seeds, vec![10, 11, 12]);
        let runs = c.runs();
        assert_eq!(runs.len(), 2 * 2 * 3 * 3);
        assert_eq!(runs[1].ranking, RankingMethod::RandomBits { seed: 10 });
        assert_eq!(runs[4].ranking, RankingMethod::RandomBits { seed: 11 });
        assert_eq!(runs[2].ranking, RankingMethod::GradientBaseline { batch: 16 });
    }

    #[test]
    fn rebase_keeps_count() {
        let mut c = ExperimentConfig::parse(BASIC, Path::new("")).unwrap();
        c.rebase_seeds(100);
        assert_eq!(c.seeds, vec![100, 101, 102]);
    }

    #[test]
    fn rejects_invalid_values() {
        for (from, to) in [
            ("[8, 4]", "[8, 5]"),
            ("[0.5, 1.0]", "[0.5, 1.5]"),
            ("[\"czr\"]", "[]"),
            ("n_bf = 5", "n_bf = 0"),
            ("\"fl2r\",", "\"magic\","),
            ("seed_count = 3", "seeds = [1]\nseed_count = 3"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(ExperimentConfig::parse(&text, Path::new("")).is_err(), "{to}");
        }
    }

    #[test]
    fn unknown_keys_report_a_line() {
        let text = format!("{BASIC}colour = \"red\"\n");
        match ExperimentConfig::parse(&text, Path::new("")) {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn run_ids_are_stable_and_distinct() {
        let c = ExperimentConfig::parse(BASIC, Path::new("")).unwrap();
        let ids: std::collections::HashSet<_> = c.runs().iter().map(run_id).collect();
        assert_eq!(ids.len(), c.runs().len());
        assert_eq!(run_id(&c.runs()[0]), run_id(&c.runs()[0]));
        assert_eq!(run_id(&c.runs()[0]).len(), 16);
    }
}
