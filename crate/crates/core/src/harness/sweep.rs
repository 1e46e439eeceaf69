//! Sweeps over the experiment axes and the CSV reports built from them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::{run_id, ExperimentConfig};
use crate::attack::{run_attack, AttackTrace, RankingMethod};
use crate::error::{Error, Result};
use crate::model::{Dataset, FloatModel};
use crate::quant::QuantModel;
use crate::scalar::Scalar;

/// Flip counts reported in the summary table.
pub const SUMMARY_FLIPS: [usize; 5] = [0, 10, 20, 50, 100];

pub const RESULTS_CSV: &str = "results.csv";
pub const SERIES_CSV: &str = "series.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const TRACE_DIR: &str = "traces";

/// Ranking label used for grouping: per-run random seeds collapse to `random`.
pub fn ranking_label(r: &RankingMethod) -> String {
    match r {
        RankingMethod::RandomBits { .. } => "random".into(),
        other => other.to_string(),
    }
}

/// One configuration (all axes but the seed).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub bit_width: u8,
    /// Recovery rate as its display string, so equal rates group together.
    pub recovery_rate: String,
    pub ranking: String,
    pub reconstruction: String,
}

/// Accuracy envelope across seeds at one flip index.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub flip_index: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by bit width, rate, seed, ranking, reconstruction.
    pub traces: Vec<AttackTrace>,
    pub series: BTreeMap<GroupKey, Vec<SeriesPoint>>,
}

fn trace_order(a: &AttackTrace, b: &AttackTrace) -> Ordering {
    let (x, y) = (&a.config, &b.config);
    x.bit_width
        .cmp(&y.bit_width)
        .then(x.recovery_rate.total_cmp(&y.recovery_rate))
        .then(x.seed.cmp(&y.seed))
        .then(ranking_label(&x.ranking).cmp(&ranking_label(&y.ranking)))
        .then(x.reconstruction.name().cmp(y.reconstruction.name()))
}

impl SweepResult {
    pub fn from_traces(mut traces: Vec<AttackTrace>) -> Self {
        traces.sort_by(trace_order);
        let mut groups: BTreeMap<GroupKey, Vec<&AttackTrace>> = BTreeMap::new();
        for t in &traces {
            let c = &t.config;
            groups
                .entry(GroupKey {
                    bit_width: c.bit_width,
                    recovery_rate: c.recovery_rate.to_string(),
                    ranking: ranking_label(&c.ranking),
                    reconstruction: c.reconstruction.name().into(),
                })
                .or_default()
                .push(t);
        }
        let series = groups
            .into_iter()
            .map(|(k, ts)| {
                let len = ts.iter().map(|t| t.accuracy.len()).min().unwrap_or(0);
                let points = (0..len)
                    .map(|i| {
                        let vals: Vec<f64> = ts.iter().map(|t| t.accuracy[i]).collect();
                        SeriesPoint {
                            flip_index: i,
                            mean: vals.iter().sum::<f64>() / vals.len() as f64,
                            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                            runs: vals.len(),
                        }
                    })
                    .collect();
                (k, points)
            })
            .collect();
        Self { traces, series }
    }

    /// `nq,rp,seed,ranking,recon,flip_index,accuracy`, one row per trace point.
    pub fn results_csv(&self) -> String {
        let mut s = String::from("nq,rp,seed,ranking,recon,flip_index,accuracy\n");
        for t in &self.traces {
            let c = &t.config;
            for (i, a) in t.accuracy.iter().enumerate() {
                writeln!(
                    s,
                    "{},{},{},{},{},{i},{a}",
                    c.bit_width,
                    c.recovery_rate,
                    c.seed,
                    ranking_label(&c.ranking),
                    c.reconstruction
                )
                .unwrap();
            }
        }
        s
    }

    /// Mean and min/max envelope across seeds at every flip index.
    pub fn series_csv(&self) -> String {
        let mut s = String::from("nq,rp,ranking,recon,flip_index,mean_accuracy,min_accuracy,max_accuracy,runs\n");
        for (k, pts) in &self.series {
            for p in pts {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    k.bit_width,
                    k.recovery_rate,
                    k.ranking,
                    k.reconstruction,
                    p.flip_index,
                    p.mean,
                    p.min,
                    p.max,
                    p.runs
                )
                .unwrap();
            }
        }
        s
    }

    /// The series restricted to the flip counts in [`SUMMARY_FLIPS`].
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("nq,rp,ranking,recon,flips,mean_accuracy,min_accuracy,max_accuracy,runs\n");
        for (k, pts) in &self.series {
            for p in pts.iter().filter(|p| SUMMARY_FLIPS.contains(&p.flip_index)) {
                writeln!(
                    s,
                    "{},{},{},{},{},{:.4},{:.4},{:.4},{}",
                    k.bit_width,
                    k.recovery_rate,
                    k.ranking,
                    k.reconstruction,
                    p.flip_index,
                    p.mean,
                    p.min,
                    p.max,
                    p.runs
                )
                .unwrap();
            }
        }
        s
    }

    /// Writes `traces/<run id>.trace` for every run plus the three CSV files.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let traces = dir.join(TRACE_DIR);
        fs::create_dir_all(&traces)?;
        for t in &self.traces {
            fs::write(traces.join(format!("{}.trace", run_id(&t.config))), t.to_text())?;
        }
        self.write_reports(dir)
    }

    pub fn write_reports(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(RESULTS_CSV), self.results_csv())?;
        fs::write(dir.join(SERIES_CSV), self.series_csv())?;
        fs::write(dir.join(SUMMARY_CSV), self.summary_csv())?;
        Ok(())
    }
}

/// Runs every configuration on `jobs` worker threads. Results do not depend on `jobs`.
pub fn run_sweep<T: Scalar>(
    cfg: &ExperimentConfig,
    victim: &FloatModel<T>,
    eval: &Dataset<T>,
    jobs: usize,
) -> Result<SweepResult> {
    let quantized: BTreeMap<u8, QuantModel<T>> = cfg
        .bit_widths
        .iter()
        .map(|&w| Ok((w.bits(), QuantModel::quantize(victim, w)?)))
        .collect::<Result<_>>()?;
    let runs = cfg.runs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    let traces = pool.install(|| {
        runs.par_iter()
            .map(|r| {
                run_attack(
                    &quantized[&r.bit_width],
                    r.recovery_rate,
                    r.seed,
                    r.ranking,
                    r.reconstruction,
                    r.n_bf,
                    eval,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult::from_traces(traces))
}

/// Reads every `*.trace` file under `dir/traces`.
pub fn load_traces(dir: &Path) -> Result<Vec<AttackTrace>> {
    let tdir = dir.join(TRACE_DIR);
    let mut paths: Vec<_> = fs::read_dir(&tdir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "trace"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            AttackTrace::from_text(&fs::read_to_string(p)?).map_err(|e| match e {
                Error::Parse { location, message } => Error::Parse {
                    location: format!("{}: {location}", p.display()),
                    message,
                },
                other => other,
            })
        })
        .collect()
}

/// Rebuilds the CSV reports from the traces stored in `dir`.
pub fn report(dir: &Path) -> Result<SweepResult> {
    let traces = load_traces(dir)?;
    if traces.is_empty() {
        return Err(Error::invalid(format!(
            "no traces found in {}",
            dir.join(TRACE_DIR).display()
        )));
    }
    let result = SweepResult::from_traces(traces);
    result.write_reports(dir)?;
    Ok(result)
}
