//! Experiment orchestration: configs, sweeps, reports and self checks.

mod config;
mod sweep;
pub mod verify;

pub use config::{run_id, ExperimentConfig, RankingChoice};
pub use sweep::{
    load_traces, ranking_label, report, run_sweep, GroupKey, SeriesPoint, SweepResult, RESULTS_CSV, SERIES_CSV,
    SUMMARY_CSV, SUMMARY_FLIPS, TRACE_DIR,
};
