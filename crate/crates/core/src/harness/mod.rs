//! Experiment plumbing: config parsing, seed fan-out, CSV and JSON-lines
//! output, variant comparisons, standalone estimation and the self-test suite.

mod config;
mod estimate;
mod experiment;
mod output;
mod selftest;

pub use config::{ExperimentConfig, VariantConfig, OUTPUT_ROOT_ENV};
pub use estimate::{estimate_files, read_points_csv, EstimateReport};
pub use experiment::{
    compare_variants, run_experiment, run_file_name, run_record_header, ComparisonReport, ExperimentReport, SeedOutcome,
    VariantSummary,
};
pub use output::{
    final_return, mean_std, metric, read_run_csv, summarize, write_run_csv, write_summary_csv, EventLog, SummaryRow,
    SUMMARY_METRICS,
};
pub use selftest::{brute_force_gae, correction_by_recurrence, naive_divergence, run_selftest, CheckResult};
