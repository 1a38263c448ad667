//! Experiment runner around `disc-core`: multi-restart reports, scaling
//! benchmarks, the random-relationship baseline and artifact export.

pub mod config;
pub mod experiment;
pub mod motivate;
pub mod scaling;

use std::io::Write;

use disc_core::DiscModel;

pub use config::{DataSource, ExperimentConfig};
pub use experiment::{
    build_report, fit_one, run_experiment, run_on_dataset, run_restarts, write_artifacts,
    Aggregates, Report, Restart, RestartRecord, Summary, ARTIFACT_VERSION,
};
pub use motivate::{
    cluster_with_matrices, median, motivation_experiment, random_relationship_baseline,
    write_motivation_csv, Strategy, StrategyMatrices, StrategyResult,
};
pub use scaling::{log_log_slope, scaling_benchmark, Axis, ScalingConfig, ScalingTable, TimingRow};

/// Writes the fitted model's trace as `outer,inner,z,tree_updated` rows.
pub fn convergence_trace_export<W: Write>(model: &DiscModel, out: W) -> std::io::Result<()> {
    model.write_trace_csv(out)
}
