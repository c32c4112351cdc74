//! Seeded experiment configurations, runners and sweeps.

mod config;
mod output;
mod presets;
mod runner;
mod seeds;
mod sweep;

pub use config::{ExperimentConfig, ModelConfig, ModelKind, ObservableChoice, Phases, TaskConfig, MAX_SIMULATED_QUBITS};
pub use output::{blp_csv, predictions_csv, records_csv, summary_csv, sweep_csv, write_run, write_sweep};
pub use presets::{preset, PRESET_NAMES};
pub use runner::{
    ahead_metric, blp_metric, build_model, estimate_runtime, run_experiment, stm_metric, summarize, BlpRow,
    ExperimentOutput, Failure, PredictionRow, RunOptions, RunRecord, SummaryRow, run_family, shares_propagators,
};
pub use seeds::{realization_seed, splitmix64, stream_seed, Stream};
pub use sweep::{linspace_step, sweep, SweepOutput, SweepRow};
