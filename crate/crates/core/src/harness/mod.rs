//! Experiment configuration, orchestration and CSV emission.

mod config;
mod run;
mod table;

pub use config::{ExperimentConfig, Overrides, SplitConfig, StopwordSource};
pub use run::{derive_seed, fold_tasks, render_outputs, run_corpus, run_experiment, sanitize, write_outputs, ExperimentReport, TaskRun};
pub use table::{emit_table, lower_is_better, ResultsTable, TableRow, STAT_NAMES};
