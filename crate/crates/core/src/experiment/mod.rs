//! Config-driven experiment harness.
//!
//! A flat TOML file describes one sweep: model, methods, delay-block counts,
//! integration grid, initial data and gains. [`run_experiment`] expands it
//! into one run per (method, r), simulates the runs concurrently and writes
//! everything into an output directory:
//!
//! ```text
//! config.toml         resolved copy of the configuration
//! trace_<label>.csv   one per run (label = chen, proposed-r1, ...)
//! runs.csv            manifest of runs and their trace files
//! thresholds.txt      time-to-threshold table, aligned text
//! thresholds.csv      the same table in long format
//! summary.csv         final errors, CoV and median λ_min(G*) per run
//! ```
//!
//! Artifacts are deterministic: re-running a config reproduces every file
//! byte for byte, whatever the worker count. Two complete configurations
//! ship with the library ([`bundled_names`]) and load by plain name.

mod config;
mod plotdata;
mod runner;

pub use config::{bundled_names, load_config, ExperimentConfig, GainSpec, RunPlan};
pub use plotdata::{plot_data, PlotQuantity};
pub use runner::{
    band_half_width, load_dir_config, load_dir_traces, recompute_report, run_experiment,
    ExperimentOutcome, LabeledTraces, RunSummary,
};
