//! Experiment harness: config files, runners and CSV result tables.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::{Experiment, ExperimentConfig, EXPERIMENTS};
pub use experiments::{
    run_convergence, run_digital_errors, run_experiment, run_sweep, run_variance_scaling,
    ConvergenceResult, DigitalErrorsResult, SweepResult, VarianceScalingResult,
};
pub use table::{strip_wall_clock, ResultTable};
