//! Experiment configuration, sample runner, CSV reporting and the
//! validation suites exposed by the command-line tool.

pub mod checks;
pub mod config;
pub mod report;
pub mod runner;
pub mod selftest;
pub mod validate;

pub use config::{DesignKind, EnsembleConfig, ExperimentConfig, Placement, MAX_QUBITS, MIN_QUBITS};
pub use report::{
    combined_stderr, emit_csv, emit_layer_csv, fit_log2_slope, fit_slope, write_csv, write_layer_csv, ExperimentRow,
    LayerRow, SlopeFit, CSV_HEADER,
};
pub use runner::{
    layer_seed, run_layer_sweep, run_layer_sweep_with_threads, run_scaling, run_scaling_with_threads, task_observable,
    threads_from_env, THREADS_ENV,
};
pub use selftest::{selftest, CheckOutcome};
pub use validate::{haar_suite, HaarCheck, HaarSuite, HaarSuiteConfig, HAAR_SIGMAS};
