//! Experiment configuration, drivers, result tables and the command line.

pub mod cli;
mod config;
mod experiments;
mod matching;
mod table;

pub use config::{ChannelConfig, ChannelMethod, ExperimentConfig, ExperimentOptions};
pub use experiments::{
    crb_table, noise_variance, qam4, qam4_decide, run_experiment_a, run_experiment_b, run_experiment_c,
    ExperimentA, ExperimentB, ExperimentC, MethodPoint, SeparationPoint, SerPoint, ToaPoint,
    COMPARISON_CADZOW_ITERS,
};
pub use matching::{circular_distance, match_toas, ToaMatching};
pub use table::{fmt_f64, read_csv, OutputFormat, Table, SCHEMA_VERSION};
