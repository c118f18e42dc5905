//! Experiment harness for the `tailcs` solvers: configuration files,
//! seeded parallel sweeps and their CSV/JSON outputs.

pub mod config;
pub mod experiments;
pub mod records;
pub mod solvers;

pub use config::{
    ExperimentConfig, ExperimentKind, GridPoint, SolverName, SolverParams, SolverSpec,
};
pub use experiments::{
    run_convergence_trace, run_rip_curve, run_sweep, run_timing, trial_seed, RunOptions,
};
pub use records::TrialRecord;
