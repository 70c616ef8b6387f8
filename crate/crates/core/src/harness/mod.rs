//! Configuration, experiment orchestration, persistence and the command line.
//!
//! A run directory holds `config.toml`, `series.csv` (one [`EnergyReport`] per sample),
//! `record.json` and `checkpoint_XXXXX.vlck` files. Sweeps write `sweep.csv`/`sweep.json`,
//! convergence studies `orders.csv`/`orders.json`.
//!
//! [`EnergyReport`]: crate::diagnostics::EnergyReport

pub mod cli;
mod config;
mod converge;
mod families;
mod run;
mod sweep;

pub use config::{
    ConvergenceProblem, ExperimentConfig, Family, InitialConfig, LambdaChoice, RunConfig, SweepConfig,
    CONFIG_VERSION,
};
pub use converge::{run_convergence, LevelError, OrderRow, OrdersTable, ASYMPTOTIC_ORDER, MMS};
pub use families::initial_perturbation;
pub use run::{
    column, evolve, fit_columns, prepare, report, run_single, sample_times, series_of, NamedFit, Prepared, Report,
    RunRecord, CONFIG_FILE, FITTED_COLUMNS, RECORD_FILE, SERIES_FILE,
};
pub use sweep::{run_mach_sweep, SweepReport, SweepRow};
