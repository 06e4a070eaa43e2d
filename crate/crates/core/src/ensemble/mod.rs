//! Disorder-averaged experiments, statistics, fits and persistence.

pub mod config;
pub mod fit;
pub mod io;
pub mod run;
pub mod stats;
pub mod tint;

pub use config::{Engine, ExperimentConfig, Observable, Spacing, System, TimeGrid};
pub use fit::{fit_exponential, fit_offset_power, fit_power_law, FitModel, FitResult, OffsetPowerFit};
pub use run::{aggregate, run_experiment, run_realizations, ObservableSeries, PairSeries, RunRecord};
pub use stats::variance_of_aggregate;
pub use tint::{extract_t_int, interaction_time_scan, TintScan};
