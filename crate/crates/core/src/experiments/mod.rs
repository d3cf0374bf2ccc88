//! Config-driven runs, sweeps, verification and weak-strong studies with artifact output.

mod artifacts;
mod config;
mod initial;
mod run;

pub use artifacts::{fmt_f64, relative_energy_csv, trajectory_csv};
pub use config::*;
pub use initial::{initial_data, InitialData};
pub use run::*;
