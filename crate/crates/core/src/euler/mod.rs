//! Finite-volume solver for the complete Euler system and the exact Riemann oracle.

mod flux;
mod riemann;
mod solver;

pub use flux::{euler_physical_flux, max_wave_speed, mirror, rusanov_flux, Flux};
pub use riemann::{riemann_exact_1d, RiemannSolution};
pub use solver::{euler_dt, euler_rhs, run_euler, ssp_rk2_euler, step_euler, RunSettings, MAX_RETRIES};
