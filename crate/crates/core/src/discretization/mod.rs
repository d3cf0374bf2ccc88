//! Grids, quadrature, test functions and solution trajectories.

mod basis;
mod grid;
mod trajectory;

pub use basis::{
    discrete_divergence, test_function_basis, Profile, TestBasis, TestFunction, TimeWindow, DEFAULT_K_SPACE,
    DEFAULT_K_TIME,
};
pub use grid::{build_grid, build_partition, BoundaryCondition, Face, Grid, Neighbor};
pub use trajectory::{FieldTrajectory, ModelTag};
