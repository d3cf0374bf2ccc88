//! Numerical toolkit for dissipative measure-valued solutions of the complete
//! Euler system: thermodynamics, vanishing-dissipation solvers, Young-measure
//! assembly, a weak-formulation verifier and relative-energy diagnostics.

pub mod brenner;
pub mod discretization;
pub mod error;
pub mod euler;
pub mod experiments;
pub mod ns_entropy;
pub mod relative_energy;
pub mod thermo;
pub mod verifier;
pub mod young_measure;

pub use error::{Error, Result};
