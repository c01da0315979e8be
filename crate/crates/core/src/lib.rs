//! Hyperspherical Sturmian spectral method for two-electron atoms.

pub mod angular_algebra;
pub mod assembly;
pub mod bspline;
pub mod config;
pub mod error;
pub mod hyperangular;
pub mod hyperradial;
pub mod linalg;
pub mod observables;
pub mod quadrature;
pub mod report;
pub mod runner;
pub mod solver;

pub use error::{Error, Result};
pub use faer::c64;
