//! Minimal-dissipation low-dispersion implicit Runge-Kutta schemes: tableau registry,
//! spectral analysis, parameter optimization, spatial operators and benchmark problems.

pub mod butcher;
pub mod dd;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod problems;
pub mod quadrature;
pub mod spatial;
pub mod spectral;
pub mod timeloop;

pub use error::{Error, Result};
