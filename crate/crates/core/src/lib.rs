//! Numerical laboratory for the coupled two-matrix product model.

pub mod dd;
pub mod equilibrium;
pub mod kernels;
pub mod error;
pub mod model;
pub mod poly;
pub mod quadrature;
pub mod simulator;
pub mod special;
pub mod spectral_curve;
pub mod uniformization;

pub use error::{Error, Result, Violation};
pub use model::{ModelParams, RawParams};
