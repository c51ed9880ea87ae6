//! Homogenization of reaction-diffusion problems in periodically perforated
//! domains with dynamical surface-diffusive boundary conditions.

pub mod csv;
pub mod eps;
pub mod error;
pub mod fem;
pub mod field;
pub mod homogenize;
pub mod initial;
pub mod limit;
pub mod mesh;
pub mod nonlinearity;
pub mod oracles;
pub mod study;

pub use error::{Error, Result};
