//! Simulation and metrology analysis of coupled-mode non-Hermitian
//! topological sensors.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod metrology;
pub mod model;
pub mod scattering;

pub use error::{Error, Result};
