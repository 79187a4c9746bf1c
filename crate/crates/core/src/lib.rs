//! Geometric phases of a three-level atom steered through its decoherence-free
//! subspace by an engineered cavity reservoir.

pub mod analytic;
pub mod cavity;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod numlin;
pub mod ramsey;
pub mod report;
pub mod tol;

pub use error::{Error, Result};
