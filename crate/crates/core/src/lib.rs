//! Numerical laboratory for spiked tensor PCA, non-Gaussian component
//! analysis and multi-view CCA under memory and communication constraints.
//!
//! The crate is organised bottom-up:
//!
//! * [`hermite`] orthonormal Hermite polynomials and Gaussian quadrature
//! * [`tensor`] dense order-k tensors, contraction and matricization
//! * [`linalg`] small dense matrices and power iteration
//! * [`models`] samplers, non-Gaussian measures and reductions
//! * [`estimators`] spectral, power-method and brute-force estimators
//! * [`harness`] memory-bounded and blackboard execution models
//! * [`verify`] exact enumeration oracles for moment and norm identities

pub mod error;
pub mod estimators;
pub mod harness;
pub mod hermite;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
