//! Moment varieties of Gaussian mixtures: exact moment and cumulant
//! computations, determinantal membership tests, secant dimensions by
//! prime-field Jacobian rank, and exact parameter recovery for two-component
//! mixtures.

pub mod cli;
pub mod determinantal;
pub mod linalg;
pub mod moments;
pub mod polyring;
pub mod recovery;
pub mod secant;
