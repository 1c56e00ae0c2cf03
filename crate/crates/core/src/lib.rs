//! Non-alternating Bregman proximal gradient solvers for matrix
//! factorization, with closed-form subproblem updates, alternating
//! baselines, and numerical verification oracles.

pub mod data;
pub mod error;
pub mod kernel;
pub mod matrix;
pub mod optimize;
pub mod problem;
pub mod prox;
pub mod rng;
pub mod svd;
pub mod verify;

pub use error::{Error, Result};
