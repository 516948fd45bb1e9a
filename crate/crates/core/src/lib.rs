//! Calmness certificates, Lipschitz error-bound estimates and exact DC
//! penalty solvers for composite rank constraint sets Ω ∩ {rank ≤ r}.

pub mod calmness;
pub mod cli;
pub mod config;
pub mod error;
pub mod graph;
mod linalg;
pub mod lp;
pub mod matrix;
pub mod penalty;
pub mod rng;
pub mod sets;
pub mod spectral;
pub mod suite;
pub mod surrogate;

pub use error::{Error, Result};
pub use matrix::Matrix;
