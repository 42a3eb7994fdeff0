//! Isocapacitary well-posedness criteria for p-Laplace Neumann problems,
//! rearrangement-based a-priori bounds, and an exact weighted
//! one-dimensional Neumann oracle to check them against.

pub mod bounds;
pub mod cli;
pub mod criteria;
pub mod domains;
pub mod error;
pub mod numerics;
pub mod rearrange;
pub mod solver;

pub use error::{Error, Result};
