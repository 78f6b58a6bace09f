//! Exact and numeric analysis of PT-symmetric tridiagonal chain
//! Hamiltonians.

pub mod chain;
pub mod cli;
pub mod domain;
pub mod eep;
pub mod error;
pub mod exactpoly;
pub mod metric;

pub use error::{Error, Result};
