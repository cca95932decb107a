//! Realization of linear quantum filters from transfer matrices.
//!
//! The pipeline runs rational transfer matrix -> minimal state space ->
//! physically realizable state space -> generalized open oscillator ->
//! optical hardware parameters, with frequency-domain simulation of the
//! resulting two-mode filter including optical loss.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod oscillator;
pub mod pipeline;
pub mod realizability;
pub mod statespace;
pub mod synthesis;
pub mod tfio;
pub mod tolerance;

pub use error::{Error, Result};
