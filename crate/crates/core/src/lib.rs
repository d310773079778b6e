//! Truncated generalized coherent states of the harmonic oscillator.

pub mod error;
pub mod gseq;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub mod completeness;
pub mod statistics;
pub mod states;
pub mod sampler;
pub mod zeros;
pub mod cli;
