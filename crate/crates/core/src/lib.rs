//! Blocking probabilities of two data centers with trunk reservation.
//!
//! The limiting idle-server process is a random walk in the quarter plane.
//! Its generating functions are obtained from boundary value problems on the
//! cuts of the kernel, and a truncated Markov chain solver serves as an
//! independent numerical reference.

pub mod boundary;
pub mod error;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use model::{BlockingPair, Model, ModelConfig, ModelParams};
pub use quadrature::QuadConfig;
pub use solver::{blocking, BlockingReport};
