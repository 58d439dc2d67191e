//! Byzantine-resilient decentralized learning simulator.
//!
//! Nodes on a communication graph jointly minimize an empirical risk by
//! exchanging iterates each round. Honest nodes run decentralized gradient
//! descent with an optional coordinate-wise trimmed-mean screen that tolerates
//! up to `b` Byzantine neighbors; Byzantine nodes broadcast whatever their
//! configured strategy dictates. Everything is deterministic given a master
//! seed.

pub mod adversary;
pub mod aggregation;
pub mod engine;
pub mod error;
pub mod objective;
pub mod protocol;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
