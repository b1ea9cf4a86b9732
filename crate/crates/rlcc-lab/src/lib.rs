//! Congestion-control laboratory: a deterministic fluid network simulator,
//! reference DCQCN/Swift controllers, a trainable rate-control policy with
//! its tree-ensemble distillation, and the benchmark suite tying them
//! together.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod gbt;
pub mod policy;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
