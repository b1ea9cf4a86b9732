//! Simplified DCQCN and Swift comparison baselines, plus reference
//! controllers used by tests and oracles.

mod dcqcn;
mod ecn;
mod reference;
mod swift;

pub use dcqcn::{DcqcnConfig, DcqcnController, IncreaseStage};
pub use ecn::EcnMarker;
pub use reference::{FixedPointOracle, FixedRateController, GreedyController};
pub use swift::{SwiftConfig, SwiftController};
