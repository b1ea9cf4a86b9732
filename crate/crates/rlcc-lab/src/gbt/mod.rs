//! Gradient-boosted regression trees: the distilled student policy.

mod dataset;
mod export;
mod fidelity;
mod fit;
mod tree;

pub use dataset::{collect_traces, TraceDataset};
pub use export::{export_tree_source, ExportedSource};
pub use fidelity::{fidelity_report, FidelityReport, ScenarioFidelity};
pub use fit::{fit_gbt, rmse_on, FitConfig};
pub use tree::{RegressionTree, TreeEnsemble, TreeNode};

/// Hard budget on worst-case operations per inference, emulating NIC
/// firmware limits.
pub const OP_BUDGET: usize = 150;
/// Default boosting rounds.
pub const DEFAULT_ROUNDS: usize = 10;
/// Default maximum tree depth.
pub const DEFAULT_MAX_DEPTH: usize = 4;
