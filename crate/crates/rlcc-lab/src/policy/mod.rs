//! Rate-control agent: observation window, reward machinery, the
//! sliding-window MLP, and the output-to-multiplier action mapping.

mod action;
mod checkpoint;
pub mod controller;
mod mlp;
mod reward;
mod window;

pub use action::{ActionMapper, DEFAULT_MAX_MULTIPLIER, DEFAULT_MIN_MULTIPLIER};
pub use checkpoint::PolicyCheckpoint;
pub use controller::{DecisionSink, NoSink, RlccController, RlccShared};
pub use mlp::MlpPolicy;
pub use reward::RewardParams;
pub use window::ObservationWindow;

use crate::gbt::TreeEnsemble;

/// Default sliding-window length (pairs of `(delta, action)`).
pub const DEFAULT_WINDOW_LEN: usize = 5;
/// Default hidden width of the MLP policy.
pub const DEFAULT_HIDDEN_DIM: usize = 16;

/// Either representation of the rate-control policy: the MLP teacher or the
/// distilled tree-ensemble student. Both map a flattened observation window
/// to a raw output in log-multiplier space.
#[derive(Debug, Clone)]
pub enum PolicyModel {
    Mlp(MlpPolicy),
    Tree(TreeEnsemble),
}

impl PolicyModel {
    pub fn raw_output(&self, features: &[f64]) -> f64 {
        match self {
            PolicyModel::Mlp(mlp) => mlp.forward(features),
            PolicyModel::Tree(ens) => ens.predict(features),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            PolicyModel::Mlp(mlp) => mlp.input_dim(),
            PolicyModel::Tree(ens) => ens.input_dim(),
        }
    }
}
