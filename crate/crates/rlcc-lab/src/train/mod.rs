//! On-policy training loop: rollouts in simulation, delta-weighted policy
//! gradient, plain ascent updates.

mod gradient;
mod run;

pub use gradient::{
    accumulate_gradient, apply_update, surrogate_objective, GradientWeighting, RolloutBuffer,
    Transition,
};
pub use run::{
    default_curriculum, evaluate_policy, train, EpochLog, EvalReport, StatsSink, StopReason,
    TrainConfig, TrainOutcome, TrainSink, TRAIN_LOG_CSV_HEADER,
};
