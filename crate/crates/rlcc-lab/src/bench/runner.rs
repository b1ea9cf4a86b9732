//! Scenario runner: binds a controller family to a scenario and executes it.

use crate::baselines::{
    DcqcnConfig, DcqcnController, EcnMarker, FixedPointOracle, FixedRateController,
    SwiftConfig, SwiftController,
};
use crate::bench::{report_from_engine, MetricsReport};
use crate::error::Result;
use crate::gbt::TreeEnsemble;
use crate::policy::{
    NoSink, PolicyCheckpoint, PolicyModel, RewardParams, RlccController, RlccShared,
};
use crate::sim::{build_scenario, Engine, ScenarioKind, ScenarioSpec, SimConfig};

/// RED-style marking thresholds for the DCQCN baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EcnParams {
    pub k_min_bits: f64,
    pub k_max_bits: f64,
    pub p_max: f64,
}

impl Default for EcnParams {
    fn default() -> Self {
        EcnParams {
            k_min_bits: 100e3,
            k_max_bits: 400e3,
            p_max: 0.01,
        }
    }
}

/// A controller family plus its parameters, ready to be instantiated per
/// flow.
#[derive(Debug, Clone)]
pub enum ControllerSetup {
    Dcqcn { dcqcn: DcqcnConfig, ecn: EcnParams },
    Swift(SwiftConfig),
    RlccMlp { ckpt: PolicyCheckpoint, params: RewardParams },
    RlccTree {
        ensemble: TreeEnsemble,
        /// Clamp bounds and window length are shared with the teacher.
        ckpt_like: PolicyCheckpoint,
        params: RewardParams,
    },
    FixedRate(f64),
    /// Fair-share oracle steering the queue to the reward's fixed point.
    FixedPoint(RewardParams),
}

impl ControllerSetup {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSetup::Dcqcn { .. } => "dcqcn",
            ControllerSetup::Swift(_) => "swift",
            ControllerSetup::RlccMlp { .. } => "rlcc-mlp",
            ControllerSetup::RlccTree { .. } => "rlcc-tree",
            ControllerSetup::FixedRate(_) => "fixed",
            ControllerSetup::FixedPoint(_) => "oracle",
        }
    }

    pub fn rlcc_mlp(ckpt: PolicyCheckpoint, params: RewardParams) -> Self {
        ControllerSetup::RlccMlp { ckpt, params }
    }

    pub fn rlcc_tree(ensemble: TreeEnsemble, teacher: &PolicyCheckpoint, params: RewardParams) -> Self {
        ControllerSetup::RlccTree {
            ensemble,
            ckpt_like: teacher.clone(),
            params,
        }
    }
}

/// Flows sharing one congested port under this scenario.
fn flows_per_port(spec: &ScenarioSpec) -> usize {
    match spec.kind {
        ScenarioKind::ManyToOne => spec.hosts * spec.flows_per_host,
        ScenarioKind::AllToAll => (spec.hosts - 1) * spec.flows_per_host,
        ScenarioKind::LongShort => spec.n_long + spec.n_short,
    }
}

/// Builds the engine for (scenario, controller) and runs it to the scenario
/// horizon. The engine is returned so callers can inspect flows and traces.
pub fn run_scenario(
    spec: &ScenarioSpec,
    setup: &ControllerSetup,
    cfg: &SimConfig,
) -> Result<Engine> {
    let mut engine = match setup {
        ControllerSetup::Dcqcn { dcqcn, ecn } => {
            let initial = cfg.initial_rate();
            let mut engine = build_scenario(spec, cfg, &mut |_| {
                Box::new(DcqcnController::new(dcqcn.clone(), initial))
            })?;
            engine.set_ecn(EcnMarker::new(ecn.k_min_bits, ecn.k_max_bits, ecn.p_max, cfg.seed)?);
            engine
        }
        ControllerSetup::Swift(swift) => {
            let initial = cfg.initial_rate();
            build_scenario(spec, cfg, &mut |_| {
                Box::new(SwiftController::new(swift.clone(), initial))
            })?
        }
        ControllerSetup::RlccMlp { ckpt, params } => {
            let shared = RlccShared::new(PolicyModel::Mlp(ckpt.mlp.clone()), ckpt.mapper, NoSink);
            let window = ckpt.window_len;
            let params = *params;
            build_scenario(spec, cfg, &mut |_| {
                Box::new(RlccController::new(shared.clone(), params, window))
            })?
        }
        ControllerSetup::RlccTree { ensemble, ckpt_like, params } => {
            let shared = RlccShared::new(
                PolicyModel::Tree(ensemble.clone()),
                ckpt_like.mapper,
                NoSink,
            );
            let window = ckpt_like.window_len;
            let params = *params;
            build_scenario(spec, cfg, &mut |_| {
                Box::new(RlccController::new(shared.clone(), params, window))
            })?
        }
        ControllerSetup::FixedRate(rate) => {
            let rate = *rate;
            build_scenario(spec, cfg, &mut |_| Box::new(FixedRateController::new(rate)))?
        }
        ControllerSetup::FixedPoint(params) => {
            let n = flows_per_port(spec);
            let params = *params;
            build_scenario(spec, cfg, &mut |_| {
                Box::new(FixedPointOracle::new(params, n, cfg))
            })?
        }
    };
    engine.run(spec.duration_us)?;
    Ok(engine)
}

/// Runs the scenario and reduces it to the standard metrics report.
pub fn run_benchmark(
    spec: &ScenarioSpec,
    setup: &ControllerSetup,
    cfg: &SimConfig,
) -> Result<MetricsReport> {
    let engine = run_scenario(spec, setup, cfg)?;
    report_from_engine(&engine, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_hits_predicted_inflation() {
        let params = RewardParams::default();
        let spec = ScenarioSpec::many_to_one(64, 1).with_horizon(60_000.0, 30_000.0);
        let cfg = SimConfig::default();
        let report = run_benchmark(&spec, &ControllerSetup::FixedPoint(params), &cfg).unwrap();
        // Eq-2 fixed point at N=64: 0.064 * 8 + 1.5.
        let predicted = params.predicted_inflation(64);
        let rel = (report.steady_state_inflation - predicted).abs() / predicted;
        assert!(rel < 0.02, "inflation {} vs {predicted}", report.steady_state_inflation);
        assert!(report.normalized_goodput > 0.95);
        assert!(report.jain_fairness > 0.999);
    }

    #[test]
    fn oracle_single_flow_matches_small_n_prediction() {
        let params = RewardParams::default();
        let spec = ScenarioSpec::many_to_one(1, 1).with_horizon(60_000.0, 30_000.0);
        let cfg = SimConfig::default();
        let report = run_benchmark(&spec, &ControllerSetup::FixedPoint(params), &cfg).unwrap();
        let predicted = params.predicted_inflation(1); // 1.564
        let rel = (report.steady_state_inflation - predicted).abs() / predicted;
        assert!(rel < 0.02, "inflation {}", report.steady_state_inflation);
    }

    #[test]
    fn swift_controls_a_small_incast() {
        let spec = ScenarioSpec::many_to_one(8, 1).with_horizon(50_000.0, 10_000.0);
        let cfg = SimConfig::default();
        let report = run_benchmark(
            &spec,
            &ControllerSetup::Swift(SwiftConfig::default()),
            &cfg,
        )
        .unwrap();
        assert!(report.normalized_goodput > 0.8, "goodput {}", report.normalized_goodput);
        assert_eq!(report.drops_per_flow, 0.0);
    }

    #[test]
    fn dcqcn_controls_a_small_incast() {
        let spec = ScenarioSpec::many_to_one(8, 1).with_horizon(50_000.0, 10_000.0);
        let cfg = SimConfig::default();
        let report = run_benchmark(
            &spec,
            &ControllerSetup::Dcqcn {
                dcqcn: DcqcnConfig::default(),
                ecn: EcnParams::default(),
            },
            &cfg,
        )
        .unwrap();
        assert!(report.normalized_goodput > 0.8, "goodput {}", report.normalized_goodput);
        assert_eq!(report.drops_per_flow, 0.0, "drops {}", report.drops_per_flow);
    }
}
