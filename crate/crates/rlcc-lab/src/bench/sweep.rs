//! (target, beta) grid sweep: each point trains a fresh policy and reports
//! its bandwidth/latency trade-off.

use rayon::prelude::*;

use crate::bench::{run_benchmark, ControllerSetup};
use crate::error::{Error, Result};
use crate::policy::RewardParams;
use crate::sim::{ScenarioSpec, SimConfig};
use crate::train::{train, TrainConfig};

/// Grid point below this goodput is flagged as a failure mode (the agent
/// collapses instead of trading latency for bandwidth).
pub const FAILURE_GOODPUT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub target: f64,
    pub beta: f64,
    pub goodput: f64,
    pub mean_latency_us: f64,
    pub failed: bool,
}

pub const SWEEP_CSV_HEADER: &str = "target,beta,goodput,mean_latency_us,failed";

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.target, p.beta, p.goodput, p.mean_latency_us, p.failed
        ));
    }
    out
}

/// Thread cap for sweep parallelism, from `RLCC_LAB_THREADS` when set.
pub fn sweep_threads() -> Option<usize> {
    std::env::var("RLCC_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
}

/// Trains a fresh policy per grid point and evaluates it on `eval_spec`.
/// Points run in parallel; the output is sorted by (target, beta) so
/// aggregation is order-independent.
pub fn parameter_sweep(
    targets: &[f64],
    betas: &[f64],
    train_template: &TrainConfig,
    eval_spec: &ScenarioSpec,
    cfg: &SimConfig,
) -> Result<Vec<SweepPoint>> {
    let mut grid = Vec::new();
    for &target in targets {
        for &beta in betas {
            grid.push((target, beta));
        }
    }
    let run_point = |&(target, beta): &(f64, f64)| -> Result<SweepPoint> {
        let params = RewardParams::new(target, beta)?;
        let tc = TrainConfig { params, ..train_template.clone() };
        let outcome = train(&tc, cfg)?;
        let setup = ControllerSetup::rlcc_mlp(outcome.policy, params);
        let report = run_benchmark(eval_spec, &setup, cfg)?;
        Ok(SweepPoint {
            target,
            beta,
            goodput: report.normalized_goodput,
            mean_latency_us: report.mean_latency_us,
            failed: report.normalized_goodput < FAILURE_GOODPUT,
        })
    };

    let results: Vec<Result<SweepPoint>> = match sweep_threads() {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
            pool.install(|| grid.par_iter().map(run_point).collect())
        }
        None => grid.par_iter().map(run_point).collect(),
    };

    let mut points = results.into_iter().collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.target
            .total_cmp(&b.target)
            .then_with(|| a.beta.total_cmp(&b.beta))
    });
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_grid_is_a_single_train_and_eval() {
        let tc = TrainConfig {
            epochs: 2,
            eval_every: 0,
            episode_us: 2_000.0,
            curriculum: vec![ScenarioSpec::many_to_one(4, 1)],
            ..TrainConfig::default()
        };
        let eval = ScenarioSpec::many_to_one(4, 1).with_horizon(5_000.0, 1_000.0);
        let cfg = SimConfig::default();
        let points = parameter_sweep(&[0.064], &[1.5], &tc, &eval, &cfg).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].target, 0.064);
        assert_eq!(points[0].beta, 1.5);
    }
}
