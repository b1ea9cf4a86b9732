//! Decision-latency ablation and cross-controller drop comparison.

use crate::bench::{run_benchmark, ControllerSetup};
use crate::error::Result;
use crate::sim::{ScenarioSpec, SimConfig};

/// Inference costs emulated in the latency ablation, in microseconds: the
/// tree student, the sliding-window MLP, and the original recurrent policy.
pub const ABLATION_LATENCIES_US: [f64; 3] = [0.9, 17.0, 450.0];

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub model: String,
    pub decision_latency_us: f64,
    pub scenario: String,
    pub goodput: f64,
    pub drops_per_flow: f64,
}

pub const ABLATION_CSV_HEADER: &str = "model,decision_latency_us,scenario,goodput,drops_per_flow";

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(ABLATION_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.model, r.decision_latency_us, r.scenario, r.goodput, r.drops_per_flow
        ));
    }
    out
}

/// Runs every (model, latency, scenario) combination; identical inputs give
/// identical rows.
pub fn latency_ablation(
    models: &[(&str, ControllerSetup)],
    latencies_us: &[f64],
    specs: &[ScenarioSpec],
    cfg: &SimConfig,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for (name, setup) in models {
        for &latency in latencies_us {
            for spec in specs {
                let run_cfg = SimConfig {
                    decision_latency_us: latency,
                    ..cfg.clone()
                };
                let report = run_benchmark(spec, setup, &run_cfg)?;
                rows.push(AblationRow {
                    model: name.to_string(),
                    decision_latency_us: latency,
                    scenario: spec.label(),
                    goodput: report.normalized_goodput,
                    drops_per_flow: report.drops_per_flow,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropsRow {
    pub scenario: String,
    pub controller: String,
    pub drops_per_flow: f64,
}

pub const DROPS_CSV_HEADER: &str = "scenario,controller,drops_per_flow";

pub fn drops_csv(rows: &[DropsRow]) -> String {
    let mut out = String::from(DROPS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.scenario, r.controller, r.drops_per_flow));
    }
    out
}

/// Post-warmup drops per flow for every (controller, scenario) pair.
pub fn drops_table(
    controllers: &[(&str, ControllerSetup)],
    specs: &[ScenarioSpec],
    cfg: &SimConfig,
) -> Result<Vec<DropsRow>> {
    let mut rows = Vec::new();
    for spec in specs {
        for (name, setup) in controllers {
            let report = run_benchmark(spec, setup, cfg)?;
            rows.push(DropsRow {
                scenario: spec.label(),
                controller: name.to_string(),
                drops_per_flow: report.drops_per_flow,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_scenario_reports_zero_drops_everywhere() {
        let specs = vec![ScenarioSpec::many_to_one(4, 1).with_horizon(5_000.0, 1_000.0)];
        let cfg = SimConfig::default();
        let controllers = vec![
            ("fixed-low", ControllerSetup::FixedRate(1.0)),
            ("fixed-mid", ControllerSetup::FixedRate(10.0)),
        ];
        let rows = drops_table(&controllers, &specs, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.drops_per_flow, 0.0);
        }
    }

    #[test]
    fn identical_inputs_give_identical_reports() {
        let specs = vec![ScenarioSpec::many_to_one(8, 1).with_horizon(5_000.0, 1_000.0)];
        let cfg = SimConfig::default();
        let models = vec![("swift", ControllerSetup::Swift(Default::default()))];
        let a = latency_ablation(&models, &[0.9, 17.0], &specs, &cfg).unwrap();
        let b = latency_ablation(&models, &[0.9, 17.0], &specs, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
