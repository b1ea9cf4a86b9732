//! Teacher/student fidelity: open-loop regression error on held-out data and
//! closed-loop metric deltas per scenario.

use crate::bench::{run_benchmark, ControllerSetup, MetricsReport};
use crate::error::Result;
use crate::gbt::{TraceDataset, TreeEnsemble};
use crate::policy::{PolicyCheckpoint, RewardParams};
use crate::sim::{ScenarioSpec, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFidelity {
    pub scenario: String,
    pub teacher: MetricsReport,
    pub student: MetricsReport,
    pub goodput_delta: f64,
    pub inflation_rel_delta: f64,
    pub drops_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    /// Held-out RMSE in raw-output (log-multiplier) units.
    pub heldout_rmse_raw: f64,
    /// Held-out RMSE after the action map is applied.
    pub heldout_rmse_multiplier: f64,
    pub scenarios: Vec<ScenarioFidelity>,
}

impl FidelityReport {
    pub fn max_goodput_delta(&self) -> f64 {
        self.scenarios.iter().map(|s| s.goodput_delta).fold(0.0, f64::max)
    }

    pub fn max_inflation_rel_delta(&self) -> f64 {
        self.scenarios.iter().map(|s| s.inflation_rel_delta).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "held-out RMSE: {:.6} raw, {:.6} multiplier\n",
            self.heldout_rmse_raw, self.heldout_rmse_multiplier
        );
        for s in &self.scenarios {
            out.push_str(&format!(
                "{}: goodput {:.4} vs {:.4} (|d|={:.4}), inflation {:.4} vs {:.4} ({:.2}%), drops {:.3} vs {:.3}\n",
                s.scenario,
                s.teacher.normalized_goodput,
                s.student.normalized_goodput,
                s.goodput_delta,
                s.teacher.steady_state_inflation,
                s.student.steady_state_inflation,
                100.0 * s.inflation_rel_delta,
                s.teacher.drops_per_flow,
                s.student.drops_per_flow,
            ));
        }
        out
    }
}

/// Open-loop error of an arbitrary predictor against held-out labels.
pub fn heldout_rmse(
    predict: impl Fn(&[f64]) -> f64,
    data: &TraceDataset,
) -> f64 {
    let idx = data.heldout_indices();
    if idx.is_empty() {
        return 0.0;
    }
    let sse: f64 = idx
        .iter()
        .map(|&i| {
            let e = predict(data.row(i as usize)) - data.label(i as usize);
            e * e
        })
        .sum();
    (sse / idx.len() as f64).sqrt()
}

pub fn fidelity_report(
    teacher: &PolicyCheckpoint,
    student: &TreeEnsemble,
    data: &TraceDataset,
    scenarios: &[ScenarioSpec],
    cfg: &SimConfig,
    params: RewardParams,
) -> Result<FidelityReport> {
    let heldout_rmse_raw = heldout_rmse(|x| student.predict(x), data);
    let mapper = teacher.mapper;
    let idx = data.heldout_indices();
    let heldout_rmse_multiplier = if idx.is_empty() {
        0.0
    } else {
        let sse: f64 = idx
            .iter()
            .map(|&i| {
                let e = mapper.multiplier(student.predict(data.row(i as usize)))
                    - mapper.multiplier(data.label(i as usize));
                e * e
            })
            .sum();
        (sse / idx.len() as f64).sqrt()
    };

    let teacher_setup = ControllerSetup::rlcc_mlp(teacher.clone(), params);
    let student_setup = ControllerSetup::rlcc_tree(student.clone(), teacher, params);
    let mut per_scenario = Vec::with_capacity(scenarios.len());
    for spec in scenarios {
        let t = run_benchmark(spec, &teacher_setup, cfg)?;
        let s = run_benchmark(spec, &student_setup, cfg)?;
        per_scenario.push(ScenarioFidelity {
            scenario: spec.label(),
            goodput_delta: (t.normalized_goodput - s.normalized_goodput).abs(),
            inflation_rel_delta: (t.steady_state_inflation - s.steady_state_inflation).abs()
                / t.steady_state_inflation,
            drops_delta: (t.drops_per_flow - s.drops_per_flow).abs(),
            teacher: t,
            student: s,
        });
    }

    Ok(FidelityReport {
        heldout_rmse_raw,
        heldout_rmse_multiplier,
        scenarios: per_scenario,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_copy_student_has_zero_rmse() {
        // A predictor that replays the labels exactly.
        let rows: Vec<(Vec<f64>, f64)> = (0..50)
            .map(|i| (vec![i as f64], (i as f64 * 0.3).sin()))
            .collect();
        let train: Vec<u32> = (0..40).collect();
        let held: Vec<u32> = (40..50).collect();
        let data = TraceDataset::from_rows(1, &rows, &train, &held);
        let rmse = heldout_rmse(|x| (x[0] * 0.3).sin(), &data);
        assert!(rmse < 1e-12);
    }
}
