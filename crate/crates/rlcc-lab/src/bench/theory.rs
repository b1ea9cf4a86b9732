//! Theory-versus-practice: measured steady-state inflation against the
//! fixed-point prediction, with a sqrt(N) fit for the Swift baseline.

use crate::bench::{run_benchmark, ControllerSetup};
use crate::error::Result;
use crate::policy::RewardParams;
use crate::sim::{ScenarioSpec, SimConfig};

/// Predicted steady-state inflation for `n` flows at fair share.
pub fn theory_curve(params: &RewardParams, n: usize) -> f64 {
    params.predicted_inflation(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub n: usize,
    pub measured_inflation: f64,
    pub predicted_inflation: f64,
    pub relative_error: f64,
    pub swift_inflation: f64,
    pub swift_fit_inflation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryTable {
    pub rows: Vec<TheoryRow>,
    /// Least-squares (c, b) for `c * sqrt(N) + b` over the Swift runs.
    pub swift_fit: (f64, f64),
}

pub const THEORY_CSV_HEADER: &str =
    "n,measured_inflation,predicted_inflation,relative_error,swift_inflation,swift_fit_inflation";

impl TheoryTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(THEORY_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.measured_inflation,
                r.predicted_inflation,
                r.relative_error,
                r.swift_inflation,
                r.swift_fit_inflation
            ));
        }
        out
    }

    pub fn max_relative_error(&self) -> f64 {
        self.rows.iter().map(|r| r.relative_error).fold(0.0, f64::max)
    }

    pub fn measured_is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].measured_inflation >= w[0].measured_inflation)
    }
}

/// Least squares for `y = c * sqrt(n) + b`.
pub fn fit_sqrt_curve(points: &[(usize, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let sx: f64 = points.iter().map(|(k, _)| (*k as f64).sqrt()).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(k, _)| *k as f64).sum();
    let sxy: f64 = points.iter().map(|(k, y)| (*k as f64).sqrt() * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return (0.0, sy / n);
    }
    let c = (n * sxy - sx * sy) / denom;
    let b = (sy - c * sx) / n;
    (c, b)
}

/// Runs many-to-one at each flow count with the candidate controller and
/// with Swift, comparing the measured mean inflation to the prediction.
pub fn theory_vs_practice(
    setup: &ControllerSetup,
    swift: &ControllerSetup,
    params: &RewardParams,
    flow_counts: &[usize],
    spec_template: &ScenarioSpec,
    cfg: &SimConfig,
) -> Result<TheoryTable> {
    let mut rows = Vec::with_capacity(flow_counts.len());
    let mut swift_points = Vec::with_capacity(flow_counts.len());
    for &n in flow_counts {
        let spec = ScenarioSpec::many_to_one(n, 1)
            .with_horizon(spec_template.duration_us, spec_template.warmup_us);
        let measured = run_benchmark(&spec, setup, cfg)?.steady_state_inflation;
        let swift_measured = run_benchmark(&spec, swift, cfg)?.steady_state_inflation;
        let predicted = theory_curve(params, n);
        rows.push(TheoryRow {
            n,
            measured_inflation: measured,
            predicted_inflation: predicted,
            relative_error: (measured - predicted).abs() / predicted,
            swift_inflation: swift_measured,
            swift_fit_inflation: 0.0,
        });
        swift_points.push((n, swift_measured));
    }
    let swift_fit = fit_sqrt_curve(&swift_points);
    for r in rows.iter_mut() {
        r.swift_fit_inflation = swift_fit.0 * (r.n as f64).sqrt() + swift_fit.1;
    }
    Ok(TheoryTable { rows, swift_fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn theory_curve_examples() {
        let p = RewardParams::default();
        assert_relative_eq!(theory_curve(&p, 64), 2.012, epsilon = 1e-12);
        assert_relative_eq!(theory_curve(&p, 1), 1.564, epsilon = 1e-12);
        assert_relative_eq!(theory_curve(&p, 4096), 5.596, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_fit_recovers_exact_coefficients() {
        let pts: Vec<(usize, f64)> = [2usize, 4, 8, 16, 64]
            .iter()
            .map(|&n| (n, 0.3 * (n as f64).sqrt() + 1.2))
            .collect();
        let (c, b) = fit_sqrt_curve(&pts);
        assert_relative_eq!(c, 0.3, epsilon = 1e-9);
        assert_relative_eq!(b, 1.2, epsilon = 1e-9);
    }

    #[test]
    fn oracle_tracks_theory_exactly() {
        // Closes the loop on definitions: a fixed-rate oracle at fair share
        // with the queue forced to the predicted level has ~zero error.
        let params = RewardParams::default();
        let template = ScenarioSpec::many_to_one(1, 1).with_horizon(60_000.0, 30_000.0);
        let cfg = SimConfig::default();
        let table = theory_vs_practice(
            &ControllerSetup::FixedPoint(params),
            &ControllerSetup::Swift(Default::default()),
            &params,
            &[2, 8, 32],
            &template,
            &cfg,
        )
        .unwrap();
        assert!(table.max_relative_error() < 0.02, "err {}", table.max_relative_error());
        assert!(table.measured_is_monotone());
    }
}
