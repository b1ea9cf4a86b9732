//! Reference controllers: fixed-rate, greedy, and the fair-share oracle
//! that drives the queue to the reward's fixed point.

use crate::policy::RewardParams;
use crate::sim::{Controller, ProbeContext, SimConfig};

/// Always transmits at a constant rate.
#[derive(Debug, Clone, Copy)]
pub struct FixedRateController {
    rate_gbps: f64,
}

impl FixedRateController {
    pub fn new(rate_gbps: f64) -> Self {
        FixedRateController { rate_gbps }
    }
}

impl Controller for FixedRateController {
    fn decide(&mut self, _: &ProbeContext<'_>) -> f64 {
        self.rate_gbps
    }
}

/// Always asks for the full line rate.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyController;

impl Controller for GreedyController {
    fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64 {
        ctx.cfg.line_rate_gbps
    }
}

/// Hand-built oracle pinning its flow at fair share while steering the
/// shared queue to the steady-state level the reward predicts for `n`
/// flows. Once settled, the measured delta is zero by construction.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOracle {
    fair_rate_gbps: f64,
    target_delay_us: f64,
    gain: f64,
}

impl FixedPointOracle {
    pub fn new(params: RewardParams, n_flows: usize, cfg: &SimConfig) -> Self {
        let inflation = params.predicted_inflation(n_flows);
        FixedPointOracle {
            fair_rate_gbps: cfg.line_rate_gbps / n_flows as f64,
            target_delay_us: (inflation - 1.0) * cfg.base_rtt_us,
            gain: 0.1,
        }
    }
}

impl Controller for FixedPointOracle {
    fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64 {
        let delay = (ctx.measured_rtt_us - ctx.cfg.base_rtt_us).max(0.0);
        // Proportional steering around fair share; the queue integrates the
        // excess, so delay converges to the target exactly.
        let err = (self.target_delay_us - delay) / self.target_delay_us.max(1e-9);
        self.fair_rate_gbps * (1.0 + self.gain * err.clamp(-1.0, 1.0))
    }
}
