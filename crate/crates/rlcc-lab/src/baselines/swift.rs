//! Simplified delay-based Swift controller.
//!
//! Rate-based rather than cwnd-based so it shares the simulator's rate
//! actuation path: additive increase below the target delay, proportional
//! multiplicative decrease above it, at most one decrease per RTT.

use crate::sim::{Controller, ProbeContext};

#[derive(Debug, Clone, PartialEq)]
pub struct SwiftConfig {
    pub target_delay_us: f64,
    /// Additive increment per decision.
    pub ai_gbps: f64,
    /// Multiplicative-decrease gain.
    pub md_beta: f64,
    /// Upper bound on a single decrease (floor on the multiplier is
    /// `1 - max_md`).
    pub max_md: f64,
}

impl Default for SwiftConfig {
    fn default() -> Self {
        SwiftConfig {
            target_delay_us: 5.0,
            ai_gbps: 1.0,
            md_beta: 0.8,
            max_md: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SwiftController {
    cfg: SwiftConfig,
    rate_gbps: f64,
    last_decrease_us: f64,
}

impl SwiftController {
    pub fn new(cfg: SwiftConfig, initial_rate_gbps: f64) -> Self {
        SwiftController {
            cfg,
            rate_gbps: initial_rate_gbps,
            last_decrease_us: f64::NEG_INFINITY,
        }
    }

    pub fn rate_gbps(&self) -> f64 {
        self.rate_gbps
    }

    /// Multiplier applied when the measured delay exceeds the target.
    pub fn decrease_multiplier(cfg: &SwiftConfig, delay_us: f64) -> f64 {
        let excess = (delay_us - cfg.target_delay_us) / delay_us;
        (1.0 - cfg.md_beta * excess).max(1.0 - cfg.max_md)
    }

    pub fn update(
        &mut self,
        measured_rtt_us: f64,
        now_us: f64,
        base_rtt_us: f64,
        min_rate_gbps: f64,
        line_rate_gbps: f64,
    ) -> f64 {
        let delay = (measured_rtt_us - base_rtt_us).max(0.0);
        if delay < self.cfg.target_delay_us {
            self.rate_gbps += self.cfg.ai_gbps;
        } else if now_us - self.last_decrease_us >= measured_rtt_us {
            self.rate_gbps *= Self::decrease_multiplier(&self.cfg, delay);
            self.last_decrease_us = now_us;
        }
        self.rate_gbps = self.rate_gbps.clamp(min_rate_gbps, line_rate_gbps);
        self.rate_gbps
    }
}

impl Controller for SwiftController {
    fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64 {
        self.update(
            ctx.measured_rtt_us,
            ctx.now_us,
            ctx.cfg.base_rtt_us,
            ctx.cfg.min_rate_gbps,
            ctx.cfg.line_rate_gbps,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn below_target_adds_exactly_ai() {
        let mut c = SwiftController::new(SwiftConfig::default(), 50.0);
        // delay = 4.999 us, just under the 5 us target.
        let rate = c.update(14.999, 0.0, 10.0, 0.1, 100.0);
        assert_relative_eq!(rate, 51.0);
    }

    #[test]
    fn decrease_multiplier_formula() {
        let cfg = SwiftConfig {
            target_delay_us: 5.0,
            ai_gbps: 1.0,
            md_beta: 0.4,
            max_md: 0.5,
        };
        // delay twice the target: 1 - 0.4 * 0.5.
        assert_relative_eq!(SwiftController::decrease_multiplier(&cfg, 10.0), 0.8);
        // Enormous delay saturates at the max_md floor.
        assert_relative_eq!(SwiftController::decrease_multiplier(&cfg, 1e9), 0.6);
    }

    #[test]
    fn second_decrease_within_one_rtt_is_suppressed() {
        let mut c = SwiftController::new(SwiftConfig::default(), 100.0);
        let r1 = c.update(30.0, 100.0, 10.0, 0.1, 100.0);
        assert!(r1 < 100.0);
        // A second congested probe 10 us later (< 30 us RTT) must not decrease.
        let r2 = c.update(30.0, 110.0, 10.0, 0.1, 100.0);
        assert_eq!(r2, r1);
        // After a full RTT the decrease is allowed again.
        let r3 = c.update(30.0, 130.0, 10.0, 0.1, 100.0);
        assert!(r3 < r2);
    }

    #[test]
    fn rate_respects_clamps_under_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = SwiftController::new(SwiftConfig::default(), 100.0);
        let mut now = 0.0;
        for _ in 0..10_000 {
            now += rng.gen_range(1.0..30.0);
            let rtt = rng.gen_range(10.0..60.0);
            let rate = c.update(rtt, now, 10.0, 0.1, 100.0);
            assert!((0.1..=100.0).contains(&rate));
        }
    }
}
