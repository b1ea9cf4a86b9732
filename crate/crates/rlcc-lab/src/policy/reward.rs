//! Reward machinery for the rate-control agent.
//!
//! The controller drives each flow towards the equilibrium where RTT
//! inflation equals `target * sqrt(N) + beta` at fair share. The scalar
//! `delta` measures the signed distance from that operating point and the
//! reward is `-delta^2`, maximal (zero) exactly at the fixed point.

use crate::error::{Error, Result};

/// The `(target, beta)` pair governing the reward.
///
/// `target` tunes the bandwidth/latency trade-off; `beta` is the congestion
/// tolerance below which RTT inflation is ignored entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub target: f64,
    pub beta: f64,
}

impl RewardParams {
    pub const DEFAULT_TARGET: f64 = 0.064;
    pub const DEFAULT_BETA: f64 = 1.5;

    pub fn new(target: f64, beta: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::validation(format!("target must be > 0, got {target}")));
        }
        if !(beta >= 1.0) {
            return Err(Error::validation(format!("beta must be >= 1, got {beta}")));
        }
        Ok(RewardParams { target, beta })
    }

    /// `delta = target - max(inflation - beta, 0) * sqrt(rate / line_rate)`.
    ///
    /// The transmission rate is normalized to line rate before the square
    /// root so the fixed point `inflation = target * sqrt(N) + beta` holds at
    /// fair share for any line rate. The result never exceeds `target`.
    pub fn delta(&self, rtt_inflation: f64, rate_gbps: f64, line_rate_gbps: f64) -> f64 {
        let congestion = (rtt_inflation - self.beta).max(0.0);
        self.target - congestion * (rate_gbps / line_rate_gbps).sqrt()
    }

    /// `reward = -delta^2`; zero exactly at the fixed point, negative elsewhere.
    pub fn reward(&self, rtt_inflation: f64, rate_gbps: f64, line_rate_gbps: f64) -> f64 {
        let d = self.delta(rtt_inflation, rate_gbps, line_rate_gbps);
        -(d * d)
    }

    /// Steady-state RTT inflation predicted for `n` flows at fair share:
    /// `target * sqrt(n) + beta` (with rate normalized to line rate).
    pub fn predicted_inflation(&self, n: usize) -> f64 {
        self.target * (n as f64).sqrt() + self.beta
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            target: Self::DEFAULT_TARGET,
            beta: Self::DEFAULT_BETA,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta_vanishes_at_tolerance_boundary() {
        let p = RewardParams::default();
        // max term vanishes when inflation equals beta.
        assert_eq!(p.delta(1.5, 50.0, 100.0), 0.064);
        assert_eq!(p.delta(1.0, 100.0, 100.0), 0.064);
    }

    #[test]
    fn delta_direct_substitution() {
        let p = RewardParams::default();
        // inflation 2.5, full line rate: 0.064 - 1.0.
        assert_relative_eq!(p.delta(2.5, 100.0, 100.0), -0.936, epsilon = 1e-12);
    }

    #[test]
    fn delta_zero_at_fixed_point() {
        let p = RewardParams::default();
        // N = 64 flows at fair share: inflation 0.064 * 8 + 1.5 = 2.012.
        let n = 64.0f64;
        let inflation = 0.064 * n.sqrt() + 1.5;
        assert_relative_eq!(inflation, 2.012, epsilon = 1e-12);
        let d = p.delta(inflation, 100.0 / n, 100.0);
        assert!(d.abs() < 1e-12, "delta at fixed point: {d}");
    }

    #[test]
    fn fixed_point_across_flow_counts() {
        let p = RewardParams::default();
        for k in 0..=12 {
            let n = 1usize << k; // 1..4096
            let inflation = p.predicted_inflation(n);
            let d = p.delta(inflation, 100.0 / n as f64, 100.0);
            assert!(d.abs() < 1e-12, "N={n} delta={d}");
        }
    }

    #[test]
    fn reward_is_nonpositive_and_zero_iff_delta_zero() {
        let p = RewardParams::default();
        assert_eq!(p.reward(1.5, 100.0, 100.0), -(0.064f64 * 0.064));
        let inflation = p.predicted_inflation(64);
        assert!(p.reward(inflation, 100.0 / 64.0, 100.0).abs() < 1e-24);
        assert_relative_eq!(p.reward(2.5, 100.0, 100.0), -0.876096, epsilon = 1e-12);
    }

    #[test]
    fn delta_bounded_above_by_target() {
        let p = RewardParams::default();
        for inflation in [1.0, 1.2, 1.5, 2.0, 5.0, 100.0] {
            for rate in [0.1, 1.0, 25.0, 100.0] {
                assert!(p.delta(inflation, rate, 100.0) <= p.target + 1e-15);
            }
        }
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(RewardParams::new(0.0, 1.5).is_err());
        assert!(RewardParams::new(-0.1, 1.5).is_err());
        assert!(RewardParams::new(0.064, 0.5).is_err());
        assert!(RewardParams::new(0.064, 1.0).is_ok());
    }
}
