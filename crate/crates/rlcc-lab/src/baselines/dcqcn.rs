//! Simplified DCQCN rate controller.
//!
//! On an ECN mark the current rate drops by `alpha / 2` and the target rate
//! snaps to the pre-decrease rate. Unmarked update periods (driven by a
//! timer and a byte counter) walk the increase stage machine: five
//! fast-recovery steps averaging towards the target, then additive target
//! increments, then hyper increments.

use crate::sim::{Controller, ProbeContext};

#[derive(Debug, Clone, PartialEq)]
pub struct DcqcnConfig {
    /// Gain used for both alpha increase on marks and alpha decay.
    pub g: f64,
    pub rate_ai_gbps: f64,
    pub rate_hai_gbps: f64,
    pub timer_us: f64,
    pub byte_counter_bits: f64,
    /// Fast-recovery steps before additive increase begins.
    pub fast_recovery_steps: u32,
    /// Additive steps before hyper increase begins.
    pub additive_steps: u32,
}

impl Default for DcqcnConfig {
    fn default() -> Self {
        // Published DCQCN defaults scaled to a 100 Gbps line.
        DcqcnConfig {
            g: 1.0 / 16.0,
            rate_ai_gbps: 5.0,
            rate_hai_gbps: 50.0,
            timer_us: 55.0,
            byte_counter_bits: 10e6 * 8.0,
            fast_recovery_steps: 5,
            additive_steps: 5,
        }
    }
}

/// Current phase of the increase stage machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncreaseStage {
    FastRecovery,
    Additive,
    Hyper,
}

#[derive(Debug, Clone)]
pub struct DcqcnController {
    cfg: DcqcnConfig,
    /// Current rate RC.
    rate_gbps: f64,
    /// Target rate RT.
    target_gbps: f64,
    alpha: f64,
    stage_counter: u32,
    timer_accum_us: f64,
    byte_accum_bits: f64,
}

impl DcqcnController {
    pub fn new(cfg: DcqcnConfig, initial_rate_gbps: f64) -> Self {
        DcqcnController {
            cfg,
            rate_gbps: initial_rate_gbps,
            target_gbps: initial_rate_gbps,
            alpha: 1.0,
            stage_counter: 0,
            timer_accum_us: 0.0,
            byte_accum_bits: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rate_gbps(&self) -> f64 {
        self.rate_gbps
    }

    pub fn target_gbps(&self) -> f64 {
        self.target_gbps
    }

    pub fn stage(&self) -> IncreaseStage {
        if self.stage_counter < self.cfg.fast_recovery_steps {
            IncreaseStage::FastRecovery
        } else if self.stage_counter < self.cfg.fast_recovery_steps + self.cfg.additive_steps {
            IncreaseStage::Additive
        } else {
            IncreaseStage::Hyper
        }
    }

    /// One marked/unmarked update with explicit elapsed time and bytes sent;
    /// returns the new current rate.
    pub fn update(
        &mut self,
        marked: bool,
        elapsed_us: f64,
        bits_sent: f64,
        min_rate_gbps: f64,
        line_rate_gbps: f64,
    ) -> f64 {
        if marked {
            self.target_gbps = self.rate_gbps;
            self.rate_gbps *= 1.0 - self.alpha / 2.0;
            self.alpha = (1.0 - self.cfg.g) * self.alpha + self.cfg.g;
            self.stage_counter = 0;
            self.timer_accum_us = 0.0;
            self.byte_accum_bits = 0.0;
        } else {
            self.timer_accum_us += elapsed_us;
            self.byte_accum_bits += bits_sent;
            let mut steps = 0u32;
            while self.timer_accum_us >= self.cfg.timer_us {
                self.timer_accum_us -= self.cfg.timer_us;
                steps += 1;
            }
            while self.byte_accum_bits >= self.cfg.byte_counter_bits {
                self.byte_accum_bits -= self.cfg.byte_counter_bits;
                steps += 1;
            }
            for _ in 0..steps {
                self.alpha *= 1.0 - self.cfg.g;
                match self.stage() {
                    IncreaseStage::FastRecovery => {}
                    IncreaseStage::Additive => self.target_gbps += self.cfg.rate_ai_gbps,
                    IncreaseStage::Hyper => self.target_gbps += self.cfg.rate_hai_gbps,
                }
                self.target_gbps = self.target_gbps.min(line_rate_gbps);
                self.rate_gbps = 0.5 * (self.rate_gbps + self.target_gbps);
                self.stage_counter = self.stage_counter.saturating_add(1);
            }
        }
        self.rate_gbps = self.rate_gbps.clamp(min_rate_gbps, line_rate_gbps);
        self.rate_gbps
    }
}

impl Controller for DcqcnController {
    fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64 {
        self.update(
            ctx.ecn_marked,
            ctx.elapsed_us,
            ctx.bits_sent,
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

    fn controller(rc: f64, rt: f64, alpha: f64) -> DcqcnController {
        let mut c = DcqcnController::new(DcqcnConfig::default(), rc);
        c.target_gbps = rt;
        c.alpha = alpha;
        c
    }

    #[test]
    fn mark_with_full_alpha_halves_the_rate() {
        let mut c = controller(100.0, 100.0, 1.0);
        let rate = c.update(true, 10.0, 0.0, 0.1, 100.0);
        assert_relative_eq!(rate, 50.0);
        assert_eq!(c.target_gbps(), 100.0);
    }

    #[test]
    fn mark_with_zero_alpha_only_updates_alpha() {
        let mut c = controller(80.0, 80.0, 0.0);
        let rate = c.update(true, 10.0, 0.0, 0.1, 100.0);
        assert_relative_eq!(rate, 80.0);
        assert_relative_eq!(c.alpha(), 1.0 / 16.0);
    }

    #[test]
    fn five_unmarked_periods_average_towards_target() {
        let mut c = controller(50.0, 100.0, 1.0);
        let mut rate = 0.0;
        for _ in 0..5 {
            // Each call crosses the 55 us timer exactly once.
            rate = c.update(false, 60.0, 0.0, 0.1, 100.0);
        }
        assert_relative_eq!(rate, 98.4375);
        assert_eq!(c.stage(), IncreaseStage::Additive);
    }

    #[test]
    fn additive_then_hyper_increase_raise_the_target() {
        // Elapsed exactly one timer period per call: one stage step each.
        let mut c = controller(100.0, 100.0, 1.0);
        for _ in 0..5 {
            c.update(false, 55.0, 0.0, 0.1, 200.0);
        }
        assert_relative_eq!(c.target_gbps(), 100.0);
        c.update(false, 55.0, 0.0, 0.1, 200.0);
        assert_relative_eq!(c.target_gbps(), 105.0);
        for _ in 0..4 {
            c.update(false, 55.0, 0.0, 0.1, 200.0);
        }
        assert_eq!(c.stage(), IncreaseStage::Hyper);
        c.update(false, 55.0, 0.0, 0.1, 200.0);
        assert_relative_eq!(c.target_gbps(), 175.0);
    }

    #[test]
    fn byte_counter_also_triggers_increase() {
        let mut c = controller(50.0, 100.0, 1.0);
        let rate = c.update(false, 1.0, DcqcnConfig::default().byte_counter_bits, 0.1, 100.0);
        assert_relative_eq!(rate, 75.0);
    }

    #[test]
    fn alpha_stays_in_unit_interval_under_any_mark_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = controller(100.0, 100.0, 1.0);
        for _ in 0..10_000 {
            let marked = rng.gen_bool(0.3);
            let elapsed = rng.gen_range(0.0..200.0);
            let bits = rng.gen_range(0.0..1e8);
            let rate = c.update(marked, elapsed, bits, 0.1, 100.0);
            assert!((0.0..=1.0).contains(&c.alpha()), "alpha={}", c.alpha());
            assert!((0.1..=100.0).contains(&rate));
            if marked {
                assert!(c.rate_gbps() <= c.target_gbps() + 1e-9);
            }
        }
    }
}
