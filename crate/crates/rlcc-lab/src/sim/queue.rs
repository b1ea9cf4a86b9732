//! Fluid FIFO queue of one congested egress port.

use crate::error::{Error, Result};

/// 1 Gbps expressed in bits per microsecond.
pub const GBPS_TO_BITS_PER_US: f64 = 1_000.0;

/// Queue state evolves piecewise-linearly between events: occupancy grows at
/// `aggregate - capacity`, clamped to `[0, buffer]`, with overflow shaved
/// into `dropped_bits`. For constant rates the update is exact regardless of
/// step size, so injected = delivered + dropped + occupancy holds at every
/// instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PortQueue {
    pub capacity_gbps: f64,
    pub buffer_bits: f64,
    pub occupancy_bits: f64,
    pub injected_bits: f64,
    pub delivered_bits: f64,
    pub dropped_bits: f64,
    pub last_update_us: f64,
}

impl PortQueue {
    pub fn new(capacity_gbps: f64, buffer_bits: f64) -> Self {
        PortQueue {
            capacity_gbps,
            buffer_bits,
            occupancy_bits: 0.0,
            injected_bits: 0.0,
            delivered_bits: 0.0,
            dropped_bits: 0.0,
            last_update_us: 0.0,
        }
    }

    /// Advances the queue to `now_us` under a constant aggregate inflow.
    pub fn advance(&mut self, aggregate_rate_gbps: f64, now_us: f64) -> Result<()> {
        let dt = now_us - self.last_update_us;
        if dt < 0.0 {
            return Err(Error::contract(format!(
                "queue advanced backwards: {} -> {now_us}",
                self.last_update_us
            )));
        }
        if dt == 0.0 {
            return Ok(());
        }
        if aggregate_rate_gbps < 0.0 {
            return Err(Error::contract("negative aggregate rate"));
        }
        let inflow = aggregate_rate_gbps * GBPS_TO_BITS_PER_US * dt;
        let work = self.occupancy_bits + inflow;
        let drained = (self.capacity_gbps * GBPS_TO_BITS_PER_US * dt).min(work);
        let raw = work - drained;
        self.injected_bits += inflow;
        self.delivered_bits += drained;
        if raw > self.buffer_bits {
            self.dropped_bits += raw - self.buffer_bits;
            self.occupancy_bits = self.buffer_bits;
        } else {
            self.occupancy_bits = raw;
        }
        self.last_update_us = now_us;
        Ok(())
    }

    /// Queueing delay currently experienced by an arriving probe.
    pub fn queueing_delay_us(&self) -> f64 {
        self.occupancy_bits / (self.capacity_gbps * GBPS_TO_BITS_PER_US)
    }

    /// `base_rtt + occupancy / capacity`.
    pub fn rtt_us(&self, base_rtt_us: f64) -> f64 {
        base_rtt_us + self.queueing_delay_us()
    }

    /// injected = delivered + dropped + occupancy, up to fluid tolerance.
    pub fn conservation_error(&self) -> f64 {
        let accounted = self.delivered_bits + self.dropped_bits + self.occupancy_bits;
        let scale = self.injected_bits.abs().max(1.0);
        (self.injected_bits - accounted).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn queue() -> PortQueue {
        PortQueue::new(100.0, 4.0e6)
    }

    #[test]
    fn saturated_link_keeps_queue_empty() {
        let mut q = queue();
        q.advance(100.0, 5.0).unwrap();
        assert_eq!(q.occupancy_bits, 0.0);
        assert_eq!(q.dropped_bits, 0.0);
        assert_relative_eq!(q.delivered_bits, 500_000.0);
    }

    #[test]
    fn overload_builds_queue() {
        let mut q = queue();
        q.advance(200.0, 1.0).unwrap();
        // (200 - 100) Gbps over 1 us.
        assert_relative_eq!(q.occupancy_bits, 100_000.0);
        assert_eq!(q.dropped_bits, 0.0);
    }

    #[test]
    fn overflow_accrues_to_drops() {
        let mut q = queue();
        q.occupancy_bits = q.buffer_bits;
        q.advance(200.0, 1.0).unwrap();
        assert_eq!(q.occupancy_bits, q.buffer_bits);
        assert_relative_eq!(q.dropped_bits, 100_000.0);
    }

    #[test]
    fn drain_when_underloaded() {
        let mut q = queue();
        q.occupancy_bits = 300_000.0;
        q.advance(50.0, 2.0).unwrap();
        // Net drain of 50 Gbps over 2 us.
        assert_relative_eq!(q.occupancy_bits, 200_000.0);
        // Delivered the full capacity while backlogged.
        assert_relative_eq!(q.delivered_bits, 200_000.0);
    }

    #[test]
    fn drain_stops_at_empty() {
        let mut q = queue();
        q.occupancy_bits = 50_000.0;
        q.advance(0.0, 10.0).unwrap();
        assert_eq!(q.occupancy_bits, 0.0);
        assert_relative_eq!(q.delivered_bits, 50_000.0);
    }

    #[test]
    fn negative_dt_is_contract_violation() {
        let mut q = queue();
        q.advance(10.0, 5.0).unwrap();
        assert!(q.advance(10.0, 4.0).is_err());
    }

    #[test]
    fn rtt_inflation_examples() {
        let mut q = queue();
        assert_eq!(q.rtt_us(10.0), 10.0);
        // One base-RTT worth of queueing: inflation 2.
        q.occupancy_bits = 100.0 * GBPS_TO_BITS_PER_US * 10.0;
        assert_relative_eq!(q.rtt_us(10.0) / 10.0, 2.0);
        q.occupancy_bits *= 0.5;
        assert_relative_eq!(q.rtt_us(10.0) / 10.0, 1.5);
    }

    #[test]
    fn conservation_across_mixed_phases() {
        let mut q = queue();
        let rates = [250.0, 80.0, 0.0, 400.0, 99.9, 130.0];
        let mut t = 0.0;
        for (i, r) in rates.iter().cycle().take(200).enumerate() {
            t += 0.7 + (i % 5) as f64 * 0.3;
            q.advance(*r, t).unwrap();
            assert!(q.conservation_error() < 1e-12);
            assert!(q.occupancy_bits <= q.buffer_bits);
            assert!(q.occupancy_bits >= 0.0);
        }
        assert!(q.dropped_bits > 0.0, "workload should overflow at least once");
    }
}
