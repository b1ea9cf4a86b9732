//! RED-style probabilistic ECN marking.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Marks probes with probability 0 below `k_min`, rising linearly to `p_max`
/// at `k_max`, and 1 above `k_max`. Draws come from a single seeded stream
/// independent of which flow's probe is being marked.
#[derive(Debug, Clone)]
pub struct EcnMarker {
    pub k_min_bits: f64,
    pub k_max_bits: f64,
    pub p_max: f64,
    rng: ChaCha8Rng,
}

impl EcnMarker {
    pub fn new(k_min_bits: f64, k_max_bits: f64, p_max: f64, seed: u64) -> Result<Self> {
        if !(0.0 <= k_min_bits && k_min_bits < k_max_bits) {
            return Err(Error::validation("ECN thresholds must satisfy 0 <= k_min < k_max"));
        }
        if !(0.0..=1.0).contains(&p_max) {
            return Err(Error::validation("p_max must lie in [0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0xecb);
        Ok(EcnMarker { k_min_bits, k_max_bits, p_max, rng })
    }

    pub fn mark(&mut self, occupancy_bits: f64) -> bool {
        if occupancy_bits < self.k_min_bits {
            return false;
        }
        if occupancy_bits >= self.k_max_bits {
            return true;
        }
        let p = self.p_max * (occupancy_bits - self.k_min_bits) / (self.k_max_bits - self.k_min_bits);
        self.rng.gen::<f64>() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_threshold_never_marks() {
        let mut m = EcnMarker::new(100_000.0, 400_000.0, 1.0, 7).unwrap();
        for _ in 0..1000 {
            assert!(!m.mark(99_999.0));
        }
    }

    #[test]
    fn above_threshold_always_marks() {
        let mut m = EcnMarker::new(100_000.0, 400_000.0, 1.0, 7).unwrap();
        for _ in 0..1000 {
            assert!(m.mark(400_000.0));
            assert!(m.mark(4_000_000.0));
        }
    }

    #[test]
    fn midpoint_mark_rate_matches_linear_formula() {
        // Monte-Carlo check of p = p_max * (occ - k_min) / (k_max - k_min).
        let mut m = EcnMarker::new(100_000.0, 400_000.0, 0.1, 13).unwrap();
        let mid = 250_000.0;
        let draws = 10_000;
        let hits = (0..draws).filter(|_| m.mark(mid)).count();
        let rate = hits as f64 / draws as f64;
        assert!((rate - 0.05).abs() < 0.01, "empirical mark rate {rate}");
    }

    #[test]
    fn validates_parameters() {
        assert!(EcnMarker::new(400_000.0, 100_000.0, 0.1, 0).is_err());
        assert!(EcnMarker::new(0.0, 1.0, 1.5, 0).is_err());
        assert!(EcnMarker::new(-1.0, 1.0, 0.1, 0).is_err());
    }
}
