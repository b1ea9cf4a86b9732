//! Sliding observation window over `(delta, action)` history.

/// Ring of the `H` most recent `(delta, action)` pairs, stored flattened in
/// the fixed order consumed by policies: oldest to newest, `(delta, action)`
/// interleaved. Actions are stored in raw-output (log-multiplier) space so a
/// neutral action is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    features: Vec<f64>,
}

impl ObservationWindow {
    /// A fresh window is warm from the start: every delta slot holds
    /// `init_delta` and every action slot holds 0 (multiplier 1).
    pub fn new(window_len: usize, init_delta: f64) -> Self {
        assert!(window_len > 0, "window length must be positive");
        let mut features = vec![0.0; 2 * window_len];
        for slot in features.iter_mut().step_by(2) {
            *slot = init_delta;
        }
        ObservationWindow { features }
    }

    pub fn window_len(&self) -> usize {
        self.features.len() / 2
    }

    pub fn feature_len(&self) -> usize {
        self.features.len()
    }

    /// Evicts the oldest pair and appends `(delta, action)` as the newest.
    pub fn push(&mut self, delta: f64, action: f64) {
        let n = self.features.len();
        self.features.copy_within(2..n, 0);
        self.features[n - 2] = delta;
        self.features[n - 1] = action;
    }

    /// Flattened view, oldest to newest, `(delta, action)` interleaved.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Overwrites every slot; used by synthetic policy probes.
    pub fn fill(&mut self, delta: f64, action: f64) {
        for pair in self.features.chunks_exact_mut(2) {
            pair[0] = delta;
            pair[1] = action;
        }
    }
}
