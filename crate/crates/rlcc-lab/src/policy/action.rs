//! Raw policy output to rate-multiplier mapping.

/// Maps a raw policy output `y` to a multiplicative rate change via
/// `exp(clamp(y, y_min, y_max))`. The map is symmetric in log space and
/// strictly monotone within the clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionMapper {
    y_min: f64,
    y_max: f64,
}

pub const DEFAULT_MIN_MULTIPLIER: f64 = 0.8;
pub const DEFAULT_MAX_MULTIPLIER: f64 = 1.25;

impl ActionMapper {
    pub fn new(y_min: f64, y_max: f64) -> Self {
        assert!(y_min < y_max, "clamp bounds must be ordered");
        ActionMapper { y_min, y_max }
    }

    pub fn from_multipliers(min_multiplier: f64, max_multiplier: f64) -> Self {
        Self::new(min_multiplier.ln(), max_multiplier.ln())
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn clamp_raw(&self, y: f64) -> f64 {
        y.clamp(self.y_min, self.y_max)
    }

    /// True when the recorded raw output lies strictly outside the clamp,
    /// i.e. in the flat region of the action map.
    pub fn is_saturated(&self, y: f64) -> bool {
        y < self.y_min || y > self.y_max
    }

    pub fn multiplier(&self, y: f64) -> f64 {
        self.clamp_raw(y).exp()
    }
}

impl Default for ActionMapper {
    fn default() -> Self {
        Self::from_multipliers(DEFAULT_MIN_MULTIPLIER, DEFAULT_MAX_MULTIPLIER)
    }
}
