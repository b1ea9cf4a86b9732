//! Delta-weighted policy gradient over a rollout buffer.

use crate::error::{Error, Result};
use crate::policy::{ActionMapper, MlpPolicy};

/// One decision recorded during a rollout: the flattened window it saw, the
/// reward-side delta, and the raw (pre-clamp) policy output.
#[derive(Debug, Clone)]
pub struct Transition {
    pub features: Vec<f64>,
    pub delta: f64,
    pub raw_output: f64,
}

/// Fixed-capacity buffer shared by all concurrently simulated flows; the
/// gradient update triggers exactly when it fills, after which it is cleared.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    capacity: usize,
    transitions: Vec<Transition>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        RolloutBuffer {
            capacity,
            transitions: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, t: Transition) {
        debug_assert!(self.transitions.len() < self.capacity);
        self.transitions.push(t);
    }

    pub fn is_full(&self) -> bool {
        self.transitions.len() >= self.capacity
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }
}

/// How the averaged delta term pairs with the per-observation gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientWeighting {
    /// `g = sum_t delta_t * grad y(o_t)` - each step weighted by its own delta.
    PerStep,
    /// `g = mean(delta) * sum_t grad y(o_t)` - one trajectory-averaged weight.
    TrajectoryAverage,
}

/// Ascent direction for the surrogate objective. Transitions whose recorded
/// raw output lies strictly outside the clamp interval sit in the flat
/// region of the action map and contribute nothing.
pub fn accumulate_gradient(
    policy: &MlpPolicy,
    buffer: &RolloutBuffer,
    mapper: &ActionMapper,
    weighting: GradientWeighting,
) -> Result<Vec<f64>> {
    let mut g = vec![0.0f64; policy.param_count()];
    let mut scratch = vec![0.0f64; policy.param_count()];
    let mut delta_sum = 0.0;
    let mut included = 0usize;
    for t in buffer.transitions() {
        if mapper.is_saturated(t.raw_output) {
            continue;
        }
        included += 1;
        delta_sum += t.delta;
        policy.output_gradient(&t.features, &mut scratch);
        match weighting {
            GradientWeighting::PerStep => {
                for (gi, si) in g.iter_mut().zip(&scratch) {
                    *gi += t.delta * si;
                }
            }
            GradientWeighting::TrajectoryAverage => {
                for (gi, si) in g.iter_mut().zip(&scratch) {
                    *gi += si;
                }
            }
        }
    }
    if weighting == GradientWeighting::TrajectoryAverage && included > 0 {
        let mean_delta = delta_sum / included as f64;
        for gi in g.iter_mut() {
            *gi *= mean_delta;
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("policy gradient".into()));
    }
    Ok(g)
}

/// Plain gradient ascent: `theta' = theta + learning_rate * g`. Positive
/// delta pushes the raw output, hence the rate multiplier, upward.
pub fn apply_update(policy: &mut MlpPolicy, g: &[f64], learning_rate: f64) -> Result<()> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gradient in apply_update".into()));
    }
    policy.add_scaled(g, learning_rate);
    policy.validate()
}

/// Surrogate objective whose gradient `accumulate_gradient` computes:
/// the delta-weighted sum of raw outputs over non-saturated transitions.
/// Kept next to the gradient so tests can difference it directly.
pub fn surrogate_objective(
    policy: &MlpPolicy,
    buffer: &RolloutBuffer,
    mapper: &ActionMapper,
    weighting: GradientWeighting,
) -> f64 {
    let mut acc = 0.0;
    let mut delta_sum = 0.0;
    let mut y_sum = 0.0;
    let mut included = 0usize;
    for t in buffer.transitions() {
        if mapper.is_saturated(t.raw_output) {
            continue;
        }
        included += 1;
        delta_sum += t.delta;
        let y = policy.forward(&t.features);
        y_sum += y;
        acc += t.delta * y;
    }
    match weighting {
        GradientWeighting::PerStep => acc,
        GradientWeighting::TrajectoryAverage => {
            if included == 0 {
                0.0
            } else {
                (delta_sum / included as f64) * y_sum
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mapper() -> ActionMapper {
        ActionMapper::default()
    }

    fn random_buffer(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> RolloutBuffer {
        let mut buf = RolloutBuffer::new(n);
        for _ in 0..n {
            buf.push(Transition {
                features: (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect(),
                delta: rng.gen_range(-1.0..0.2),
                raw_output: rng.gen_range(-0.2..0.2),
            });
        }
        buf
    }

    #[test]
    fn zero_deltas_give_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let policy = MlpPolicy::random(6, 4, 0.3, &mut rng);
        let mut buf = random_buffer(&mut rng, 16, 6);
        let transitions: Vec<Transition> = buf
            .transitions()
            .iter()
            .map(|t| Transition { delta: 0.0, ..t.clone() })
            .collect();
        buf.clear();
        for t in transitions {
            buf.push(t);
        }
        let g = accumulate_gradient(&policy, &buf, &mapper(), GradientWeighting::PerStep).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_delta_single_transition_equals_plain_output_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let policy = MlpPolicy::random(6, 4, 0.3, &mut rng);
        let mut buf = RolloutBuffer::new(1);
        let features: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.5..0.5)).collect();
        buf.push(Transition { features: features.clone(), delta: 1.0, raw_output: 0.0 });
        let g = accumulate_gradient(&policy, &buf, &mapper(), GradientWeighting::PerStep).unwrap();
        let mut plain = vec![0.0; policy.param_count()];
        policy.output_gradient(&features, &mut plain);
        assert_eq!(g, plain);
    }

    #[test]
    fn saturated_transitions_contribute_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let policy = MlpPolicy::random(6, 4, 0.3, &mut rng);
        let mut buf = RolloutBuffer::new(2);
        buf.push(Transition {
            features: vec![0.1; 6],
            delta: -3.0,
            raw_output: -5.0, // far below the clamp: flat region
        });
        buf.push(Transition {
            features: vec![0.2; 6],
            delta: 2.0,
            raw_output: 5.0, // far above
        });
        let g = accumulate_gradient(&policy, &buf, &mapper(), GradientWeighting::PerStep).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    fn finite_difference_check(weighting: GradientWeighting, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut policy = MlpPolicy::random(10, 8, 0.5, &mut rng);
        let buf = random_buffer(&mut rng, 64, 10);
        let m = mapper();
        let g = accumulate_gradient(&policy, &buf, &m, weighting).unwrap();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        let mut unit = vec![0.0; policy.param_count()];
        for k in 0..policy.param_count() {
            unit[k] = 1.0;
            policy.add_scaled(&unit, h);
            let up = surrogate_objective(&policy, &buf, &m, weighting);
            policy.add_scaled(&unit, -2.0 * h);
            let down = surrogate_objective(&policy, &buf, &m, weighting);
            policy.add_scaled(&unit, h);
            unit[k] = 0.0;
            let numeric = (up - down) / (2.0 * h);
            let rel = (numeric - g[k]).abs() / (numeric.abs() + g[k].abs()).max(1e-8);
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        for seed in 0..5 {
            let worst = finite_difference_check(GradientWeighting::PerStep, 100 + seed);
            assert!(worst <= 1e-5, "per-step rel error {worst} (seed {seed})");
        }
        let worst = finite_difference_check(GradientWeighting::TrajectoryAverage, 7);
        assert!(worst <= 1e-5, "trajectory-average rel error {worst}");
    }

    #[test]
    fn ascent_moves_output_in_delta_direction() {
        for (delta, seed) in [(0.5, 4u64), (-0.5, 5u64)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut policy = MlpPolicy::random(6, 4, 0.3, &mut rng);
            let features: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let mut buf = RolloutBuffer::new(1);
            buf.push(Transition { features: features.clone(), delta, raw_output: 0.0 });
            let before = policy.forward(&features);
            let g = accumulate_gradient(&policy, &buf, &mapper(), GradientWeighting::PerStep).unwrap();
            apply_update(&mut policy, &g, 1e-3).unwrap();
            let after = policy.forward(&features);
            assert_eq!((after - before).signum(), delta.signum());
        }
    }

    #[test]
    fn zero_gradient_or_rate_leaves_policy_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let policy = MlpPolicy::random(6, 4, 0.3, &mut rng);
        let zeros = vec![0.0; policy.param_count()];
        let mut a = policy.clone();
        apply_update(&mut a, &zeros, 0.1).unwrap();
        assert_eq!(a, policy);
        let mut b = policy.clone();
        let g: Vec<f64> = (0..policy.param_count()).map(|i| i as f64).collect();
        apply_update(&mut b, &g, 0.0).unwrap();
        assert_eq!(b, policy);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut policy = MlpPolicy::random(4, 2, 0.3, &mut rng);
        let mut g = vec![0.0; policy.param_count()];
        g[0] = f64::NAN;
        assert!(apply_update(&mut policy, &g, 0.1).is_err());
    }
}
