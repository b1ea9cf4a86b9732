//! Explainability probe: synthetic (previous, current) condition pairs fed
//! through the policy, returning the 3x3 matrix of rate multipliers.

use std::fmt::Write as _;

use crate::policy::{ActionMapper, ObservationWindow, PolicyModel, RewardParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    UnderUtilized,
    OnTarget,
    Congested,
}

pub const CONDITIONS: [Condition; 3] = [
    Condition::UnderUtilized,
    Condition::OnTarget,
    Condition::Congested,
];

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::UnderUtilized => "under_utilized",
            Condition::OnTarget => "on_target",
            Condition::Congested => "congested",
        }
    }

    fn delta(&self, params: &RewardParams, congested_delta: f64) -> f64 {
        match self {
            Condition::UnderUtilized => params.target,
            Condition::OnTarget => 0.0,
            Condition::Congested => -congested_delta,
        }
    }
}

/// Rate multipliers indexed by `[previous][current]` condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub multipliers: [[f64; 3]; 3],
}

pub const DEFAULT_CONGESTED_DELTA: f64 = 0.3;

/// Fills the window with the previous condition's delta in the older slots
/// and the current condition's delta in the newest; action slots stay
/// neutral. Deterministic for identical model and conditions.
pub fn probe_policy(
    model: &PolicyModel,
    mapper: &ActionMapper,
    params: &RewardParams,
    window_len: usize,
    congested_delta: f64,
) -> ProbeTable {
    let mut multipliers = [[0.0f64; 3]; 3];
    for (i, prev) in CONDITIONS.iter().enumerate() {
        for (j, cur) in CONDITIONS.iter().enumerate() {
            let mut window = ObservationWindow::new(window_len, prev.delta(params, congested_delta));
            window.push(cur.delta(params, congested_delta), 0.0);
            let y = model.raw_output(window.features());
            multipliers[i][j] = mapper.multiplier(y);
        }
    }
    ProbeTable { multipliers }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignPatternCheck {
    pub label: String,
    pub passed: bool,
}

impl ProbeTable {
    pub fn get(&self, prev: Condition, cur: Condition) -> f64 {
        let idx = |c: Condition| CONDITIONS.iter().position(|x| *x == c).unwrap();
        self.multipliers[idx(prev)][idx(cur)]
    }

    /// The qualitative reaction pattern: raise when under-utilized, hold on
    /// target, cut when congested, and react harder to fresh transitions.
    pub fn sign_pattern_checks(&self) -> Vec<SignPatternCheck> {
        let mut checks = Vec::new();
        for prev in CONDITIONS {
            checks.push(SignPatternCheck {
                label: format!("m({}, under_utilized) > 1", prev.name()),
                passed: self.get(prev, Condition::UnderUtilized) > 1.0,
            });
            checks.push(SignPatternCheck {
                label: format!("m({}, congested) < 1", prev.name()),
                passed: self.get(prev, Condition::Congested) < 1.0,
            });
        }
        let center = self.get(Condition::OnTarget, Condition::OnTarget);
        checks.push(SignPatternCheck {
            label: "m(on_target, on_target) within [0.97, 1.03]".into(),
            passed: (0.97..=1.03).contains(&center),
        });
        checks.push(SignPatternCheck {
            label: "m(congested -> under) > m(under -> under)".into(),
            passed: self.get(Condition::Congested, Condition::UnderUtilized)
                > self.get(Condition::UnderUtilized, Condition::UnderUtilized),
        });
        checks
    }

    pub fn pattern_ok(&self) -> bool {
        self.sign_pattern_checks().iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("prev_condition,under_utilized,on_target,congested\n");
        for (i, prev) in CONDITIONS.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                prev.name(),
                self.multipliers[i][0],
                self.multipliers[i][1],
                self.multipliers[i][2]
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::MlpPolicy;

    #[test]
    fn zero_weight_model_probes_all_ones() {
        let model = PolicyModel::Mlp(MlpPolicy::zeros(10, 16));
        let table = probe_policy(
            &model,
            &ActionMapper::default(),
            &RewardParams::default(),
            5,
            DEFAULT_CONGESTED_DELTA,
        );
        for row in table.multipliers {
            for m in row {
                assert_eq!(m, 1.0);
            }
        }
        // Identity action on target, but the strict orderings fail.
        assert!(!table.pattern_ok());
    }

    #[test]
    fn probe_is_deterministic() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(21);
        let model = PolicyModel::Mlp(MlpPolicy::random(10, 16, 0.3, &mut rng));
        let mapper = ActionMapper::default();
        let params = RewardParams::default();
        let a = probe_policy(&model, &mapper, &params, 5, 0.3);
        let b = probe_policy(&model, &mapper, &params, 5, 0.3);
        assert_eq!(a, b);
    }

    #[test]
    fn hand_built_linear_policy_satisfies_the_pattern() {
        // One hidden unit acting as a near-linear map: positive weight on the
        // newest delta, slightly negative on the older deltas.
        let mut w1 = vec![0.0; 10];
        for k in 0..4 {
            w1[2 * k] = -0.0625; // older delta slots
        }
        w1[8] = 1.0125; // newest delta
        let mlp = MlpPolicy::from_parts(10, 1, w1, vec![0.0], vec![1.0], 0.0).unwrap();
        let table = probe_policy(
            &PolicyModel::Mlp(mlp),
            &ActionMapper::default(),
            &RewardParams::default(),
            5,
            0.3,
        );
        for c in table.sign_pattern_checks() {
            assert!(c.passed, "failed: {}", c.label);
        }
    }
}
