//! Teacher trace collection for distillation.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::policy::{
    ActionMapper, DecisionSink, PolicyCheckpoint, PolicyModel, RewardParams, RlccController,
    RlccShared,
};
use crate::sim::{build_scenario, ScenarioSpec, SimConfig};

/// Supervised dataset of (flattened window, teacher raw output) pairs, with
/// a deterministic 80/20 train/held-out split.
#[derive(Debug, Clone, Default)]
pub struct TraceDataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    train: Vec<u32>,
    heldout: Vec<u32>,
}

impl TraceDataset {
    pub fn from_rows(dim: usize, rows: &[(Vec<f64>, f64)], train: &[u32], heldout: &[u32]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * dim);
        let mut labels = Vec::with_capacity(rows.len());
        for (x, y) in rows {
            assert_eq!(x.len(), dim);
            features.extend_from_slice(x);
            labels.push(*y);
        }
        TraceDataset {
            dim,
            features,
            labels,
            train: train.to_vec(),
            heldout: heldout.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn feature(&self, i: usize, f: usize) -> f64 {
        self.features[i * self.dim + f]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn train_indices(&self) -> &[u32] {
        &self.train
    }

    pub fn heldout_indices(&self) -> &[u32] {
        &self.heldout
    }

    pub fn validate_finite(&self) -> Result<()> {
        if self.features.iter().chain(self.labels.iter()).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("trace dataset".into()))
        }
    }
}

fn fnv1a(x: u64) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in x.to_le_bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Sink that records every (window, raw output) decision the teacher makes.
struct TraceSink {
    rows: Vec<(Vec<f64>, f64)>,
}

impl DecisionSink for TraceSink {
    fn on_decision(
        &mut self,
        _: &mut PolicyModel,
        _: &ActionMapper,
        features: &[f64],
        _: f64,
        raw_output: f64,
    ) {
        self.rows.push((features.to_vec(), raw_output));
    }
}

/// Runs each scenario closed-loop under the frozen teacher and gathers all
/// decisions, deduplicating exact repeats. Errors if fewer than `n_samples`
/// distinct decisions were observed across the whole suite.
pub fn collect_traces(
    teacher: &PolicyCheckpoint,
    params: RewardParams,
    scenarios: &[ScenarioSpec],
    cfg: &SimConfig,
    n_samples: usize,
) -> Result<TraceDataset> {
    let dim = teacher.mlp.input_dim();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();

    for (k, spec) in scenarios.iter().enumerate() {
        let run_cfg = SimConfig {
            seed: cfg.seed.wrapping_add(k as u64),
            ..cfg.clone()
        };
        let shared = RlccShared::new(
            PolicyModel::Mlp(teacher.mlp.clone()),
            teacher.mapper,
            TraceSink { rows: Vec::new() },
        );
        let mut engine = build_scenario(spec, &run_cfg, &mut |_| {
            Box::new(RlccController::new(shared.clone(), params, teacher.window_len))
        })?;
        engine.run(spec.duration_us)?;
        let sink_rows = std::mem::take(&mut shared.borrow_mut().sink.rows);
        for (x, y) in sink_rows {
            let mut key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
            key.push(y.to_bits());
            if seen.insert(key) {
                rows.push((x, y));
            }
        }
    }

    if rows.len() < n_samples {
        return Err(Error::validation(format!(
            "insufficient samples: collected {} distinct decisions, need {n_samples}",
            rows.len()
        )));
    }

    let mut train = Vec::new();
    let mut heldout = Vec::new();
    for i in 0..rows.len() {
        if fnv1a(i as u64) % 5 == 0 {
            heldout.push(i as u32);
        } else {
            train.push(i as u32);
        }
    }
    let data = TraceDataset::from_rows(dim, &rows, &train, &heldout);
    data.validate_finite()?;
    Ok(data)
}
