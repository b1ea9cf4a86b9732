//! CART fitting with variance-reduction splits and residual boosting.

use crate::error::{Error, Result};
use crate::gbt::{RegressionTree, TraceDataset, TreeEnsemble, TreeNode, OP_BUDGET};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Boosting rounds T.
    pub rounds: usize,
    /// Maximum tree depth D.
    pub max_depth: usize,
    /// Shrinkage applied to every tree's contribution.
    pub shrinkage: f64,
    pub min_leaf: usize,
    /// Candidate split quantiles per feature, computed once from the train
    /// split.
    pub n_thresholds: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            rounds: crate::gbt::DEFAULT_ROUNDS,
            max_depth: crate::gbt::DEFAULT_MAX_DEPTH,
            shrinkage: 0.3,
            min_leaf: 20,
            n_thresholds: 32,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::validation("rounds must be >= 1"));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::validation("shrinkage must lie in (0, 1]"));
        }
        if self.min_leaf == 0 {
            return Err(Error::validation("min_leaf must be >= 1"));
        }
        if self.n_thresholds == 0 {
            return Err(Error::validation("n_thresholds must be >= 1"));
        }
        Ok(())
    }
}

/// Midpoints between consecutive distinct per-feature quantile values of the
/// train split.
fn candidate_thresholds(data: &TraceDataset, cfg: &FitConfig) -> Vec<Vec<f64>> {
    let dim = data.dim();
    let train = data.train_indices();
    let mut out = Vec::with_capacity(dim);
    for f in 0..dim {
        let mut values: Vec<f64> = train.iter().map(|&i| data.feature(i as usize, f)).collect();
        values.sort_by(f64::total_cmp);
        let mut quantiles = Vec::with_capacity(cfg.n_thresholds);
        for q in 1..=cfg.n_thresholds {
            let pos = q * values.len() / (cfg.n_thresholds + 1);
            quantiles.push(values[pos.min(values.len() - 1)]);
        }
        // Distinct boundaries regardless of quantile collisions.
        quantiles.push(values[0]);
        quantiles.push(values[values.len() - 1]);
        quantiles.sort_by(f64::total_cmp);
        quantiles.dedup();
        let thresholds: Vec<f64> = quantiles.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        out.push(thresholds);
    }
    out
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split(
    data: &TraceDataset,
    residuals: &[f64],
    indices: &[u32],
    thresholds: &[Vec<f64>],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = indices.len() as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for &i in indices {
        let r = residuals[i as usize];
        sum += r;
        sumsq += r * r;
    }
    let parent_sse = sumsq - sum * sum / n;
    let mut best: Option<SplitChoice> = None;

    for (feature, cand) in thresholds.iter().enumerate() {
        if cand.is_empty() {
            continue;
        }
        // Bucket b holds samples with threshold[b-1] <= x < threshold[b].
        let buckets = cand.len() + 1;
        let mut count = vec![0usize; buckets];
        let mut bsum = vec![0.0f64; buckets];
        let mut bsumsq = vec![0.0f64; buckets];
        for &i in indices {
            let x = data.feature(i as usize, feature);
            let b = cand.partition_point(|t| x >= *t);
            count[b] += 1;
            let r = residuals[i as usize];
            bsum[b] += r;
            bsumsq[b] += r * r;
        }
        let mut lc = 0usize;
        let mut ls = 0.0;
        let mut lss = 0.0;
        for (b, &t) in cand.iter().enumerate() {
            lc += count[b];
            ls += bsum[b];
            lss += bsumsq[b];
            let rc = indices.len() - lc;
            if lc < min_leaf || rc < min_leaf {
                continue;
            }
            let rs = sum - ls;
            let rss = sumsq - lss;
            let sse = (lss - ls * ls / lc as f64) + (rss - rs * rs / rc as f64);
            let gain = parent_sse - sse;
            if gain > 1e-12 && best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(SplitChoice { feature, threshold: t, gain });
            }
        }
    }
    best
}

fn build_node(
    data: &TraceDataset,
    residuals: &[f64],
    indices: &[u32],
    thresholds: &[Vec<f64>],
    depth: usize,
    cfg: &FitConfig,
) -> TreeNode {
    let mean = indices.iter().map(|&i| residuals[i as usize]).sum::<f64>() / indices.len() as f64;
    if depth >= cfg.max_depth || indices.len() < 2 * cfg.min_leaf {
        return TreeNode::Leaf { value: mean };
    }
    let Some(split) = best_split(data, residuals, indices, thresholds, cfg.min_leaf) else {
        return TreeNode::Leaf { value: mean };
    };
    let (left_idx, right_idx): (Vec<u32>, Vec<u32>) = indices
        .iter()
        .partition(|&&i| data.feature(i as usize, split.feature) < split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(build_node(data, residuals, &left_idx, thresholds, depth + 1, cfg)),
        right: Box::new(build_node(data, residuals, &right_idx, thresholds, depth + 1, cfg)),
    }
}

/// Fits a boosted ensemble to the train split: the base value is the label
/// mean, then each round fits a depth-bounded CART to the current residuals
/// and adds it with shrinkage.
pub fn fit_gbt(data: &TraceDataset, cfg: &FitConfig) -> Result<TreeEnsemble> {
    cfg.validate()?;
    let train = data.train_indices();
    if train.is_empty() {
        return Err(Error::validation("empty train split"));
    }
    let base = train.iter().map(|&i| data.label(i as usize)).sum::<f64>() / train.len() as f64;
    let mut residuals = vec![0.0f64; data.len()];
    for &i in train {
        residuals[i as usize] = data.label(i as usize) - base;
    }
    let thresholds = candidate_thresholds(data, cfg);

    let mut trees = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let root = build_node(data, &residuals, train, &thresholds, 0, cfg);
        let tree = RegressionTree { root };
        debug_assert!(tree.depth() <= cfg.max_depth);
        for &i in train {
            let row = data.row(i as usize);
            residuals[i as usize] -= cfg.shrinkage * tree.predict(row);
        }
        trees.push(tree);
    }

    let ensemble = TreeEnsemble::new(base, cfg.shrinkage, trees, data.dim());
    if ensemble.count_ops() > OP_BUDGET {
        return Err(Error::validation(format!(
            "fitted ensemble needs {} ops, budget is {OP_BUDGET}",
            ensemble.count_ops()
        )));
    }
    Ok(ensemble)
}

/// Root mean squared error of the ensemble on the given split.
pub fn rmse_on(ens: &TreeEnsemble, data: &TraceDataset, indices: &[u32]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let sse: f64 = indices
        .iter()
        .map(|&i| {
            let e = ens.predict(data.row(i as usize)) - data.label(i as usize);
            e * e
        })
        .sum();
    (sse / indices.len() as f64).sqrt()
}
