//! Binary regression trees and the boosted ensemble.

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        /// Taken when `x[feature] < threshold`.
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if x[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    /// Worst-case number of comparisons on a root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub root: TreeNode,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree { root: TreeNode::Leaf { value } }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.root.evaluate(x)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

/// Boosted ensemble: `y = base + shrinkage * sum_t tree_t(x)`, with a
/// worst-case operation-count certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub base: f64,
    pub shrinkage: f64,
    pub trees: Vec<RegressionTree>,
    pub input_dim: usize,
    /// Certificate computed at fit/load time; always equals `count_ops()`.
    pub op_count: usize,
}

impl TreeEnsemble {
    pub fn new(base: f64, shrinkage: f64, trees: Vec<RegressionTree>, input_dim: usize) -> Self {
        let mut ens = TreeEnsemble { base, shrinkage, trees, input_dim, op_count: 0 };
        ens.op_count = ens.count_ops();
        ens
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.input_dim);
        let mut acc = 0.0;
        for tree in &self.trees {
            acc += tree.predict(x);
        }
        self.base + self.shrinkage * acc
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(RegressionTree::depth).max().unwrap_or(0)
    }

    /// Conservative worst-case inference cost: one comparison per split level
    /// of each tree (worst path), one add per tree's leaf value, one add for
    /// the base value.
    pub fn count_ops(&self) -> usize {
        let comparisons: usize = self.trees.iter().map(RegressionTree::depth).sum();
        comparisons + self.trees.len() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump(feature: usize, threshold: f64, lo: f64, hi: f64) -> RegressionTree {
        RegressionTree {
            root: TreeNode::Split {
                feature,
                threshold,
                left: Box::new(TreeNode::Leaf { value: lo }),
                right: Box::new(TreeNode::Leaf { value: hi }),
            },
        }
    }

    #[test]
    fn empty_ensemble_predicts_base() {
        let ens = TreeEnsemble::new(0.42, 0.3, vec![], 4);
        assert_eq!(ens.predict(&[0.0; 4]), 0.42);
        assert_eq!(ens.count_ops(), 1);
    }

    #[test]
    fn stump_ops_and_prediction() {
        let ens = TreeEnsemble::new(0.0, 1.0, vec![stump(0, 0.5, -0.5, 0.5)], 1);
        assert_eq!(ens.count_ops(), 3);
        assert_eq!(ens.predict(&[0.0]), -0.5);
        assert_eq!(ens.predict(&[1.0]), 0.5);
        // Ties go right: x >= threshold.
        assert_eq!(ens.predict(&[0.5]), 0.5);
    }

    #[test]
    fn worst_case_budget_configuration() {
        // Ten full trees of depth exactly four.
        fn full(depth: usize) -> TreeNode {
            if depth == 0 {
                TreeNode::Leaf { value: 1.0 }
            } else {
                TreeNode::Split {
                    feature: 0,
                    threshold: 0.0,
                    left: Box::new(full(depth - 1)),
                    right: Box::new(full(depth - 1)),
                }
            }
        }
        let trees: Vec<RegressionTree> =
            (0..10).map(|_| RegressionTree { root: full(4) }).collect();
        let ens = TreeEnsemble::new(0.0, 0.3, trees, 10);
        assert_eq!(ens.count_ops(), 10 * 4 + 10 + 1);
        assert_eq!(ens.count_ops(), 51);
        assert!(ens.count_ops() <= crate::gbt::OP_BUDGET);
        assert_eq!(ens.op_count, ens.count_ops());
    }

    #[test]
    fn shrinkage_scales_tree_sum_not_base() {
        let ens = TreeEnsemble::new(1.0, 0.5, vec![stump(0, 0.0, -2.0, 2.0)], 1);
        assert_eq!(ens.predict(&[1.0]), 1.0 + 0.5 * 2.0);
        assert_eq!(ens.predict(&[-1.0]), 1.0 - 0.5 * 2.0);
    }
}
