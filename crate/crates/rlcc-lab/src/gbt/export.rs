//! Ensemble serialization: structured description file and if-else
//! pseudocode export.
//!
//! The description lists every node in preorder as
//! `tree,node,kind,feature,threshold|value`; a load reconstructs the exact
//! tree shapes, and 17-significant-digit floats make predictions round-trip
//! bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gbt::{RegressionTree, TreeEnsemble, TreeNode};

const MAGIC: &str = "rlcc-ensemble v1";

#[derive(Debug, Clone)]
pub struct ExportedSource {
    pub description: String,
    pub pseudocode: String,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl TreeEnsemble {
    pub fn to_description_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "trees {}", self.trees.len());
        let _ = writeln!(out, "max_depth {}", self.max_depth());
        let _ = writeln!(out, "shrinkage {}", fmt_f64(self.shrinkage));
        let _ = writeln!(out, "base {}", fmt_f64(self.base));
        let _ = writeln!(out, "op_count {}", self.op_count);
        let _ = writeln!(out, "input_dim {}", self.input_dim);
        let _ = writeln!(out, "nodes");
        for (t, tree) in self.trees.iter().enumerate() {
            let mut next_id = 0usize;
            write_node(&mut out, &tree.root, t, &mut next_id);
        }
        out
    }

    pub fn from_description_text(text: &str) -> Result<Self> {
        let ctx = "ensemble description";
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let magic = lines.next().ok_or_else(|| Error::parse(ctx, "empty file"))?;
        if magic != MAGIC {
            return Err(Error::parse(ctx, format!("unknown format: {magic:?}")));
        }
        let mut header = |name: &str| -> Result<f64> {
            let line = lines.next().ok_or_else(|| Error::parse(ctx, format!("missing {name}")))?;
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(ctx, format!("malformed {name}")))?;
            if key != name {
                return Err(Error::parse(ctx, format!("expected {name}, found {key}")));
            }
            value.parse::<f64>().map_err(|e| Error::parse(ctx, format!("{name}: {e}")))
        };
        let n_trees = header("trees")? as usize;
        let max_depth = header("max_depth")? as usize;
        let shrinkage = header("shrinkage")?;
        let base = header("base")?;
        let op_count = header("op_count")? as usize;
        let input_dim = header("input_dim")? as usize;
        match lines.next() {
            Some("nodes") => {}
            other => return Err(Error::parse(ctx, format!("expected nodes, found {other:?}"))),
        }

        let mut records: Vec<(usize, NodeRecord)> = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::parse(ctx, format!("bad node line: {line:?}")));
            }
            let tree: usize = fields[0].parse().map_err(|_| Error::parse(ctx, "bad tree id"))?;
            let record = match fields[2] {
                "split" => NodeRecord::Split {
                    feature: fields[3].parse().map_err(|_| Error::parse(ctx, "bad feature"))?,
                    threshold: fields[4].parse().map_err(|_| Error::parse(ctx, "bad threshold"))?,
                },
                "leaf" => NodeRecord::Leaf {
                    value: fields[4].parse().map_err(|_| Error::parse(ctx, "bad leaf value"))?,
                },
                other => return Err(Error::parse(ctx, format!("bad node kind {other:?}"))),
            };
            records.push((tree, record));
        }

        let mut trees = Vec::with_capacity(n_trees);
        let mut cursor = 0usize;
        for t in 0..n_trees {
            let root = parse_preorder(&records, &mut cursor, t)
                .ok_or_else(|| Error::parse(ctx, format!("truncated tree {t}")))?;
            trees.push(RegressionTree { root });
        }
        if cursor != records.len() {
            return Err(Error::parse(ctx, "trailing nodes after last tree"));
        }
        let ens = TreeEnsemble::new(base, shrinkage, trees, input_dim);
        if ens.op_count != op_count {
            return Err(Error::parse(
                ctx,
                format!("op_count certificate mismatch: header {op_count}, actual {}", ens.op_count),
            ));
        }
        if ens.max_depth() != max_depth {
            return Err(Error::parse(ctx, "max_depth header mismatch"));
        }
        Ok(ens)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_description_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::parse("ensemble description", format!("{}: {e}", path.as_ref().display()))
        })?;
        Self::from_description_text(&text)
    }
}

enum NodeRecord {
    Split { feature: usize, threshold: f64 },
    Leaf { value: f64 },
}

fn write_node(out: &mut String, node: &TreeNode, tree: usize, next_id: &mut usize) {
    let id = *next_id;
    *next_id += 1;
    match node {
        TreeNode::Split { feature, threshold, left, right } => {
            let _ = writeln!(out, "{tree},{id},split,{feature},{}", fmt_f64(*threshold));
            write_node(out, left, tree, next_id);
            write_node(out, right, tree, next_id);
        }
        TreeNode::Leaf { value } => {
            let _ = writeln!(out, "{tree},{id},leaf,,{}", fmt_f64(*value));
        }
    }
}

fn parse_preorder(records: &[(usize, NodeRecord)], cursor: &mut usize, tree: usize) -> Option<TreeNode> {
    let (t, record) = records.get(*cursor)?;
    if *t != tree {
        return None;
    }
    *cursor += 1;
    match record {
        NodeRecord::Leaf { value } => Some(TreeNode::Leaf { value: *value }),
        NodeRecord::Split { feature, threshold } => {
            let left = parse_preorder(records, cursor, tree)?;
            let right = parse_preorder(records, cursor, tree)?;
            Some(TreeNode::Split {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
    }
}

fn write_pseudocode_node(out: &mut String, node: &TreeNode, indent: usize) {
    let pad = "  ".repeat(indent);
    match node {
        TreeNode::Leaf { value } => {
            let _ = writeln!(out, "{pad}t = {}", fmt_f64(*value));
        }
        TreeNode::Split { feature, threshold, left, right } => {
            let _ = writeln!(out, "{pad}if f[{feature}] < {} {{", fmt_f64(*threshold));
            write_pseudocode_node(out, left, indent + 1);
            let _ = writeln!(out, "{pad}}} else {{");
            write_pseudocode_node(out, right, indent + 1);
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

/// Emits the structured description plus language-neutral nested if-else
/// pseudocode accumulating the trees into a single scalar.
pub fn export_tree_source(ens: &TreeEnsemble) -> ExportedSource {
    let mut code = String::new();
    let _ = writeln!(code, "# distilled rate controller: raw output in log-multiplier space");
    let _ = writeln!(code, "# inputs: f[0..{})", ens.input_dim);
    let _ = writeln!(code, "value = {}", fmt_f64(ens.base));
    for (t, tree) in ens.trees.iter().enumerate() {
        let _ = writeln!(code, "# tree {t}");
        write_pseudocode_node(&mut code, &tree.root, 0);
        let _ = writeln!(code, "value += {} * t", fmt_f64(ens.shrinkage));
    }
    let _ = writeln!(code, "return value");
    ExportedSource {
        description: ens.to_description_text(),
        pseudocode: code,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tree(rng: &mut ChaCha8Rng, depth: usize, dim: usize) -> TreeNode {
        if depth == 0 || rng.gen_bool(0.3) {
            TreeNode::Leaf { value: rng.gen_range(-1.0..1.0) }
        } else {
            TreeNode::Split {
                feature: rng.gen_range(0..dim),
                threshold: rng.gen_range(-1.0..1.0),
                left: Box::new(random_tree(rng, depth - 1, dim)),
                right: Box::new(random_tree(rng, depth - 1, dim)),
            }
        }
    }

    fn random_ensemble(seed: u64) -> TreeEnsemble {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees: Vec<RegressionTree> = (0..8)
            .map(|_| RegressionTree { root: random_tree(&mut rng, 4, 10) })
            .collect();
        TreeEnsemble::new(rng.gen_range(-0.5..0.5), 0.3, trees, 10)
    }

    #[test]
    fn zero_tree_export_is_a_constant_return() {
        let ens = TreeEnsemble::new(0.125, 0.3, vec![], 10);
        let src = export_tree_source(&ens);
        assert!(src.pseudocode.contains("value = 1.2500000000000000e-1"));
        assert!(src.pseudocode.trim_end().ends_with("return value"));
        assert!(!src.pseudocode.contains("if "));
    }

    #[test]
    fn round_trip_reproduces_predictions_bit_exactly() {
        let ens = random_ensemble(3);
        let text = ens.to_description_text();
        let loaded = TreeEnsemble::from_description_text(&text).unwrap();
        assert_eq!(ens, loaded);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect();
            assert_eq!(ens.predict(&x).to_bits(), loaded.predict(&x).to_bits());
        }
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let ens = random_ensemble(5);
        let text = ens
            .to_description_text()
            .replace(&format!("op_count {}", ens.op_count), "op_count 1");
        assert!(TreeEnsemble::from_description_text(&text).is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(TreeEnsemble::from_description_text("").is_err());
        assert!(TreeEnsemble::from_description_text("bogus").is_err());
        let ens = random_ensemble(7);
        let text = ens.to_description_text();
        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..lines.len() - 1].join("\n");
        assert!(TreeEnsemble::from_description_text(&truncated).is_err());
    }
}
