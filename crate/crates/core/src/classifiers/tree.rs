//! Weighted CART-style binary tree grown on Gini impurity.
//!
//! Splits send `value <= threshold` left. Thresholds are midpoints between
//! consecutive distinct feature values. Nodes are stored in preorder.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Decreases closer than this are treated as ties; a split must beat this
/// to count as an improvement at all.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_samples_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        neg_weight: f64,
        pos_weight: f64,
        prob: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        neg_weight: f64,
        pos_weight: f64,
        /// Weighted Gini decrease of this split, as a fraction of root weight.
        impurity_decrease: f64,
    },
}

impl TreeNode {
    pub fn class_weights(&self) -> (f64, f64) {
        match *self {
            TreeNode::Leaf {
                neg_weight,
                pos_weight,
                ..
            }
            | TreeNode::Split {
                neg_weight,
                pos_weight,
                ..
            } => (neg_weight, pos_weight),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub params: TreeParams,
    pub nodes: Vec<TreeNode>,
    pub gini_reduction_per_feature: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Node-local decrease: `gini(node) - sum_child (W_child/W_node) gini(child)`.
    pub impurity_decrease: f64,
}

/// `1 - sum_c p_c^2` over the weighted class frequencies.
pub fn gini(neg_weight: f64, pos_weight: f64) -> Result<f64> {
    let total = neg_weight + pos_weight;
    if !(total > 0.0) || neg_weight < 0.0 || pos_weight < 0.0 {
        return Err(Error::Data("Gini index of an empty node".into()));
    }
    Ok(gini_unchecked(neg_weight, pos_weight))
}

fn gini_unchecked(neg: f64, pos: f64) -> f64 {
    let total = neg + pos;
    let (a, b) = (neg / total, pos / total);
    1.0 - a * a - b * b
}

fn class_weights(ds: &Dataset, rows: &[usize], weights: &[f64]) -> (f64, f64) {
    rows.iter().fold((0.0, 0.0), |(n, p), &i| {
        if ds.label(i) == 1 {
            (n, p + weights[i])
        } else {
            (n + weights[i], p)
        }
    })
}

/// Exhaustive search over every feature and every midpoint between
/// consecutive distinct values of `rows`. Returns the split with the largest
/// weighted Gini decrease, or `None` when no split improves on the node.
/// Ties go to the lower feature index, then the lower threshold.
pub fn best_split(ds: &Dataset, rows: &[usize], weights: &[f64], min_samples_leaf: usize) -> Option<SplitCandidate> {
    let min_leaf = min_samples_leaf.max(1);
    if rows.len() < 2 * min_leaf {
        return None;
    }
    let (node_neg, node_pos) = class_weights(ds, rows, weights);
    let node_w = node_neg + node_pos;
    if !(node_w > 0.0) {
        return None;
    }
    let node_gini = gini_unchecked(node_neg, node_pos);
    if node_gini <= 0.0 {
        return None;
    }
    let mut best: Option<SplitCandidate> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for feature in 0..ds.n_features() {
        sorted.clear();
        sorted.extend(rows.iter().map(|&i| (ds.value(i, feature), i)));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut left_neg, mut left_pos) = (0.0, 0.0);
        for k in 0..sorted.len() - 1 {
            let (value, i) = sorted[k];
            if ds.label(i) == 1 {
                left_pos += weights[i];
            } else {
                left_neg += weights[i];
            }
            let next = sorted[k + 1].0;
            let left_count = k + 1;
            if left_count < min_leaf || sorted.len() - left_count < min_leaf || !(value < next) {
                continue;
            }
            let (right_neg, right_pos) = (node_neg - left_neg, node_pos - left_pos);
            let left_w = left_neg + left_pos;
            let right_w = right_neg + right_pos;
            if !(left_w > 0.0) || !(right_w > 0.0) {
                continue;
            }
            let children = (left_w * gini_unchecked(left_neg, left_pos)
                + right_w * gini_unchecked(right_neg.max(0.0), right_pos.max(0.0)))
                / node_w;
            let decrease = node_gini - children;
            let improves = match best {
                None => decrease > TIE_EPS,
                Some(b) => decrease > b.impurity_decrease + TIE_EPS,
            };
            if improves {
                let mut threshold = 0.5 * (value + next);
                if threshold >= next {
                    threshold = value;
                }
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    impurity_decrease: decrease,
                });
            }
        }
    }
    best
}

struct Grower<'a> {
    ds: &'a Dataset,
    weights: &'a [f64],
    params: TreeParams,
    root_weight: f64,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (neg, pos) = class_weights(self.ds, &rows, self.weights);
        let split = if depth < self.params.max_depth {
            best_split(self.ds, &rows, self.weights, self.params.min_samples_leaf)
        } else {
            None
        };
        let id = self.nodes.len();
        let Some(split) = split else {
            let total = neg + pos;
            let prob = if total > 0.0 { pos / total } else { 0.5 };
            self.nodes.push(TreeNode::Leaf {
                neg_weight: neg,
                pos_weight: pos,
                prob,
            });
            return id;
        };
        let scaled = split.impurity_decrease * (neg + pos) / self.root_weight;
        self.importance[split.feature] += scaled;
        // Placeholder, patched once both children have ids.
        self.nodes.push(TreeNode::Leaf {
            neg_weight: neg,
            pos_weight: pos,
            prob: 0.0,
        });
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.ds.value(i, split.feature) <= split.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            neg_weight: neg,
            pos_weight: pos,
            impurity_decrease: scaled,
        };
        id
    }
}

/// Grows a tree on `ds` with optional per-row `weights` (unit weights when
/// `None`). Data holding a single class yields a single leaf.
pub fn train_tree(ds: &Dataset, weights: Option<&[f64]>, params: &TreeParams) -> Result<DecisionTree> {
    if ds.is_empty() {
        return Err(Error::Data("cannot grow a tree on an empty dataset".into()));
    }
    if ds.features().iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("tree features must not contain missing values".into()));
    }
    let unit;
    let weights = match weights {
        Some(w) => {
            if w.len() != ds.n_rows() {
                return Err(Error::param("weights", "length must equal the row count"));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::param("weights", "must be finite and non-negative"));
            }
            w
        }
        None => {
            unit = vec![1.0; ds.n_rows()];
            &unit
        }
    };
    let root_weight: f64 = weights.iter().sum();
    if !(root_weight > 0.0) {
        return Err(Error::param("weights", "total weight must be positive"));
    }
    let mut grower = Grower {
        ds,
        weights,
        params: *params,
        root_weight,
        nodes: Vec::new(),
        importance: vec![0.0; ds.n_features()],
    };
    grower.grow((0..ds.n_rows()).collect(), 0);
    Ok(DecisionTree {
        n_features: ds.n_features(),
        params: *params,
        nodes: grower.nodes,
        gini_reduction_per_feature: grower.importance,
    })
}

/// Leaf probability reached by descending from the root.
pub fn tree_predict(tree: &DecisionTree, x: &[f64]) -> Result<f64> {
    if x.len() != tree.n_features {
        return Err(Error::DimensionMismatch {
            expected: tree.n_features,
            got: x.len(),
        });
    }
    Ok(tree.leaf_prob(x))
}

impl DecisionTree {
    pub(crate) fn leaf_prob(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                TreeNode::Leaf { prob, .. } => return prob,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Root Gini minus the root-weight-fraction-weighted Gini of the leaves.
    pub fn total_impurity_decrease(&self) -> f64 {
        let (rn, rp) = self.nodes[0].class_weights();
        let root_w = rn + rp;
        let leaves: f64 = self
            .nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .map(|n| {
                let (neg, pos) = n.class_weights();
                if neg + pos > 0.0 {
                    (neg + pos) / root_w * gini_unchecked(neg, pos)
                } else {
                    0.0
                }
            })
            .sum();
        gini_unchecked(rn, rp) - leaves
    }

    /// Split features and thresholds in preorder.
    pub fn structure(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                TreeNode::Split { feature, threshold, .. } => Some((feature, threshold)),
                TreeNode::Leaf { .. } => None,
            })
            .collect()
    }
}
