//! C4.5-style binary decision tree over numeric features.
//!
//! Splits are midpoints between consecutive distinct feature values, scored
//! by information gain ratio; candidates are scanned feature by feature and
//! threshold by threshold, and only a strictly better ratio displaces the
//! incumbent, so the chosen tree is invariant under strictly monotone
//! feature transforms (the candidate partitions, and hence all scores, are
//! unchanged). An impure node with any legal candidate always splits, even
//! at zero gain — that is what lets two stacked splits solve XOR-style
//! interactions; `min_leaf` and `max_depth` bound the growth.

use serde::{Deserialize, Serialize};

use crate::ingest::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { min_leaf: 2, max_depth: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Training-label counts; the positive class is Unresolved.
    Leaf { n_pos: usize, n_total: usize },
    /// Rows with `value <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub params: TreeParams,
}

impl TreeModel {
    /// Probability of Unresolved from the reached leaf, Laplace-smoothed:
    /// (n_pos + 1) / (n_total + 2).
    pub fn predict_prob(&self, features: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { n_pos, n_total } => {
                    return (*n_pos as f64 + 1.0) / (*n_total as f64 + 2.0);
                }
                Node::Split { feature, threshold, left, right } => {
                    at = if features[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn entropy(n_pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for count in [n_pos, n - n_pos] {
        if count > 0 {
            let p = count as f64 / n as f64;
            h -= p * p.ln();
        }
    }
    h
}

struct BestSplit {
    ratio: f64,
    feature: usize,
    threshold: f64,
    /// Row indices (into the node's index list) after sorting by the
    /// feature, with the split position.
    sorted: Vec<usize>,
    split_at: usize,
}

fn build(
    nodes: &mut Vec<Node>,
    x: &[Vec<f64>],
    y: &[Label],
    indices: &[usize],
    depth: usize,
    params: &TreeParams,
) -> usize {
    let n = indices.len();
    let n_pos = indices.iter().filter(|&&i| y[i] == Label::Unresolved).count();

    let splittable =
        n_pos != 0 && n_pos != n && depth < params.max_depth && n >= 2 * params.min_leaf;
    let best = if splittable { find_best_split(x, y, indices, params) } else { None };

    match best {
        None => {
            nodes.push(Node::Leaf { n_pos, n_total: n });
            nodes.len() - 1
        }
        Some(split) => {
            let node_at = nodes.len();
            // Placeholder so child indices are known before patching.
            nodes.push(Node::Leaf { n_pos: 0, n_total: 0 });
            let (left_rows, right_rows) = split.sorted.split_at(split.split_at);
            let left = build(nodes, x, y, left_rows, depth + 1, params);
            let right = build(nodes, x, y, right_rows, depth + 1, params);
            nodes[node_at] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            node_at
        }
    }
}

fn find_best_split(
    x: &[Vec<f64>],
    y: &[Label],
    indices: &[usize],
    params: &TreeParams,
) -> Option<BestSplit> {
    let n = indices.len();
    let n_features = x[indices[0]].len();
    let n_pos = indices.iter().filter(|&&i| y[i] == Label::Unresolved).count();
    let parent_entropy = entropy(n_pos, n);

    let mut best: Option<BestSplit> = None;
    for feature in 0..n_features {
        let mut sorted: Vec<usize> = indices.to_vec();
        sorted.sort_by(|&a, &b| {
            x[a][feature].partial_cmp(&x[b][feature]).expect("features are finite")
        });
        let mut left_pos = if y[sorted[0]] == Label::Unresolved { 1 } else { 0 };
        for split_at in 1..n {
            let prev = x[sorted[split_at - 1]][feature];
            let next = x[sorted[split_at]][feature];
            if prev < next && split_at >= params.min_leaf && n - split_at >= params.min_leaf {
                let left_n = split_at;
                let right_n = n - split_at;
                let right_pos = n_pos - left_pos;
                let gain = (parent_entropy
                    - (left_n as f64 / n as f64) * entropy(left_pos, left_n)
                    - (right_n as f64 / n as f64) * entropy(right_pos, right_n))
                .max(0.0);
                let pl = left_n as f64 / n as f64;
                let pr = right_n as f64 / n as f64;
                let split_info = -pl * pl.ln() - pr * pr.ln();
                let ratio = gain / split_info;
                if best.as_ref().map_or(true, |b| ratio > b.ratio) {
                    // Midpoint, nudged down to `prev` if rounding ever
                    // lands it on `next`, so `value <= threshold` always
                    // reproduces this exact partition.
                    let mut threshold = (prev + next) / 2.0;
                    if threshold >= next {
                        threshold = prev;
                    }
                    best = Some(BestSplit {
                        ratio,
                        feature,
                        threshold,
                        sorted: sorted.clone(),
                        split_at,
                    });
                }
            }
            if y[sorted[split_at]] == Label::Unresolved {
                left_pos += 1;
            }
        }
    }
    best
}

/// Grow a tree on dense rows `x` with labels `y`.
pub fn train_tree(x: &[Vec<f64>], y: &[Label], params: TreeParams) -> TreeModel {
    assert_eq!(x.len(), y.len(), "rows and labels must align");
    assert!(!x.is_empty(), "cannot train on an empty matrix");
    let indices: Vec<usize> = (0..x.len()).collect();
    let mut nodes = Vec::new();
    build(&mut nodes, x, y, &indices, 0, &params);
    TreeModel { nodes, params }
}
