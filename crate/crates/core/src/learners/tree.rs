//! Greedy CART classifier with weighted Gini impurity.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng;

/// Minimum weighted impurity decrease (relative to the root weight) for a
/// split to be accepted.
pub const MIN_IMPURITY_DECREASE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Fraction of features considered at each node; 1.0 means all.
    pub max_features: f64,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: None, min_samples_leaf: 1, max_features: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { proba: Vec<f64>, weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
    n_classes: usize,
}

struct Task {
    node: usize,
    rows: Vec<usize>,
    depth: usize,
}

fn gini(totals: &[f64], w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    1.0 - totals.iter().map(|t| (t / w) * (t / w)).sum::<f64>()
}

struct Best {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Fits a tree. The effective weight of sample `i` is
/// `sample_weight[i] * class_weight[y[i]]`; both default to 1.
pub fn fit_tree(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    sample_weight: Option<&[f64]>,
    class_weight: Option<&[f64]>,
    params: &TreeParams,
) -> Result<DecisionTree> {
    let n = x.rows();
    let d = x.cols();
    if n == 0 || n != y.len() {
        return Err(Error::Fit(format!("{n} rows but {} labels", y.len())));
    }
    if d == 0 {
        return Err(Error::Fit("no features".into()));
    }
    if y.iter().any(|&c| c >= n_classes) {
        return Err(Error::Fit("label outside class range".into()));
    }
    if !(params.max_features > 0.0 && params.max_features <= 1.0) {
        return Err(Error::invalid_param(format!("max_features={} not in (0,1]", params.max_features)));
    }
    if params.min_samples_leaf == 0 {
        return Err(Error::invalid_param("min_samples_leaf must be >= 1"));
    }
    if let Some(sw) = sample_weight {
        if sw.len() != n {
            return Err(Error::Fit("sample_weight length mismatch".into()));
        }
    }
    if let Some(cw) = class_weight {
        if cw.len() != n_classes {
            return Err(Error::Fit("class_weight length mismatch".into()));
        }
    }
    let w: Vec<f64> = (0..n)
        .map(|i| {
            sample_weight.map_or(1.0, |s| s[i]) * class_weight.map_or(1.0, |c| c[y[i]])
        })
        .collect();
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Fit("weights must be finite and non-negative".into()));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::Fit("total sample weight is zero".into()));
    }

    let n_try = if params.max_features >= 1.0 {
        d
    } else {
        ((params.max_features * d as f64).floor() as usize).clamp(1, d)
    };
    let mut rng = rng::rng(params.seed);
    let msl = params.min_samples_leaf;

    let mut nodes: Vec<Node> = vec![Node::Leaf { proba: Vec::new(), weight: 0.0 }];
    let mut stack = vec![Task { node: 0, rows: (0..n).collect(), depth: 0 }];
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0.0; n_classes];

    while let Some(Task { node, rows, depth }) = stack.pop() {
        let mut totals = vec![0.0; n_classes];
        for &i in &rows {
            totals[y[i]] += w[i];
        }
        let w_node: f64 = totals.iter().sum();
        let pure = totals.iter().filter(|t| **t > 0.0).count() <= 1;
        let depth_ok = params.max_depth.is_none_or(|m| depth < m);
        let mut best: Option<Best> = None;

        if !pure && depth_ok && rows.len() >= 2 * msl {
            let parent_impurity = gini(&totals, w_node);
            let features: Vec<usize> = if n_try == d {
                (0..d).collect()
            } else {
                let mut f = index::sample(&mut rng, d, n_try).into_vec();
                f.sort_unstable();
                f
            };
            for &f in &features {
                sorted.clear();
                sorted.extend(rows.iter().map(|&i| (x.get(i, f), i)));
                sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                if sorted[0].0 == sorted[sorted.len() - 1].0 {
                    continue;
                }
                left.iter_mut().for_each(|v| *v = 0.0);
                let mut w_left = 0.0;
                for p in 1..sorted.len() {
                    let (_, i) = sorted[p - 1];
                    left[y[i]] += w[i];
                    w_left += w[i];
                    let (lo, hi) = (sorted[p - 1].0, sorted[p].0);
                    if lo == hi || p < msl || sorted.len() - p < msl {
                        continue;
                    }
                    let w_right = w_node - w_left;
                    if w_left <= 0.0 || w_right <= 0.0 {
                        continue;
                    }
                    let mut g_left = 0.0;
                    let mut g_right = 0.0;
                    for k in 0..n_classes {
                        let l = left[k];
                        let r = totals[k] - l;
                        g_left += l * l;
                        g_right += r * r;
                    }
                    // Weighted child impurity: W_L*gini_L + W_R*gini_R.
                    let score = (w_left - g_left / w_left) + (w_right - g_right / w_right);
                    if best.as_ref().is_none_or(|b| score < b.score) {
                        let mut threshold = 0.5 * (lo + hi);
                        if threshold >= hi {
                            threshold = lo;
                        }
                        best = Some(Best { feature: f, threshold, score });
                    }
                }
            }
            if let Some(b) = &best {
                let decrease = (w_node * parent_impurity - b.score) / total;
                if decrease <= MIN_IMPURITY_DECREASE {
                    best = None;
                }
            }
        }

        match best {
            Some(b) => {
                let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| x.get(i, b.feature) <= b.threshold);
                let l_id = nodes.len();
                let r_id = l_id + 1;
                nodes.push(Node::Leaf { proba: Vec::new(), weight: 0.0 });
                nodes.push(Node::Leaf { proba: Vec::new(), weight: 0.0 });
                nodes[node] =
                    Node::Split { feature: b.feature, threshold: b.threshold, left: l_id, right: r_id };
                // Right pushed first so the left subtree is built first.
                stack.push(Task { node: r_id, rows: r_rows, depth: depth + 1 });
                stack.push(Task { node: l_id, rows: l_rows, depth: depth + 1 });
            }
            None => {
                let proba = totals.iter().map(|t| t / w_node).collect();
                nodes[node] = Node::Leaf { proba, weight: w_node };
            }
        }
    }
    Ok(DecisionTree { nodes, n_features: d, n_classes })
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Leaf distribution reached by `x`.
    pub fn leaf_proba(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { proba, .. } => return proba,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: x.cols() });
        }
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        for (i, row) in x.iter_rows().enumerate() {
            out.row_mut(i).copy_from_slice(self.leaf_proba(row));
        }
        Ok(out)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_proba(x)?))
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in v.iter().enumerate().skip(1) {
        if p > v[best] {
            best = i;
        }
    }
    best
}

pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    m.iter_rows().map(argmax).collect()
}
