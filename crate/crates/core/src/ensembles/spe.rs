use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::bagging::balanced_draw;
use super::model::{Combiner, Ensemble, Estimator, Member};
use crate::data::{ClassDistribution, Dataset, Matrix};
use crate::error::{Error, Result};
use crate::learners::{argmax, fit_tree, DecisionTree, TreeParams};
use crate::rng::{self, Rng};
use crate::util::largest_remainder;

const ALPHA_CAP: f64 = 1e12;
const HARDNESS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeParams {
    pub n_estimators: usize,
    pub k_bins: usize,
    pub base: TreeParams,
}

impl Default for SpeParams {
    fn default() -> Self {
        SpeParams { n_estimators: 100, k_bins: 5, base: TreeParams::default() }
    }
}

/// Self-paced factor `tan(i π / (2 (T − 1)))`, capped.
pub fn self_paced_alpha(i: usize, t: usize) -> f64 {
    if t <= 1 {
        return 0.0;
    }
    let a = (i as f64 * std::f64::consts::PI / (2.0 * (t - 1) as f64)).tan();
    if a.is_finite() && a >= 0.0 {
        a.min(ALPHA_CAP)
    } else {
        ALPHA_CAP
    }
}

/// Per-bin sample counts for one class: equal-width hardness bins, weight
/// `1 / (mean hardness + alpha)` on non-empty bins, largest-remainder
/// rounding to `total`. Returns (bin members, count) pairs.
pub fn hardness_bins(
    rows: &[usize],
    hardness: &[f64],
    k_bins: usize,
    alpha: f64,
    total: usize,
) -> Vec<(Vec<usize>, usize)> {
    let lo = rows.iter().map(|&i| hardness[i]).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|&i| hardness[i]).fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); k_bins];
    for &i in rows {
        let b = if width > 0.0 {
            (((hardness[i] - lo) / width * k_bins as f64).floor() as usize).min(k_bins - 1)
        } else {
            0
        };
        bins[b].push(i);
    }
    bins.retain(|b| !b.is_empty());
    let weights: Vec<f64> = bins
        .iter()
        .map(|b| {
            let mean = b.iter().map(|&i| hardness[i]).sum::<f64>() / b.len() as f64;
            1.0 / (mean + alpha).max(HARDNESS_FLOOR)
        })
        .collect();
    let counts = largest_remainder(&weights, total);
    bins.into_iter().zip(counts).collect()
}

fn draw(members: &[usize], count: usize, r: &mut Rng) -> Vec<usize> {
    if count <= members.len() {
        index::sample(r, members.len(), count).into_iter().map(|p| members[p]).collect()
    } else {
        (0..count).map(|_| members[r.gen_range(0..members.len())]).collect()
    }
}

fn fit_on(ds: &Dataset, rows: &mut Vec<usize>, params: &TreeParams) -> Result<DecisionTree> {
    rows.sort_unstable();
    let view = ds.select(rows);
    fit_tree(view.features(), view.labels(), ds.n_classes(), None, None, params)
}

fn accumulate(sum: &mut Matrix, tree: &DecisionTree, x: &Matrix) {
    for i in 0..x.rows() {
        let p = tree.leaf_proba(x.row(i));
        sum.row_mut(i).iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
}

fn finish(trees: Vec<DecisionTree>, ds: &Dataset) -> Result<Ensemble> {
    let members = trees.into_iter().map(|t| Member::new(Estimator::Tree(t), 1.0)).collect();
    Ensemble::new(members, Combiner::MeanProba, ds.n_classes(), ds.n_features())
}

/// Self-paced ensemble. Member 0 is trained on a random balanced subset;
/// each later member samples every non-minority class by hardness bins
/// under the current ensemble.
pub fn fit_self_paced_ensemble(ds: &Dataset, params: &SpeParams, seed: u64) -> Result<Ensemble> {
    let t_max = params.n_estimators;
    if t_max == 0 {
        return Err(Error::invalid_param("n_estimators must be >= 1"));
    }
    if params.k_bins < 1 {
        return Err(Error::invalid_param("k_bins must be >= 1"));
    }
    let dist = ClassDistribution::from_labels(ds.labels(), ds.n_classes())?;
    let minority = dist.minority_id;
    let n_min = dist.minority_count();
    let classes = ds.class_indices();
    let mut sum = Matrix::zeros(ds.n_samples(), ds.n_classes());
    let mut trees = Vec::with_capacity(t_max);
    for i in 0..t_max {
        let mut r = rng::rng(rng::child(seed, "spe", i as u64));
        let tree_params = TreeParams { seed: rng::child(seed, "spe-tree", i as u64), ..params.base.clone() };
        let mut rows = if i == 0 {
            balanced_draw(ds, &dist, 1.0, false, &mut r)
        } else {
            let hardness: Vec<f64> = (0..ds.n_samples())
                .map(|j| 1.0 - sum.get(j, ds.labels()[j]) / i as f64)
                .collect();
            let alpha = self_paced_alpha(i, t_max);
            let mut rows = classes[minority].clone();
            for (c, members) in classes.iter().enumerate() {
                if c == minority || members.is_empty() {
                    continue;
                }
                for (bin, count) in hardness_bins(members, &hardness, params.k_bins, alpha, n_min) {
                    rows.extend(draw(&bin, count, &mut r));
                }
            }
            rows
        };
        let tree = fit_on(ds, &mut rows, &tree_params)?;
        accumulate(&mut sum, &tree, ds.features());
        trees.push(tree);
    }
    finish(trees, ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeParams {
    pub n_estimators: usize,
    pub replacement: bool,
    pub base: TreeParams,
}

impl Default for CascadeParams {
    fn default() -> Self {
        CascadeParams { n_estimators: 100, replacement: false, base: TreeParams::default() }
    }
}

/// Target pool size after iteration `i` for an initial pool of `pool0`.
pub fn cascade_pool_target(pool0: usize, minority: usize, i: usize, t: usize) -> usize {
    if t <= 1 || pool0 <= minority {
        return pool0.max(minority).min(pool0);
    }
    let ratio = minority as f64 / pool0 as f64;
    let size = (pool0 as f64 * ratio.powf((i + 1) as f64 / (t - 1) as f64)).round() as usize;
    size.max(minority)
}

/// Balance cascade. Each non-minority class keeps a pool; after every
/// member the easiest correctly classified pool rows are dropped down to a
/// geometric schedule that reaches the minority count at the last member.
pub fn fit_balance_cascade(ds: &Dataset, params: &CascadeParams, seed: u64) -> Result<Ensemble> {
    let t_max = params.n_estimators;
    if t_max == 0 {
        return Err(Error::invalid_param("n_estimators must be >= 1"));
    }
    let dist = ClassDistribution::from_labels(ds.labels(), ds.n_classes())?;
    let minority = dist.minority_id;
    let n_min = dist.minority_count();
    let classes = ds.class_indices();
    let mut pools: Vec<Vec<usize>> = classes.clone();
    let mut sum = Matrix::zeros(ds.n_samples(), ds.n_classes());
    let mut trees = Vec::with_capacity(t_max);
    for i in 0..t_max {
        let mut r = rng::rng(rng::child(seed, "cascade", i as u64));
        let tree_params = TreeParams { seed: rng::child(seed, "cascade-tree", i as u64), ..params.base.clone() };
        let mut rows = classes[minority].clone();
        for (c, pool) in pools.iter().enumerate() {
            if c == minority || pool.is_empty() {
                continue;
            }
            if params.replacement {
                rows.extend((0..n_min).map(|_| pool[r.gen_range(0..pool.len())]));
            } else {
                rows.extend(draw(pool, n_min, &mut r));
            }
        }
        let tree = fit_on(ds, &mut rows, &tree_params)?;
        accumulate(&mut sum, &tree, ds.features());
        trees.push(tree);
        if i + 1 == t_max {
            break;
        }
        for (c, pool) in pools.iter_mut().enumerate() {
            if c == minority || pool.is_empty() {
                continue;
            }
            let target = cascade_pool_target(classes[c].len(), n_min, i, t_max);
            if pool.len() <= target {
                continue;
            }
            let mut easy: Vec<(f64, usize)> = pool
                .iter()
                .filter(|&&j| argmax(sum.row(j)) == c)
                .map(|&j| (sum.get(j, c), j))
                .collect();
            easy.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let drop: std::collections::HashSet<usize> =
                easy.into_iter().take(pool.len() - target).map(|(_, j)| j).collect();
            pool.retain(|j| !drop.contains(j));
        }
    }
    finish(trees, ds)
}
