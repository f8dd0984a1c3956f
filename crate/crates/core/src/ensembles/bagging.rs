use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boost::{fit_adaboost, Algorithm, BoostParams};
use super::model::{Combiner, Ensemble, Estimator, Member};
use crate::data::{ClassDistribution, Dataset};
use crate::error::{Error, Result};
use crate::learners::{fit_tree, TreeParams};
use crate::rng::{self, Rng};
use crate::samplers::{self, SamplerKind, SamplerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaggingKind {
    UnderBagging,
    OverBagging,
    SmoteBagging,
    Brf,
}

impl BaggingKind {
    pub fn tag(self) -> &'static str {
        match self {
            BaggingKind::UnderBagging => "uba",
            BaggingKind::OverBagging => "oba",
            BaggingKind::SmoteBagging => "smba",
            BaggingKind::Brf => "brf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub n_estimators: usize,
    pub max_samples: f64,
    pub max_features: f64,
    /// SMOTE neighbours for SMOTEBagging.
    pub k_neighbors: usize,
    pub base: TreeParams,
}

impl Default for BaggingParams {
    fn default() -> Self {
        BaggingParams {
            n_estimators: 100,
            max_samples: 1.0,
            max_features: 1.0,
            k_neighbors: 5,
            base: TreeParams::default(),
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::invalid_param(format!("{name}={v} not in (0, 1]")));
    }
    Ok(())
}

/// Sorted random column subset of size `max(1, floor(frac * d))`, or `None`
/// when every column is kept.
pub(crate) fn feature_subset(d: usize, frac: f64, r: &mut Rng) -> Option<Vec<usize>> {
    let m = ((frac * d as f64).floor() as usize).clamp(1, d);
    if m == d {
        return None;
    }
    let mut cols = index::sample(r, d, m).into_vec();
    cols.sort_unstable();
    Some(cols)
}

/// Per-class draw of `ceil(max_samples * minority)` rows.
pub(crate) fn balanced_draw(
    ds: &Dataset,
    dist: &ClassDistribution,
    max_samples: f64,
    replace: bool,
    r: &mut Rng,
) -> Vec<usize> {
    let per_class = ((max_samples * dist.minority_count() as f64).ceil() as usize).max(1);
    let mut rows = Vec::new();
    for members in ds.class_indices() {
        if members.is_empty() {
            continue;
        }
        if replace || members.len() < per_class {
            rows.extend((0..per_class).map(|_| members[r.gen_range(0..members.len())]));
        } else {
            rows.extend(index::sample(r, members.len(), per_class).into_iter().map(|p| members[p]));
        }
    }
    rows.sort_unstable();
    rows
}

/// Stratified bootstrap: `ceil(max_samples * count_c)` draws with
/// replacement from every class.
fn stratified_bootstrap(ds: &Dataset, max_samples: f64, r: &mut Rng) -> Vec<usize> {
    let mut rows = Vec::new();
    for members in ds.class_indices() {
        if members.is_empty() {
            continue;
        }
        let m = ((max_samples * members.len() as f64).ceil() as usize).max(1);
        rows.extend((0..m).map(|_| members[r.gen_range(0..members.len())]));
    }
    rows.sort_unstable();
    rows
}

fn fit_member(view: &Dataset, cols: Option<Vec<usize>>, tree: &TreeParams) -> Result<Member> {
    let x = match &cols {
        Some(c) => view.features().select_cols(c),
        None => view.features().clone(),
    };
    let t = fit_tree(&x, view.labels(), view.n_classes(), None, None, tree)?;
    Ok(Member { estimator: Estimator::Tree(t), weight: 1.0, features: cols })
}

/// UnderBagging, OverBagging, SMOTEBagging and Balanced Random Forest.
pub fn fit_balanced_bagging(
    ds: &Dataset,
    kind: BaggingKind,
    params: &BaggingParams,
    seed: u64,
) -> Result<Ensemble> {
    if params.n_estimators == 0 {
        return Err(Error::invalid_param("n_estimators must be >= 1"));
    }
    check_fraction("max_samples", params.max_samples)?;
    check_fraction("max_features", params.max_features)?;
    let dist = ClassDistribution::from_labels(ds.labels(), ds.n_classes())?;
    let d = ds.n_features();
    let members = (0..params.n_estimators)
        .into_par_iter()
        .map(|m| {
            let member_seed = rng::child(seed, kind.tag(), m as u64);
            let mut r = rng::rng(member_seed);
            let tree = TreeParams { seed: rng::child(member_seed, "tree", 0), ..params.base.clone() };
            match kind {
                BaggingKind::UnderBagging => {
                    let rows = balanced_draw(ds, &dist, params.max_samples, false, &mut r);
                    let cols = feature_subset(d, params.max_features, &mut r);
                    fit_member(&ds.select(&rows), cols, &tree)
                }
                BaggingKind::Brf => {
                    let rows = balanced_draw(ds, &dist, params.max_samples, true, &mut r);
                    let tree = TreeParams { max_features: params.max_features, ..tree };
                    fit_member(&ds.select(&rows), None, &tree)
                }
                BaggingKind::OverBagging | BaggingKind::SmoteBagging => {
                    let rows = stratified_bootstrap(ds, params.max_samples, &mut r);
                    let boot = ds.select(&rows);
                    let cols = feature_subset(d, params.max_features, &mut r);
                    let sampler_seed = rng::child(member_seed, "sampler", 0);
                    let view = if kind == BaggingKind::OverBagging {
                        samplers::random_oversample(&boot, sampler_seed)?
                    } else {
                        smote_clipped(&boot, params.k_neighbors, sampler_seed)?
                    };
                    fit_member(&view.dataset, cols, &tree)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members, Combiner::MeanProba, ds.n_classes(), d)
}

/// Classic SMOTE with `k` lowered to fit the smallest oversampled class;
/// falls back to random oversampling when some class has a single row.
fn smote_clipped(ds: &Dataset, k: usize, seed: u64) -> Result<samplers::ResampleResult> {
    let smallest = ds.class_counts().into_iter().filter(|&c| c > 0).min().unwrap_or(0);
    let k = k.min(smallest.saturating_sub(1));
    if k == 0 {
        return samplers::random_oversample(ds, seed);
    }
    let p = SamplerParams { k_neighbors: k, ..Default::default() };
    samplers::resample(SamplerKind::Smote, ds, &p, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EasyParams {
    pub n_subsets: usize,
    pub rounds_per_subset: usize,
    pub max_samples: f64,
    pub max_features: f64,
    pub base: TreeParams,
}

impl Default for EasyParams {
    fn default() -> Self {
        EasyParams {
            n_subsets: 10,
            rounds_per_subset: 10,
            max_samples: 1.0,
            max_features: 1.0,
            base: TreeParams::default(),
        }
    }
}

/// EasyEnsemble: independent balanced subsets, each boosted with SAMME;
/// the outer combiner averages the inner probabilities.
pub fn fit_easy_ensemble(ds: &Dataset, params: &EasyParams, seed: u64) -> Result<Ensemble> {
    if params.n_subsets == 0 || params.rounds_per_subset == 0 {
        return Err(Error::invalid_param("n_subsets and rounds_per_subset must be >= 1"));
    }
    check_fraction("max_samples", params.max_samples)?;
    check_fraction("max_features", params.max_features)?;
    let dist = ClassDistribution::from_labels(ds.labels(), ds.n_classes())?;
    let d = ds.n_features();
    let members = (0..params.n_subsets)
        .into_par_iter()
        .map(|s| {
            let subset_seed = rng::child(seed, "easy", s as u64);
            let mut r = rng::rng(subset_seed);
            let rows = balanced_draw(ds, &dist, params.max_samples, false, &mut r);
            let cols = feature_subset(d, params.max_features, &mut r);
            let view = ds.select(&rows);
            let view = match &cols {
                Some(c) => view.with_features(view.features().select_cols(c)),
                None => view,
            };
            let bp = BoostParams {
                n_estimators: params.rounds_per_subset,
                learning_rate: 1.0,
                algorithm: Algorithm::Samme,
                base: params.base.clone(),
            };
            let inner = fit_adaboost(&view, &bp, rng::child(subset_seed, "boost", 0), None, None)?;
            Ok(Member {
                estimator: Estimator::Ensemble(Box::new(inner.ensemble)),
                weight: 1.0,
                features: cols,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members, Combiner::MeanProba, ds.n_classes(), d)
}
