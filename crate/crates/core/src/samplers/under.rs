use rand::seq::index;

use super::{distribution, ResampleResult, SamplerKind};
use crate::data::{stratified_kfold, Dataset};
use crate::error::{Error, Result};
use crate::learners::{fit_kmeans, fit_tree, KnnIndex, TreeParams};
use crate::rng;

/// Downsamples every class to the minority count without replacement.
pub fn random_undersample(ds: &Dataset, seed: u64) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    let target = dist.minority_count();
    let mut r = rng::rng(rng::child(seed, "rus", 0));
    let mut kept = Vec::with_capacity(target * ds.n_classes());
    for rows in ds.class_indices() {
        if rows.len() > target {
            kept.extend(index::sample(&mut r, rows.len(), target).into_iter().map(|p| rows[p]));
        } else {
            kept.extend(rows);
        }
    }
    Ok(ResampleResult::keep(ds, kept, SamplerKind::RandomUnder.tag()))
}

/// Replaces each class larger than the minority by k-means centroids with
/// `k = minority count`.
pub fn cluster_centroids(ds: &Dataset, seed: u64) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    let target = dist.minority_count();
    let mut kept = Vec::new();
    let mut synthetic = Vec::new();
    for (c, rows) in ds.class_indices().into_iter().enumerate() {
        if rows.len() > target {
            let x = ds.features().select_rows(&rows);
            let km = fit_kmeans(&x, target, rng::child(seed, "cc", c as u64))?;
            synthetic.extend(km.centroids.iter_rows().map(|r| (r.to_vec(), c)));
        } else {
            kept.extend(rows);
        }
    }
    Ok(ResampleResult::with_synthetic(ds, kept, synthetic, SamplerKind::ClusterCentroids.tag()))
}

/// Out-of-fold hardness `1 - p(true class)` from a 3-fold stratified
/// cross-validation of the default tree.
pub(crate) fn instance_hardness(ds: &Dataset, seed: u64) -> Result<Vec<f64>> {
    let plan = stratified_kfold(ds.labels(), 3, rng::child(seed, "iht-cv", 0))?;
    let mut hardness = vec![0.0; ds.n_samples()];
    for f in 0..3 {
        let train = plan.train_indices(f);
        let test = plan.test_indices(f);
        let x = ds.features().select_rows(&train);
        let y: Vec<usize> = train.iter().map(|&i| ds.labels()[i]).collect();
        let params = TreeParams { seed: rng::child(seed, "iht-tree", f as u64), ..Default::default() };
        let tree = fit_tree(&x, &y, ds.n_classes(), None, None, &params)?;
        for &i in &test {
            hardness[i] = 1.0 - tree.leaf_proba(ds.row(i))[ds.labels()[i]];
        }
    }
    Ok(hardness)
}

/// Keeps, per class, the minority-count samples with the lowest instance
/// hardness (ties to the lower index).
pub fn instance_hardness_threshold(ds: &Dataset, seed: u64) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    if let Some(c) = dist.present_classes().find(|&c| dist.counts[c] < 3) {
        return Err(Error::Fit(format!(
            "instance hardness needs >= 3 samples per class for 3-fold CV; class {c} has {}",
            dist.counts[c]
        )));
    }
    let target = dist.minority_count();
    let hardness = instance_hardness(ds, seed)?;
    let mut kept = Vec::new();
    for mut rows in ds.class_indices() {
        if rows.len() > target {
            rows.sort_by(|&a, &b| hardness[a].total_cmp(&hardness[b]).then(a.cmp(&b)));
            rows.truncate(target);
        }
        kept.extend(rows);
    }
    Ok(ResampleResult::keep(ds, kept, SamplerKind::InstanceHardness.tag()))
}

/// NearMiss-1: keeps the samples whose mean distance to their `n_neighbors`
/// nearest minority samples is smallest.
pub fn near_miss(ds: &Dataset, n_neighbors: usize) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    if n_neighbors == 0 {
        return Err(Error::invalid_param("n_neighbors must be >= 1"));
    }
    let target = dist.minority_count();
    if target < n_neighbors {
        return Err(Error::ClassTooSmall { class: dist.minority_id, count: target, k: n_neighbors });
    }
    let classes = ds.class_indices();
    let minority_idx = KnnIndex::over(ds.features(), classes[dist.minority_id].clone());
    let mut kept = Vec::new();
    for (c, rows) in classes.into_iter().enumerate() {
        if c == dist.minority_id || rows.len() <= target {
            kept.extend(rows);
            continue;
        }
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for &i in &rows {
            let x = ds.row(i);
            let nn = minority_idx.query(x, n_neighbors, None)?;
            let mean = nn
                .iter()
                .map(|&j| crate::data::matrix::dist(x, ds.row(j)))
                .sum::<f64>()
                / n_neighbors as f64;
            scored.push((mean, i));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        kept.extend(scored.into_iter().take(target).map(|(_, i)| i));
    }
    Ok(ResampleResult::keep(ds, kept, SamplerKind::NearMiss.tag()))
}
