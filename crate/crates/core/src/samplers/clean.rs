use rand::Rng as _;

use super::{distribution, KindSel, ResampleResult, SamplerKind};
use crate::data::dataset::count_classes;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::knn::{vote, KnnIndex};
use crate::rng;

pub const MAX_REPEATED_ENN_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnnMode {
    Single,
    Repeated,
    AllKnn,
}

/// Rows of `active` whose neighbourhood disagrees with their label. Members
/// of `protected` are never flagged. Returns nothing when fewer than `k + 1`
/// rows are active.
fn enn_flags(
    ds: &Dataset,
    active: &[usize],
    k: usize,
    kind_sel: KindSel,
    protected: Option<usize>,
) -> Vec<usize> {
    if k == 0 || k >= active.len() {
        return Vec::new();
    }
    let index = KnnIndex::over(ds.features(), active.to_vec());
    let y = ds.labels();
    let mut flagged = Vec::new();
    for &i in active {
        if Some(y[i]) == protected {
            continue;
        }
        let nn = index.query_row(i, k).expect("k < active rows");
        let remove = match kind_sel {
            KindSel::Mode => vote(nn.iter().map(|&j| y[j]), ds.n_classes()) != y[i],
            KindSel::All => nn.iter().any(|&j| y[j] != y[i]),
        };
        if remove {
            flagged.push(i);
        }
    }
    flagged
}

fn without(active: &[usize], removed: &[usize]) -> Vec<usize> {
    let mut mask = std::collections::HashSet::with_capacity(removed.len());
    mask.extend(removed.iter().copied());
    active.iter().copied().filter(|i| !mask.contains(i)).collect()
}

/// Single ENN pass over the whole dataset; returns kept rows.
pub(crate) fn enn_keep(
    ds: &Dataset,
    k: usize,
    kind_sel: KindSel,
    protected: Option<usize>,
) -> Vec<usize> {
    let all: Vec<usize> = (0..ds.n_samples()).collect();
    let flagged = enn_flags(ds, &all, k, kind_sel, protected);
    without(&all, &flagged)
}

/// True when removing `flagged` would leave some non-protected class empty or
/// smaller than the protected class.
fn would_overclean(ds: &Dataset, active: &[usize], flagged: &[usize], minority: usize) -> bool {
    let labels: Vec<usize> = without(active, flagged).iter().map(|&i| ds.labels()[i]).collect();
    let counts = count_classes(&labels, ds.n_classes());
    let before = count_classes(
        &active.iter().map(|&i| ds.labels()[i]).collect::<Vec<_>>(),
        ds.n_classes(),
    );
    (0..ds.n_classes())
        .filter(|&c| c != minority && before[c] > 0)
        .any(|c| counts[c] == 0 || counts[c] < counts[minority])
}

/// Edited nearest neighbours in single, repeated or all-k form. The minority
/// class is never edited.
pub fn edited_nn(
    ds: &Dataset,
    n_neighbors: usize,
    kind_sel: KindSel,
    mode: EnnMode,
) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    if n_neighbors == 0 {
        return Err(Error::invalid_param("n_neighbors must be >= 1"));
    }
    let minority = Some(dist.minority_id);
    let mut active: Vec<usize> = (0..ds.n_samples()).collect();
    let tag = match mode {
        EnnMode::Single => {
            let flagged = enn_flags(ds, &active, n_neighbors, kind_sel, minority);
            active = without(&active, &flagged);
            SamplerKind::EditedNn.tag()
        }
        EnnMode::Repeated => {
            for _ in 0..MAX_REPEATED_ENN_ITER {
                let flagged = enn_flags(ds, &active, n_neighbors, kind_sel, minority);
                if flagged.is_empty() || would_overclean(ds, &active, &flagged, dist.minority_id) {
                    break;
                }
                active = without(&active, &flagged);
            }
            SamplerKind::RepeatedEnn.tag()
        }
        EnnMode::AllKnn => {
            for k in 1..=n_neighbors {
                let flagged = enn_flags(ds, &active, k, kind_sel, minority);
                if would_overclean(ds, &active, &flagged, dist.minority_id) {
                    break;
                }
                active = without(&active, &flagged);
            }
            SamplerKind::AllKnn.tag()
        }
    };
    Ok(ResampleResult::keep(ds, active, tag))
}

/// Tomek-link members among `active`, excluding the protected class.
fn tomek_members(ds: &Dataset, active: &[usize], protected: Option<usize>) -> Vec<usize> {
    if active.len() < 2 {
        return Vec::new();
    }
    let index = KnnIndex::over(ds.features(), active.to_vec());
    let y = ds.labels();
    let mut nn = std::collections::HashMap::with_capacity(active.len());
    for &i in active {
        nn.insert(i, index.query_row(i, 1).expect("two or more rows")[0]);
    }
    let mut out = Vec::new();
    for &a in active {
        let b = nn[&a];
        if nn[&b] == a && y[a] != y[b] && Some(y[a]) != protected {
            out.push(a);
        }
    }
    out
}

/// Kept rows after removing Tomek-link members (all classes when
/// `protected` is `None`).
pub(crate) fn tomek_keep(ds: &Dataset, protected: Option<usize>) -> Vec<usize> {
    let all: Vec<usize> = (0..ds.n_samples()).collect();
    let removed = tomek_members(ds, &all, protected);
    without(&all, &removed)
}

/// Removes the non-minority member of every Tomek link.
pub fn tomek_links(ds: &Dataset) -> Result<ResampleResult> {
    let protected = ds.class_counts().iter().filter(|&&c| c > 0).count() >= 2;
    if !protected {
        return Ok(ResampleResult::identity(ds, SamplerKind::TomekLinks.tag()));
    }
    let dist = distribution(ds)?;
    Ok(ResampleResult::keep(
        ds,
        tomek_keep(ds, Some(dist.minority_id)),
        SamplerKind::TomekLinks.tag(),
    ))
}

/// One-sided selection. For each non-minority class: start from the minority
/// plus one random sample of the class, then pass over the remaining class
/// samples in index order and add each one that the `n_neighbors`-NN vote
/// over the current set misclassifies. Tomek-link members outside the
/// minority are then removed from the union.
pub fn one_sided_selection(ds: &Dataset, n_neighbors: usize, seed: u64) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    if n_neighbors == 0 {
        return Err(Error::invalid_param("n_neighbors must be >= 1"));
    }
    let classes = ds.class_indices();
    let minority = dist.minority_id;
    let mut r = rng::rng(rng::child(seed, "oss", 0));
    let mut kept: Vec<usize> = classes[minority].clone();
    for (c, rows) in classes.iter().enumerate() {
        if c == minority || rows.is_empty() {
            continue;
        }
        let start = rows[r.gen_range(0..rows.len())];
        let mut store: Vec<usize> = classes[minority].clone();
        store.push(start);
        let mut added = vec![start];
        for &i in rows {
            if i == start {
                continue;
            }
            let index = KnnIndex::over(ds.features(), store.clone());
            let k = n_neighbors.min(store.len());
            let nn = index.query(ds.row(i), k, None)?;
            if vote(nn.iter().map(|&j| ds.labels()[j]), ds.n_classes()) != c {
                store.push(i);
                added.push(i);
            }
        }
        kept.extend(added);
    }
    kept.sort_unstable();
    let removed = tomek_members(ds, &kept, Some(minority));
    let kept = without(&kept, &removed);
    Ok(ResampleResult::keep(ds, kept, SamplerKind::OneSidedSelection.tag()))
}

/// Neighbourhood cleaning rule: ENN removal outside the minority, plus
/// removal of the neighbours of misclassified minority samples that belong
/// to classes with at least `threshold_cleaning * minority_count` samples.
pub fn neighborhood_cleaning_rule(
    ds: &Dataset,
    n_neighbors: usize,
    kind_sel: KindSel,
    threshold_cleaning: f64,
) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    if n_neighbors == 0 {
        return Err(Error::invalid_param("n_neighbors must be >= 1"));
    }
    if !(threshold_cleaning >= 0.0) {
        return Err(Error::invalid_param("threshold_cleaning must be >= 0"));
    }
    let minority = dist.minority_id;
    let all: Vec<usize> = (0..ds.n_samples()).collect();
    let mut removed: Vec<usize> = enn_flags(ds, &all, n_neighbors, kind_sel, Some(minority));

    let gate = |c: usize| {
        c != minority
            && dist.counts[c] as f64 >= threshold_cleaning * dist.minority_count() as f64
    };
    if n_neighbors < ds.n_samples() {
        let index = KnnIndex::new(ds.features());
        let y = ds.labels();
        for &i in all.iter().filter(|&&i| y[i] == minority) {
            let nn = index.query_row(i, n_neighbors)?;
            if vote(nn.iter().map(|&j| y[j]), ds.n_classes()) != minority {
                removed.extend(nn.into_iter().filter(|&j| gate(y[j])));
            }
        }
    }
    removed.sort_unstable();
    removed.dedup();
    Ok(ResampleResult::keep(ds, without(&all, &removed), SamplerKind::NeighborhoodCleaning.tag()))
}
