use rand::Rng as _;

use super::{distribution, ResampleResult, SamplerKind, SamplerParams};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::{fit_linear_svm, KnnIndex};
use crate::rng::{self, Rng};
use crate::util::largest_remainder;

/// Upsamples every non-majority class to the majority count by duplicating
/// rows drawn with replacement.
pub fn random_oversample(ds: &Dataset, seed: u64) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    let target = dist.majority_count();
    let mut r = rng::rng(rng::child(seed, "ros", 0));
    let mut synthetic = Vec::new();
    for (c, rows) in ds.class_indices().into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        for _ in rows.len()..target {
            let i = rows[r.gen_range(0..rows.len())];
            synthetic.push((ds.row(i).to_vec(), c));
        }
    }
    let kept = (0..ds.n_samples()).collect();
    Ok(ResampleResult::with_synthetic(ds, kept, synthetic, SamplerKind::RandomOver.tag()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoteVariant {
    Classic,
    Borderline,
    Svm,
    Adasyn,
}

impl SmoteVariant {
    fn tag(self) -> &'static str {
        match self {
            SmoteVariant::Classic => SamplerKind::Smote.tag(),
            SmoteVariant::Borderline => SamplerKind::BorderlineSmote.tag(),
            SmoteVariant::Svm => SamplerKind::SvmSmote.tag(),
            SmoteVariant::Adasyn => SamplerKind::Adasyn.tag(),
        }
    }
}

/// How many of the `m` all-class nearest neighbours of each row belong to
/// another class.
fn other_class_counts(ds: &Dataset, rows: &[usize], m: usize, c: usize) -> Result<Vec<usize>> {
    let index = KnnIndex::new(ds.features());
    rows.iter()
        .map(|&i| {
            let nn = index.query_row(i, m)?;
            Ok(nn.iter().filter(|&&j| ds.labels()[j] != c).count())
        })
        .collect()
}

enum Step {
    Interpolate,
    Extrapolate,
}

/// Draws one neighbour among the `k` same-class neighbours of `seed` and one
/// λ, and returns the new point.
fn synthesize(
    ds: &Dataset,
    class_index: &KnnIndex,
    seed: usize,
    k: usize,
    step: Step,
    r: &mut Rng,
) -> Result<Vec<f64>> {
    let nn = class_index.query_row(seed, k)?;
    let nb = nn[r.gen_range(0..nn.len())];
    let lambda: f64 = r.gen();
    let s = ds.row(seed);
    let n = ds.row(nb);
    Ok(match step {
        Step::Interpolate => s.iter().zip(n).map(|(a, b)| a + lambda * (b - a)).collect(),
        Step::Extrapolate => s.iter().zip(n).map(|(a, b)| a + lambda * (a - b)).collect(),
    })
}

/// SMOTE and its borderline, SVM and ADASYN variants. Each non-majority
/// class is raised to the majority count, one class at a time against the
/// rest.
///
/// When a variant's seed set comes out empty for a class (no DANGER points,
/// no usable support vectors, or all ADASYN ratios zero) the class falls
/// back to classic seeding so the count contract still holds.
pub fn smote_family(
    ds: &Dataset,
    variant: SmoteVariant,
    params: &SamplerParams,
    seed: u64,
) -> Result<ResampleResult> {
    let dist = distribution(ds)?;
    let target = dist.majority_count();
    let k = match variant {
        SmoteVariant::Adasyn => params.n_neighbors,
        _ => params.k_neighbors,
    };
    if k == 0 {
        return Err(Error::invalid_param("neighbour count must be >= 1"));
    }
    let m = match variant {
        SmoteVariant::Borderline | SmoteVariant::Svm => params.m_neighbors,
        SmoteVariant::Adasyn => params.n_neighbors,
        SmoteVariant::Classic => 0,
    };
    if variant != SmoteVariant::Classic && (m == 0 || m >= ds.n_samples()) {
        return Err(Error::invalid_param(format!(
            "m_neighbors must be in [1, {}) for {} rows",
            ds.n_samples(),
            ds.n_samples()
        )));
    }
    let classes = ds.class_indices();
    for (c, rows) in classes.iter().enumerate() {
        if !rows.is_empty() && rows.len() < target && rows.len() <= k {
            return Err(Error::ClassTooSmall { class: c, count: rows.len(), k });
        }
    }

    let mut r = rng::rng(rng::child(seed, variant.tag(), 0));
    let mut synthetic = Vec::new();
    for (c, rows) in classes.iter().enumerate() {
        if rows.is_empty() || rows.len() >= target {
            continue;
        }
        let need = target - rows.len();
        let class_index = KnnIndex::over(ds.features(), rows.clone());
        let mut push = |row: Vec<f64>| synthetic.push((row, c));
        match variant {
            SmoteVariant::Classic => {
                for _ in 0..need {
                    let s = rows[r.gen_range(0..rows.len())];
                    push(synthesize(ds, &class_index, s, k, Step::Interpolate, &mut r)?);
                }
            }
            SmoteVariant::Borderline => {
                let other = other_class_counts(ds, rows, m, c)?;
                let danger: Vec<usize> = rows
                    .iter()
                    .zip(&other)
                    .filter(|(_, &o)| 2 * o >= m && o < m)
                    .map(|(&i, _)| i)
                    .collect();
                let seeds = if danger.is_empty() { rows.as_slice() } else { danger.as_slice() };
                for _ in 0..need {
                    let s = seeds[r.gen_range(0..seeds.len())];
                    push(synthesize(ds, &class_index, s, k, Step::Interpolate, &mut r)?);
                }
            }
            SmoteVariant::Svm => {
                let positive: Vec<bool> = ds.labels().iter().map(|&y| y == c).collect();
                let svm = fit_linear_svm(
                    ds.features(),
                    &positive,
                    params.svm_rounds,
                    params.svm_reg,
                    rng::child(seed, "svmsmote-svm", c as u64),
                )?;
                let class_x = ds.features().select_rows(rows);
                let support: Vec<usize> =
                    svm.support_set(&class_x).into_iter().map(|p| rows[p]).collect();
                let candidates = if support.is_empty() { rows.clone() } else { support };
                let other = other_class_counts(ds, &candidates, m, c)?;
                let mut seeds: Vec<(usize, bool)> = candidates
                    .iter()
                    .zip(&other)
                    .filter(|(_, &o)| o < m)
                    .map(|(&i, &o)| (i, 2 * o < m))
                    .collect();
                if seeds.is_empty() {
                    seeds = rows.iter().map(|&i| (i, false)).collect();
                }
                for _ in 0..need {
                    let (s, safe) = seeds[r.gen_range(0..seeds.len())];
                    let step = if safe { Step::Extrapolate } else { Step::Interpolate };
                    push(synthesize(ds, &class_index, s, k, step, &mut r)?);
                }
            }
            SmoteVariant::Adasyn => {
                let other = other_class_counts(ds, rows, m, c)?;
                let ratios: Vec<f64> = other.iter().map(|&o| o as f64 / m as f64).collect();
                let budget = largest_remainder(&ratios, need);
                for (&s, &b) in rows.iter().zip(&budget) {
                    for _ in 0..b {
                        push(synthesize(ds, &class_index, s, k, Step::Interpolate, &mut r)?);
                    }
                }
            }
        }
    }
    let kept = (0..ds.n_samples()).collect();
    Ok(ResampleResult::with_synthetic(ds, kept, synthetic, variant.tag()))
}

/// Per-row ADASYN budgets for one class, exposed for tests.
#[cfg(test)]
pub(crate) fn adasyn_budgets(ds: &Dataset, c: usize, m: usize, need: usize) -> Vec<usize> {
    let rows = &ds.class_indices()[c];
    let other = other_class_counts(ds, rows, m, c).unwrap();
    let ratios: Vec<f64> = other.iter().map(|&o| o as f64 / m as f64).collect();
    largest_remainder(&ratios, need)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;

    fn ds(rows: &[[f64; 2]], y: &[usize]) -> Dataset {
        Dataset::numeric("t", Matrix::from_rows(rows).unwrap(), y.to_vec(), 2).unwrap()
    }

    #[test]
    fn ros_counts_and_duplicates() {
        let rows: Vec<[f64; 2]> = (0..100).map(|i| [i as f64, 0.0]).collect();
        let y: Vec<usize> = (0..100).map(|i| (i >= 90) as usize).collect();
        let d = ds(&rows, &y);
        let r = random_oversample(&d, 4).unwrap();
        assert_eq!(r.dataset.class_counts(), vec![90, 90]);
        assert_eq!(r.synthetic_count, vec![0, 80]);
        for i in 100..180 {
            assert!(rows[90..].iter().any(|o| o == r.dataset.row(i)));
        }
    }

    #[test]
    fn smote_two_points_on_segment() {
        let rows = [[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [5.0, 6.0], [6.0, 5.0], [6.0, 6.0]];
        let d = ds(&rows, &[1, 1, 0, 0, 0, 0]);
        let p = SamplerParams { k_neighbors: 1, ..Default::default() };
        let r = smote_family(&d, SmoteVariant::Classic, &p, 2).unwrap();
        assert_eq!(r.dataset.class_counts(), vec![4, 4]);
        for i in 6..8 {
            let v = r.dataset.row(i);
            assert!((v[0] - v[1]).abs() < 1e-12 && (0.0..=1.0).contains(&v[0]));
        }
    }

    #[test]
    fn smote_duplicate_point_is_fixed() {
        let rows = [[2.0, 3.0], [2.0, 3.0], [5.0, 5.0], [5.0, 6.0], [6.0, 5.0], [6.0, 6.0]];
        let d = ds(&rows, &[1, 1, 0, 0, 0, 0]);
        let p = SamplerParams { k_neighbors: 1, ..Default::default() };
        let r = smote_family(&d, SmoteVariant::Classic, &p, 0).unwrap();
        for i in 6..8 {
            assert_eq!(r.dataset.row(i), &[2.0, 3.0]);
        }
    }

    #[test]
    fn smote_class_too_small() {
        let rows = [[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [5.0, 6.0], [6.0, 5.0]];
        let d = ds(&rows, &[1, 1, 0, 0, 0]);
        let err = smote_family(&d, SmoteVariant::Classic, &SamplerParams::default(), 0).unwrap_err();
        assert!(matches!(err, Error::ClassTooSmall { class: 1, count: 2, k: 5 }));
    }

    #[test]
    fn adasyn_boundary_gets_more() {
        // Minority line at x = 0..5; majority sits next to the right end only.
        let mut rows: Vec<[f64; 2]> = (0..6).map(|i| [i as f64, 0.0]).collect();
        rows.extend((0..12).map(|i| [5.5 + 0.1 * i as f64, 0.2]));
        let y: Vec<usize> = (0..18).map(|i| (i < 6) as usize).collect();
        let d = ds(&rows, &y);
        let b = adasyn_budgets(&d, 1, 3, 12);
        assert_eq!(b.iter().sum::<usize>(), 12);
        assert!(b[5] > b[0]);
        assert_eq!(b[0], 0);
        let p = SamplerParams { n_neighbors: 3, ..Default::default() };
        let r = smote_family(&d, SmoteVariant::Adasyn, &p, 1).unwrap();
        assert_eq!(r.dataset.class_counts(), vec![12, 12]);
    }

    #[test]
    fn variants_balance() {
        let mut rows: Vec<[f64; 2]> = (0..30).map(|i| [(i % 6) as f64, (i / 6) as f64]).collect();
        rows.extend((0..8).map(|i| [2.5 + 0.3 * (i % 3) as f64, 1.5 + 0.2 * i as f64]));
        let y: Vec<usize> = (0..38).map(|i| (i >= 30) as usize).collect();
        let d = ds(&rows, &y);
        let p = SamplerParams { k_neighbors: 3, m_neighbors: 6, ..Default::default() };
        for v in [SmoteVariant::Classic, SmoteVariant::Borderline, SmoteVariant::Svm, SmoteVariant::Adasyn] {
            let p = SamplerParams { n_neighbors: 4, ..p.clone() };
            let r = smote_family(&d, v, &p, 7).unwrap();
            assert_eq!(r.dataset.class_counts(), vec![30, 30], "{v:?}");
            assert_eq!(r, smote_family(&d, v, &p, 7).unwrap());
        }
    }
}
