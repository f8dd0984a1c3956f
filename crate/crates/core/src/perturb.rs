//! Controlled difficulty injection: label noise, missing values and extra
//! imbalance.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::data::{ClassDistribution, Dataset};
use crate::error::{Error, Result};
use crate::rng;
use crate::util::largest_remainder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    LabelNoise,
    Missing,
    Imbalance,
}

impl PerturbKind {
    pub fn name(self) -> &'static str {
        match self {
            PerturbKind::LabelNoise => "label_noise",
            PerturbKind::Missing => "missing",
            PerturbKind::Imbalance => "imbalance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbKind,
    pub level: f64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            PerturbKind::LabelNoise | PerturbKind::Missing => (0.0..1.0).contains(&self.level),
            PerturbKind::Imbalance => self.level >= 100.0 && self.level.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid_param(format!("{} level {} out of range", self.kind.name(), self.level)))
        }
    }

    /// Stable text key, e.g. `label_noise@0.1`.
    pub fn key(&self) -> String {
        format!("{}@{}", self.kind.name(), self.level)
    }

    pub fn apply(&self, ds: &Dataset, seed: u64) -> Result<Dataset> {
        self.validate()?;
        match self.kind {
            PerturbKind::LabelNoise => inject_label_noise(ds, self.level, seed),
            PerturbKind::Missing => inject_missing(ds, self.level, seed),
            PerturbKind::Imbalance => intensify_imbalance(ds, self.level, seed),
        }
    }
}

/// Relabels `m = floor(ratio * minority)` minority rows to other classes and
/// `m` other rows to the minority. Each donor class gives up as many rows as
/// it receives (largest-remainder split proportional to class size), so
/// every class count is preserved.
pub fn inject_label_noise(ds: &Dataset, ratio: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::invalid_param(format!("noise ratio {ratio} not in [0, 1)")));
    }
    let dist = ClassDistribution::from_labels(ds.labels(), ds.n_classes())?;
    let minority = dist.minority_id;
    let m = (ratio * dist.minority_count() as f64).floor() as usize;
    let others: usize = dist.n_samples() - dist.minority_count();
    if m > others {
        return Err(Error::invalid_param(format!("{m} flips exceed {others} non-minority samples")));
    }
    if m == 0 {
        return Ok(ds.clone());
    }
    let mut r = rng::rng(rng::child(seed, "label-noise", 0));
    let classes = ds.class_indices();
    let weights: Vec<f64> = (0..ds.n_classes())
        .map(|c| if c == minority { 0.0 } else { classes[c].len() as f64 })
        .collect();
    let quota = largest_remainder(&weights, m);
    let mut labels = ds.labels().to_vec();
    let mut new_minority_labels: Vec<usize> = Vec::with_capacity(m);
    for (c, &q) in quota.iter().enumerate() {
        if q == 0 {
            continue;
        }
        let picked = index::sample(&mut r, classes[c].len(), q);
        for p in picked {
            labels[classes[c][p]] = minority;
        }
        new_minority_labels.extend(std::iter::repeat(c).take(q));
    }
    new_minority_labels.shuffle(&mut r);
    let flipped = index::sample(&mut r, classes[minority].len(), m);
    for (p, new) in flipped.into_iter().zip(new_minority_labels) {
        labels[classes[minority][p]] = new;
    }
    Ok(ds.with_labels(labels))
}

/// Replaces `floor(ratio * n * d)` distinct cells, chosen uniformly, by
/// their column mean computed before masking.
pub fn inject_missing(ds: &Dataset, ratio: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::invalid_param(format!("missing ratio {ratio} not in [0, 1)")));
    }
    let (n, d) = (ds.n_samples(), ds.n_features());
    let cells = (ratio * (n * d) as f64).floor() as usize;
    if cells == 0 {
        return Ok(ds.clone());
    }
    let x = ds.features();
    let means: Vec<f64> = (0..d).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let mut out = x.clone();
    let mut r = rng::rng(rng::child(seed, "missing", 0));
    for cell in index::sample(&mut r, n * d, cells) {
        let (i, j) = (cell / d, cell % d);
        out.set(i, j, means[j]);
    }
    Ok(ds.with_features(out))
}

/// Keeps `floor(minority * 100 / level)` random minority rows; every other
/// row is untouched and order is preserved.
pub fn intensify_imbalance(ds: &Dataset, level_percent: f64, seed: u64) -> Result<Dataset> {
    if !(level_percent >= 100.0 && level_percent.is_finite()) {
        return Err(Error::invalid_param(format!("imbalance level {level_percent} must be >= 100")));
    }
    let dist = ClassDistribution::from_labels(ds.labels(), ds.n_classes())?;
    let minority = dist.minority_id;
    let keep = (dist.minority_count() as f64 * 100.0 / level_percent).floor() as usize;
    if keep < 2 {
        return Err(Error::invalid_param(format!(
            "minority would shrink to {keep} samples at level {level_percent}%"
        )));
    }
    let rows = &ds.class_indices()[minority];
    let mut r = rng::rng(rng::child(seed, "imbalance", 0));
    let kept: std::collections::HashSet<usize> =
        index::sample(&mut r, rows.len(), keep).into_iter().map(|p| rows[p]).collect();
    let idx: Vec<usize> = (0..ds.n_samples())
        .filter(|i| ds.labels()[*i] != minority || kept.contains(i))
        .collect();
    Ok(ds.select(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;

    fn ds(counts: &[usize]) -> Dataset {
        let n: usize = counts.iter().sum();
        let rows: Vec<[f64; 2]> = (0..n).map(|i| [i as f64, (i * 7 % 5) as f64]).collect();
        let y: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat(c).take(k)).collect();
        Dataset::numeric("p", Matrix::from_rows(&rows).unwrap(), y, counts.len()).unwrap()
    }

    #[test]
    fn label_noise_one_each_way() {
        let d = ds(&[100, 10]);
        let out = inject_label_noise(&d, 0.1, 3).unwrap();
        assert_eq!(out.class_counts(), vec![100, 10]);
        let changed = d.labels().iter().zip(out.labels()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 2);
        assert_eq!(inject_label_noise(&d, 0.0, 3).unwrap(), d);
    }

    #[test]
    fn label_noise_multiclass_preserves_counts() {
        let d = ds(&[50, 30, 20]);
        let out = inject_label_noise(&d, 0.4, 1).unwrap();
        assert_eq!(out.class_counts(), vec![50, 30, 20]);
        let changed = d.labels().iter().zip(out.labels()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 16);
    }

    #[test]
    fn missing_counts_and_mean() {
        let rows: Vec<[f64; 10]> = (0..10).map(|i| std::array::from_fn(|j| (i * 10 + j) as f64 + 0.5)).collect();
        let d = Dataset::numeric("m", Matrix::from_rows(&rows).unwrap(), (0..10).map(|i| i % 2).collect(), 2).unwrap();
        let out = inject_missing(&d, 0.3, 5).unwrap();
        let changed: Vec<(usize, usize)> = (0..10)
            .flat_map(|i| (0..10).map(move |j| (i, j)))
            .filter(|&(i, j)| d.features().get(i, j) != out.features().get(i, j))
            .collect();
        assert_eq!(changed.len(), 30);
        for (i, j) in changed {
            let mean = (0..10).map(|r| rows[r][j]).sum::<f64>() / 10.0;
            assert!((out.features().get(i, j) - mean).abs() < 1e-12);
        }
        assert_eq!(inject_missing(&d, 0.0, 5).unwrap(), d);
    }

    #[test]
    fn imbalance_levels() {
        let d = ds(&[100, 20]);
        let out = intensify_imbalance(&d, 200.0, 2).unwrap();
        assert_eq!(out.class_counts(), vec![100, 10]);
        assert_eq!(intensify_imbalance(&d, 100.0, 2).unwrap(), d);
        let d = ds(&[500, 50]);
        assert_eq!(intensify_imbalance(&d, 500.0, 2).unwrap().class_counts(), vec![500, 10]);
        assert!(intensify_imbalance(&ds(&[10, 3]), 200.0, 0).is_err());
    }
}
