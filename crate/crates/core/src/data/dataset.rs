use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Kind of an original (pre-encoding) feature column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    BinaryCategorical,
    MultiCategorical { cardinality: usize },
}

/// A labelled feature matrix. Class ids are `0..n_classes`; a declared class
/// may have no rows (e.g. in a training fold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<usize>,
    n_classes: usize,
    schema: Vec<FeatureKind>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
        schema: Vec<FeatureKind>,
    ) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::invalid_dataset("no samples"));
        }
        if features.cols() == 0 {
            return Err(Error::invalid_dataset("no features"));
        }
        if features.rows() != labels.len() {
            return Err(Error::invalid_dataset(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if n_classes < 2 {
            return Err(Error::invalid_dataset("need at least 2 declared classes"));
        }
        if let Some(bad) = labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::invalid_dataset(format!(
                "label {bad} outside 0..{n_classes}"
            )));
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_dataset("non-finite feature value"));
        }
        Ok(Dataset { name: name.into(), features, labels, n_classes, schema })
    }

    /// Numeric dataset with one schema entry per column.
    pub fn numeric(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        let schema = vec![FeatureKind::Numeric; features.cols()];
        Self::new(name, features, labels, n_classes, schema)
    }

    pub(crate) fn from_parts_unchecked(
        name: String,
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
        schema: Vec<FeatureKind>,
    ) -> Self {
        debug_assert_eq!(features.rows(), labels.len());
        Dataset { name, features, labels, n_classes, schema }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn schema(&self) -> &[FeatureKind] {
        &self.schema
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        count_classes(&self.labels, self.n_classes)
    }

    /// Row indices grouped by class.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (i, &y) in self.labels.iter().enumerate() {
            out[y].push(i);
        }
        out
    }

    /// Subset of rows in the given order. Indices may repeat.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            schema: self.schema.clone(),
        }
    }

    pub fn with_labels(&self, labels: Vec<usize>) -> Dataset {
        debug_assert_eq!(labels.len(), self.labels.len());
        Dataset { labels, ..self.clone() }
    }

    pub fn with_features(&self, features: Matrix) -> Dataset {
        debug_assert_eq!(features.rows(), self.labels.len());
        Dataset { features, ..self.clone() }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Dataset {
        self.name = name.into();
        self
    }

    pub fn into_parts(self) -> (Matrix, Vec<usize>) {
        (self.features, self.labels)
    }
}

pub fn count_classes(labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    counts
}

/// Per-class counts with majority/minority identification among the classes
/// that actually occur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: Vec<usize>,
    pub majority_id: usize,
    pub minority_id: usize,
    pub imbalance_ratio: f64,
}

impl ClassDistribution {
    pub fn from_labels(labels: &[usize], n_classes: usize) -> Result<Self> {
        let counts = count_classes(labels, n_classes);
        Self::from_counts(counts)
    }

    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        let present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
        if present.len() < 2 {
            return Err(Error::invalid_dataset(format!(
                "{} class(es) present, need at least 2",
                present.len()
            )));
        }
        // Strict comparisons keep the lowest id on ties.
        let mut majority_id = present[0];
        let mut minority_id = present[0];
        for &c in &present[1..] {
            if counts[c] > counts[majority_id] {
                majority_id = c;
            }
            if counts[c] < counts[minority_id] {
                minority_id = c;
            }
        }
        let imbalance_ratio = counts[majority_id] as f64 / counts[minority_id] as f64;
        Ok(ClassDistribution { counts, majority_id, minority_id, imbalance_ratio })
    }

    pub fn n_samples(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn minority_count(&self) -> usize {
        self.counts[self.minority_id]
    }

    pub fn majority_count(&self) -> usize {
        self.counts[self.majority_id]
    }

    pub fn present_classes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.counts.len()).filter(move |&c| self.counts[c] > 0)
    }
}

pub fn class_distribution(ds: &Dataset) -> Result<ClassDistribution> {
    ClassDistribution::from_labels(ds.labels(), ds.n_classes())
}
