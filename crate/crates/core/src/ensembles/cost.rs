use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::{fit_tree, DecisionTree, TreeParams};

/// Per-class misclassification costs in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() || costs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::invalid_param("costs must be finite and positive"));
        }
        Ok(CostVector(costs))
    }

    /// `c_k = n / (K * count_k)` over the present classes, scaled so the
    /// largest cost is 1. Absent classes get cost 1.
    pub fn inverse_frequency(counts: &[usize]) -> Result<Self> {
        let present = counts.iter().filter(|&&c| c > 0).count();
        if present == 0 {
            return Err(Error::invalid_dataset("no samples"));
        }
        let n: usize = counts.iter().sum();
        let raw: Vec<f64> = counts
            .iter()
            .map(|&c| if c > 0 { n as f64 / (present as f64 * c as f64) } else { f64::NAN })
            .collect();
        let max = raw.iter().copied().filter(|v| !v.is_nan()).fold(0.0, f64::max);
        Self::new(raw.into_iter().map(|v| if v.is_nan() { 1.0 } else { v / max }).collect())
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Single tree with class weights set to `costs`.
pub fn fit_cost_sensitive_tree(ds: &Dataset, costs: &CostVector, params: &TreeParams) -> Result<DecisionTree> {
    if costs.len() != ds.n_classes() {
        return Err(Error::invalid_param("cost vector length differs from class count"));
    }
    fit_tree(ds.features(), ds.labels(), ds.n_classes(), None, Some(costs.as_slice()), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;

    #[test]
    fn inverse_frequency_ratio() {
        let c = CostVector::inverse_frequency(&[90, 10]).unwrap();
        assert!((c.get(1) - 1.0).abs() < 1e-12);
        assert!((c.get(1) / c.get(0) - 9.0).abs() < 1e-12);
        let c = CostVector::inverse_frequency(&[5, 0, 5]).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 1.0, 1.0]);
        assert!(CostVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_costs_same_tree() {
        let x = Matrix::from_rows(&[[0.0], [0.5], [1.0], [1.5], [0.7]]).unwrap();
        let d = Dataset::numeric("t", x, vec![0, 0, 1, 1, 0], 2).unwrap();
        let p = TreeParams::default();
        let a = fit_cost_sensitive_tree(&d, &CostVector::new(vec![1.0, 1.0]).unwrap(), &p).unwrap();
        let b = fit_tree(d.features(), d.labels(), 2, None, None, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overlap_leaf_flips_to_minority() {
        // Duplicated point with 3 majority vs 1 minority label.
        let x = Matrix::from_rows(&[[0.0], [0.0], [0.0], [0.0], [5.0], [5.0], [5.0], [5.0]]).unwrap();
        let d = Dataset::numeric("t", x, vec![0, 0, 0, 1, 0, 0, 0, 0], 2).unwrap();
        let p = TreeParams::default();
        let plain = fit_tree(d.features(), d.labels(), 2, None, None, &p).unwrap();
        let costs = CostVector::inverse_frequency(&d.class_counts()).unwrap();
        let cs = fit_cost_sensitive_tree(&d, &costs, &p).unwrap();
        assert_eq!(crate::learners::argmax(plain.leaf_proba(&[0.0])), 0);
        assert_eq!(crate::learners::argmax(cs.leaf_proba(&[0.0])), 1);
    }
}
