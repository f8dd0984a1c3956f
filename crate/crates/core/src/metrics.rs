//! Evaluation metrics and score aggregation.

use serde::{Deserialize, Serialize};

use crate::data::dataset::count_classes;
use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::learners::tree::argmax_rows;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub auprc: f64,
    pub macro_f1: f64,
    pub balanced_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auprc,
    MacroF1,
    BalancedAccuracy,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Auprc, Metric::MacroF1, Metric::BalancedAccuracy];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Auprc => "auprc",
            Metric::MacroF1 => "macro_f1",
            Metric::BalancedAccuracy => "balanced_accuracy",
        }
    }
}

impl MetricTriple {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Auprc => self.auprc,
            Metric::MacroF1 => self.macro_f1,
            Metric::BalancedAccuracy => self.balanced_accuracy,
        }
    }
}

/// Step-interpolated average precision: `Σ (R_k − R_{k−1}) P_k` over
/// descending distinct score thresholds.
pub fn average_precision(y_true: &[bool], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: scores.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid_param("scores contain NaN"));
    }
    let positives = y_true.iter().filter(|&&p| p).count();
    if positives == 0 {
        return Err(Error::invalid_param("average precision needs at least one positive"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut ap, mut prev_recall) = (0usize, 0usize, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += y_true[order[i]] as usize;
            seen += 1;
            i += 1;
        }
        let recall = tp as f64 / positives as f64;
        ap += (recall - prev_recall) * (tp as f64 / seen as f64);
        prev_recall = recall;
    }
    Ok(ap)
}

fn confusion(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(Error::invalid_param("empty label vector"));
    }
    let mut cm = vec![vec![0usize; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= k || p >= k {
            return Err(Error::invalid_param(format!("label outside 0..{k}")));
        }
        cm[t][p] += 1;
    }
    Ok(cm)
}

/// Mean over classes present in `y_true` of the per-class F1; a class with
/// precision + recall = 0 contributes 0.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<f64> {
    let cm = confusion(y_true, y_pred, k)?;
    let mut total = 0.0;
    let mut present = 0;
    for c in 0..k {
        let support: usize = cm[c].iter().sum();
        if support == 0 {
            continue;
        }
        present += 1;
        let tp = cm[c][c] as f64;
        let predicted: usize = (0..k).map(|r| cm[r][c]).sum();
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = tp / support as f64;
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(total / present as f64)
}

/// Mean per-class recall over classes present in `y_true`.
pub fn balanced_accuracy(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<f64> {
    let cm = confusion(y_true, y_pred, k)?;
    let recalls: Vec<f64> = (0..k)
        .filter_map(|c| {
            let support: usize = cm[c].iter().sum();
            (support > 0).then(|| cm[c][c] as f64 / support as f64)
        })
        .collect();
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

/// AUPRC from class probabilities. With two classes this is the AP of the
/// minority class of `y_true` (class 1 on a tie); otherwise the macro mean
/// of one-vs-rest APs over classes present in `y_true`.
pub fn auprc(y_true: &[usize], proba: &Matrix) -> Result<f64> {
    let k = proba.cols();
    if proba.rows() != y_true.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: proba.rows() });
    }
    if y_true.iter().any(|&y| y >= k) {
        return Err(Error::invalid_param(format!("label outside 0..{k}")));
    }
    let counts = count_classes(y_true, k);
    let ap_for = |c: usize| {
        let truth: Vec<bool> = y_true.iter().map(|&y| y == c).collect();
        average_precision(&truth, &proba.column(c))
    };
    if k == 2 {
        let c = if counts[0] < counts[1] { 0 } else { 1 };
        return ap_for(c);
    }
    let present: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
    let mut total = 0.0;
    for &c in &present {
        total += ap_for(c)?;
    }
    if present.len() < k {
        log::debug!("auprc: {} of {k} classes absent from y_true; skipped", k - present.len());
    }
    Ok(total / present.len() as f64)
}

pub fn evaluate(y_true: &[usize], proba: &Matrix) -> Result<MetricTriple> {
    let k = proba.cols();
    let pred = argmax_rows(proba);
    Ok(MetricTriple {
        auprc: auprc(y_true, proba)?,
        macro_f1: macro_f1(y_true, &pred, k)?,
        balanced_accuracy: balanced_accuracy(y_true, &pred, k)?,
    })
}

/// Higher-is-better ranks with ties sharing the mean of their span. NaN
/// scores rank after every finite score.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| key(scores[b]).total_cmp(&key(scores[a])));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && key(scores[order[j + 1]]) == key(scores[order[i]]) {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// `scores[m][d]`: entry `(r, c)` is the fraction of datasets where method
/// `r` scores strictly above method `c`. Diagonal is 0.
pub fn win_ratio_matrix(scores: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = scores.len();
    let n_data = scores.first().map_or(0, Vec::len);
    if scores.iter().any(|s| s.len() != n_data) {
        return Err(Error::invalid_param("every method needs one score per dataset"));
    }
    let mut out = vec![vec![0.0; m]; m];
    if n_data == 0 {
        return Ok(out);
    }
    for r in 0..m {
        for c in 0..m {
            if r != c {
                let wins = (0..n_data).filter(|&d| scores[r][d] > scores[c][d]).count();
                out[r][c] = wins as f64 / n_data as f64;
            }
        }
    }
    Ok(out)
}

/// Imbalance-ratio groups used in reports. Ratios of 1000 or more fall in
/// the last group.
pub const IR_GROUPS: [(&str, f64, f64); 4] = [
    ("[0,5)", 0.0, 5.0),
    ("[5,10)", 5.0, 10.0),
    ("[10,50)", 10.0, 50.0),
    ("[50,1000)", 50.0, 1000.0),
];

pub fn ir_group(ir: f64) -> &'static str {
    IR_GROUPS
        .iter()
        .find(|(_, lo, hi)| ir >= *lo && ir < *hi)
        .map_or(IR_GROUPS[3].0, |g| g.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap_examples() {
        let ap = average_precision(&[true, false, true, false], &[0.9, 0.8, 0.7, 0.6]).unwrap();
        assert!((ap - (0.5 + 2.0 / 3.0 * 0.5)).abs() < 1e-12);
        assert_eq!(average_precision(&[true, true, false], &[0.9, 0.8, 0.1]).unwrap(), 1.0);
        let ap = average_precision(&[false, false, false, true], &[0.9, 0.8, 0.7, 0.6]).unwrap();
        assert!((ap - 0.25).abs() < 1e-12);
        assert!(average_precision(&[false, false], &[0.1, 0.2]).is_err());
        // All tied: precision is the prevalence.
        let ap = average_precision(&[true, false, false, false], &[0.5; 4]).unwrap();
        assert!((ap - 0.25).abs() < 1e-12);
    }

    #[test]
    fn f1_and_bac_examples() {
        assert_eq!(macro_f1(&[1, 0, 1, 0], &[1, 1, 0, 0], 2).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[0, 0, 0, 1], &[0, 0, 0, 0], 2).unwrap(), 0.5);
        let y: Vec<usize> = (0..30).map(|i| i / 10).collect();
        let mut p = y.clone();
        // Recalls 0.9, 0.5, 0.1.
        p[0] = 1;
        for i in 10..15 {
            p[i] = 0;
        }
        for i in 20..29 {
            p[i] = 0;
        }
        assert!((balanced_accuracy(&y, &p, 3).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(macro_f1(&[0, 1], &[0, 0], 2).unwrap(), (2.0 / 3.0) / 2.0);
    }

    #[test]
    fn binary_auprc_uses_minority() {
        let p = Matrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.7, 0.3], [0.6, 0.4]]).unwrap();
        let y = [0, 1, 0, 0];
        assert_eq!(auprc(&y, &p).unwrap(), 1.0);
        let y = [1, 0, 1, 1];
        assert!(auprc(&y, &p).unwrap() < 1.0);
    }

    #[test]
    fn ranks_and_wins() {
        assert_eq!(average_ranks(&[0.9, 0.8, 0.8, 0.1]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[0.3; 3]), vec![2.0; 3]);
        assert_eq!(average_ranks(&[f64::NAN, 0.1]), vec![2.0, 1.0]);
        let w = win_ratio_matrix(&[vec![0.9, 0.8, 0.7, 0.6], vec![0.1, 0.1, 0.1, 0.1]]).unwrap();
        assert_eq!(w, vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        let w = win_ratio_matrix(&[vec![0.5; 3], vec![0.5; 3]]).unwrap();
        assert_eq!(w[0][1] + w[1][0], 0.0);
    }

    #[test]
    fn groups() {
        assert_eq!(ir_group(1.0), "[0,5)");
        assert_eq!(ir_group(5.0), "[5,10)");
        assert_eq!(ir_group(42.0), "[10,50)");
        assert_eq!(ir_group(2000.0), "[50,1000)");
    }
}
