use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_TAU: f64 = 0.1;

/// Linear SVM trained with Pegasos-style subgradient steps on the hinge loss.
/// The bias is learned as the weight of a constant feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub tau: f64,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// Training rows with `|w·x + b| <= 1 + tau`.
    pub fn support_set(&self, x: &Matrix) -> Vec<usize> {
        (0..x.rows())
            .filter(|&i| self.decision(x.row(i)).abs() <= 1.0 + self.tau)
            .collect()
    }
}

/// `positive[i]` marks the +1 class. Performs `rounds * n` updates.
pub fn fit_linear_svm(
    x: &Matrix,
    positive: &[bool],
    rounds: usize,
    reg: f64,
    seed: u64,
) -> Result<LinearSvm> {
    let n = x.rows();
    if n != positive.len() {
        return Err(Error::Fit("label length mismatch".into()));
    }
    if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
        return Err(Error::Fit("linear SVM needs both classes present".into()));
    }
    if !(reg > 0.0) {
        return Err(Error::invalid_param("reg must be positive"));
    }
    let d = x.cols();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut r = rng::rng(seed);
    let steps = rounds.max(1) * n;
    for t in 1..=steps {
        let i = r.gen_range(0..n);
        let y = if positive[i] { 1.0 } else { -1.0 };
        let xi = x.row(i);
        let margin = y * (w.iter().zip(xi).map(|(a, v)| a * v).sum::<f64>() + b);
        let eta = 1.0 / (reg * t as f64);
        let shrink = 1.0 - eta * reg;
        w.iter_mut().for_each(|v| *v *= shrink);
        b *= shrink;
        if margin < 1.0 {
            for (wj, v) in w.iter_mut().zip(xi) {
                *wj += eta * y * v;
            }
            b += eta * y;
        }
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::Fit("SVM weights diverged".into()));
    }
    Ok(LinearSvm { weights: w, bias: b, tau: DEFAULT_TAU })
}
