use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::learners::DecisionTree;

pub const MAGIC: &[u8; 8] = b"IMBKMDL\0";
pub const FORMAT_VERSION: u32 = 1;

const PROBA_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    /// SAMME: normalized sum of member weights voting for their argmax.
    WeightedVote,
    /// SAMME.R: softmax of the averaged symmetric log-probability scores.
    SammeR,
    /// Weighted mean of member probabilities.
    MeanProba,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Estimator {
    Tree(DecisionTree),
    Ensemble(Box<Ensemble>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub estimator: Estimator,
    pub weight: f64,
    /// Input columns seen by the member, in order; `None` means all.
    pub features: Option<Vec<usize>>,
}

impl Member {
    pub fn new(estimator: Estimator, weight: f64) -> Self {
        Member { estimator, weight, features: None }
    }

    fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        match &self.features {
            Some(cols) => {
                if let Some(&c) = cols.iter().find(|&&c| c >= x.cols()) {
                    return Err(Error::DimensionMismatch { expected: c + 1, got: x.cols() });
                }
                self.estimator.predict_proba(&x.select_cols(cols))
            }
            None => self.estimator.predict_proba(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<Member>,
    pub combiner: Combiner,
    pub n_classes: usize,
    pub n_features: usize,
}

impl Ensemble {
    pub fn new(members: Vec<Member>, combiner: Combiner, n_classes: usize, n_features: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Fit("ensemble needs at least one member".into()));
        }
        if members.iter().any(|m| !m.weight.is_finite() || m.weight < 0.0) {
            return Err(Error::Fit("member weights must be finite and non-negative".into()));
        }
        Ok(Ensemble { members, combiner, n_classes, n_features })
    }

    pub fn n_trees(&self) -> usize {
        self.members.iter().map(|m| m.estimator.n_trees()).sum()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: x.cols() });
        }
        let k = self.n_classes;
        let mut acc = Matrix::zeros(x.rows(), k);
        let total: f64 = self.members.iter().map(|m| m.weight).sum();
        for m in &self.members {
            let p = m.predict_proba(x)?;
            for i in 0..x.rows() {
                let row = p.row(i);
                let out = acc.row_mut(i);
                match self.combiner {
                    Combiner::MeanProba => {
                        out.iter_mut().zip(row).for_each(|(o, v)| *o += m.weight * v);
                    }
                    Combiner::WeightedVote => out[crate::learners::argmax(row)] += m.weight,
                    Combiner::SammeR => {
                        let logs: Vec<f64> = row.iter().map(|v| v.max(PROBA_CLIP).ln()).collect();
                        let mean = logs.iter().sum::<f64>() / k as f64;
                        for (o, l) in out.iter_mut().zip(&logs) {
                            *o += m.weight * (k as f64 - 1.0) * (l - mean);
                        }
                    }
                }
            }
        }
        for i in 0..x.rows() {
            let row = acc.row_mut(i);
            match self.combiner {
                Combiner::MeanProba | Combiner::WeightedVote => normalize_or_uniform(row),
                Combiner::SammeR => {
                    let scale = if total > 0.0 { total * (k as f64 - 1.0) } else { 1.0 };
                    row.iter_mut().for_each(|v| *v /= scale);
                    softmax(row);
                }
            }
        }
        Ok(acc)
    }
}

fn normalize_or_uniform(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    if s > 0.0 && s.is_finite() {
        row.iter_mut().for_each(|v| *v /= s);
    } else {
        let u = 1.0 / row.len() as f64;
        row.iter_mut().for_each(|v| *v = u);
    }
}

fn softmax(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.iter_mut().for_each(|v| *v = (*v - max).exp());
    normalize_or_uniform(row);
}

impl Estimator {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Estimator::Tree(t) => t.predict_proba(x),
            Estimator::Ensemble(e) => e.predict_proba(x),
        }
    }

    pub fn n_trees(&self) -> usize {
        match self {
            Estimator::Tree(_) => 1,
            Estimator::Ensemble(e) => e.n_trees(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Estimator::Tree(t) => t.n_classes(),
            Estimator::Ensemble(e) => e.n_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Estimator::Tree(t) => t.n_features(),
            Estimator::Ensemble(e) => e.n_features,
        }
    }
}

/// A fitted model with the method tag, hyperparameters and seed that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub method: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub estimator: Estimator,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    method: String,
    params: BTreeMap<String, serde_json::Value>,
    seed: u64,
    n_classes: usize,
    n_features: usize,
    n_trees: usize,
}

impl TrainedModel {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        self.estimator.predict_proba(x)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(crate::learners::tree::argmax_rows(&self.predict_proba(x)?))
    }

    pub fn n_trees(&self) -> usize {
        self.estimator.n_trees()
    }

    pub fn n_classes(&self) -> usize {
        self.estimator.n_classes()
    }

    pub fn n_features(&self) -> usize {
        self.estimator.n_features()
    }

    /// Encodes the model; see `docs/model-format.md`.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&Header {
            method: self.method.clone(),
            params: self.params.clone(),
            seed: self.seed,
            n_classes: self.n_classes(),
            n_features: self.n_features(),
            n_trees: self.n_trees(),
        })?;
        let body = serde_json::to_vec(&self.estimator)?;
        let header_len = u32::try_from(header.len())
            .map_err(|_| Error::Format("header exceeds 4 GiB".into()))?;
        let mut out = Vec::with_capacity(16 + header.len() + body.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&body);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(Error::Format("not a model file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model format version {version}")));
        }
        let header_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let body_start = 16usize
            .checked_add(header_len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::Format("truncated header".into()))?;
        let header: Header = serde_json::from_slice(&bytes[16..body_start])?;
        let estimator: Estimator = serde_json::from_slice(&bytes[body_start..])?;
        if estimator.n_classes() != header.n_classes
            || estimator.n_features() != header.n_features
            || estimator.n_trees() != header.n_trees
        {
            return Err(Error::Format("header does not match body".into()));
        }
        Ok(TrainedModel { method: header.method, params: header.params, seed: header.seed, estimator })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let tmp = path.with_extension("tmp");
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
