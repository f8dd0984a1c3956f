//! Data-level rebalancing: undersamplers, cleaners, oversamplers and the
//! two SMOTE + cleaning hybrids.
//!
//! Every sampler returns a [`ResampleResult`] whose dataset lists the kept
//! original rows first (ascending original index) followed by synthetic rows
//! in generation order.

mod clean;
mod over;
mod under;

use serde::{Deserialize, Serialize};

use crate::data::{ClassDistribution, Dataset, Matrix};
use crate::error::{Error, Result};

pub use clean::{edited_nn, neighborhood_cleaning_rule, one_sided_selection, tomek_links, EnnMode};
pub use over::{random_oversample, smote_family, SmoteVariant};
pub use under::{cluster_centroids, instance_hardness_threshold, near_miss, random_undersample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSel {
    All,
    Mode,
}

impl std::str::FromStr for KindSel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(KindSel::All),
            "mode" => Ok(KindSel::Mode),
            _ => Err(Error::invalid_param(format!("kind_sel `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub k_neighbors: usize,
    pub m_neighbors: usize,
    pub n_neighbors: usize,
    pub kind_sel: KindSel,
    pub threshold_cleaning: f64,
    pub svm_rounds: usize,
    pub svm_reg: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            k_neighbors: 5,
            m_neighbors: 10,
            n_neighbors: 3,
            kind_sel: KindSel::All,
            threshold_cleaning: 0.5,
            svm_rounds: 10,
            svm_reg: 1e-2,
        }
    }
}

impl SamplerParams {
    /// Library defaults per sampler.
    pub fn for_kind(kind: SamplerKind) -> Self {
        let base = SamplerParams::default();
        match kind {
            SamplerKind::OneSidedSelection => SamplerParams { n_neighbors: 1, ..base },
            SamplerKind::Adasyn => SamplerParams { n_neighbors: 5, ..base },
            _ => base,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SamplerKind {
    RandomUnder,
    ClusterCentroids,
    InstanceHardness,
    NearMiss,
    TomekLinks,
    EditedNn,
    RepeatedEnn,
    AllKnn,
    OneSidedSelection,
    NeighborhoodCleaning,
    RandomOver,
    Smote,
    BorderlineSmote,
    SvmSmote,
    Adasyn,
    SmoteEnn,
    SmoteTomek,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 17] = [
        SamplerKind::RandomUnder,
        SamplerKind::ClusterCentroids,
        SamplerKind::InstanceHardness,
        SamplerKind::NearMiss,
        SamplerKind::TomekLinks,
        SamplerKind::EditedNn,
        SamplerKind::RepeatedEnn,
        SamplerKind::AllKnn,
        SamplerKind::OneSidedSelection,
        SamplerKind::NeighborhoodCleaning,
        SamplerKind::RandomOver,
        SamplerKind::Smote,
        SamplerKind::BorderlineSmote,
        SamplerKind::SvmSmote,
        SamplerKind::Adasyn,
        SamplerKind::SmoteEnn,
        SamplerKind::SmoteTomek,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SamplerKind::RandomUnder => "rus",
            SamplerKind::ClusterCentroids => "cc",
            SamplerKind::InstanceHardness => "iht",
            SamplerKind::NearMiss => "nm",
            SamplerKind::TomekLinks => "tl",
            SamplerKind::EditedNn => "enn",
            SamplerKind::RepeatedEnn => "renn",
            SamplerKind::AllKnn => "allknn",
            SamplerKind::OneSidedSelection => "oss",
            SamplerKind::NeighborhoodCleaning => "ncr",
            SamplerKind::RandomOver => "ros",
            SamplerKind::Smote => "smote",
            SamplerKind::BorderlineSmote => "bsmote",
            SamplerKind::SvmSmote => "svmsmote",
            SamplerKind::Adasyn => "adasyn",
            SamplerKind::SmoteEnn => "smoteenn",
            SamplerKind::SmoteTomek => "smotetomek",
        }
    }

    pub fn from_tag(tag: &str) -> Option<SamplerKind> {
        SamplerKind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn is_undersampler(self) -> bool {
        matches!(
            self,
            SamplerKind::RandomUnder
                | SamplerKind::ClusterCentroids
                | SamplerKind::InstanceHardness
                | SamplerKind::NearMiss
        )
    }

    pub fn is_oversampler(self) -> bool {
        matches!(
            self,
            SamplerKind::RandomOver
                | SamplerKind::Smote
                | SamplerKind::BorderlineSmote
                | SamplerKind::SvmSmote
                | SamplerKind::Adasyn
        )
    }
}

/// Resampled dataset plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleResult {
    pub dataset: Dataset,
    /// Original row index of each leading (non-synthetic) output row.
    pub kept_original_indices: Vec<usize>,
    /// Synthetic rows per class.
    pub synthetic_count: Vec<usize>,
    pub method: String,
}

impl ResampleResult {
    pub(crate) fn keep(ds: &Dataset, mut kept: Vec<usize>, method: &str) -> Self {
        kept.sort_unstable();
        ResampleResult {
            dataset: ds.select(&kept),
            kept_original_indices: kept,
            synthetic_count: vec![0; ds.n_classes()],
            method: method.to_string(),
        }
    }

    pub(crate) fn with_synthetic(
        ds: &Dataset,
        mut kept: Vec<usize>,
        synthetic: Vec<(Vec<f64>, usize)>,
        method: &str,
    ) -> Self {
        kept.sort_unstable();
        let mut features = ds.features().select_rows(&kept);
        let mut labels: Vec<usize> = kept.iter().map(|&i| ds.labels()[i]).collect();
        let mut synthetic_count = vec![0; ds.n_classes()];
        for (row, y) in synthetic {
            features.push_row(&row);
            labels.push(y);
            synthetic_count[y] += 1;
        }
        ResampleResult {
            dataset: Dataset::from_parts_unchecked(
                ds.name().to_string(),
                features,
                labels,
                ds.n_classes(),
                ds.schema().to_vec(),
            ),
            kept_original_indices: kept,
            synthetic_count,
            method: method.to_string(),
        }
    }

    /// Identity resample.
    pub(crate) fn identity(ds: &Dataset, method: &str) -> Self {
        Self::keep(ds, (0..ds.n_samples()).collect(), method)
    }

    /// Applies a row subset of `self.dataset` (ascending indices) and keeps
    /// provenance relative to the original input.
    pub(crate) fn restrict(self, rows: &[usize], method: &str) -> Self {
        let n_kept = self.kept_original_indices.len();
        let dataset = self.dataset.select(rows);
        let mut kept = Vec::new();
        let mut synthetic_count = vec![0; dataset.n_classes()];
        for &r in rows {
            if r < n_kept {
                kept.push(self.kept_original_indices[r]);
            } else {
                synthetic_count[self.dataset.labels()[r]] += 1;
            }
        }
        ResampleResult { dataset, kept_original_indices: kept, synthetic_count, method: method.into() }
    }

    pub fn n_synthetic(&self) -> usize {
        self.synthetic_count.iter().sum()
    }

    pub fn features(&self) -> &Matrix {
        self.dataset.features()
    }
}

pub(crate) fn distribution(ds: &Dataset) -> Result<ClassDistribution> {
    ClassDistribution::from_labels(ds.labels(), ds.n_classes())
}

/// Runs any sampler by kind.
pub fn resample(
    kind: SamplerKind,
    ds: &Dataset,
    params: &SamplerParams,
    seed: u64,
) -> Result<ResampleResult> {
    match kind {
        SamplerKind::RandomUnder => random_undersample(ds, seed),
        SamplerKind::ClusterCentroids => cluster_centroids(ds, seed),
        SamplerKind::InstanceHardness => instance_hardness_threshold(ds, seed),
        SamplerKind::NearMiss => near_miss(ds, params.n_neighbors),
        SamplerKind::TomekLinks => tomek_links(ds),
        SamplerKind::EditedNn => edited_nn(ds, params.n_neighbors, params.kind_sel, EnnMode::Single),
        SamplerKind::RepeatedEnn => {
            edited_nn(ds, params.n_neighbors, params.kind_sel, EnnMode::Repeated)
        }
        SamplerKind::AllKnn => edited_nn(ds, params.n_neighbors, params.kind_sel, EnnMode::AllKnn),
        SamplerKind::OneSidedSelection => one_sided_selection(ds, params.n_neighbors, seed),
        SamplerKind::NeighborhoodCleaning => neighborhood_cleaning_rule(
            ds,
            params.n_neighbors,
            params.kind_sel,
            params.threshold_cleaning,
        ),
        SamplerKind::RandomOver => random_oversample(ds, seed),
        SamplerKind::Smote => smote_family(ds, SmoteVariant::Classic, params, seed),
        SamplerKind::BorderlineSmote => smote_family(ds, SmoteVariant::Borderline, params, seed),
        SamplerKind::SvmSmote => smote_family(ds, SmoteVariant::Svm, params, seed),
        SamplerKind::Adasyn => smote_family(ds, SmoteVariant::Adasyn, params, seed),
        SamplerKind::SmoteEnn => hybrid_resample(ds, HybridKind::SmoteEnn, params, seed),
        SamplerKind::SmoteTomek => hybrid_resample(ds, HybridKind::SmoteTomek, params, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HybridKind {
    SmoteEnn,
    SmoteTomek,
}

/// Classic SMOTE to balance, then ENN (`kind_sel = all`, 3 neighbours) or
/// Tomek-link cleaning over every class, synthetic rows included.
pub fn hybrid_resample(
    ds: &Dataset,
    kind: HybridKind,
    params: &SamplerParams,
    seed: u64,
) -> Result<ResampleResult> {
    let smoted = smote_family(ds, SmoteVariant::Classic, params, seed)?;
    let (rows, tag) = match kind {
        HybridKind::SmoteEnn => (
            clean::enn_keep(&smoted.dataset, 3, KindSel::All, None),
            SamplerKind::SmoteEnn.tag(),
        ),
        HybridKind::SmoteTomek => {
            (clean::tomek_keep(&smoted.dataset, None), SamplerKind::SmoteTomek.tag())
        }
    };
    Ok(smoted.restrict(&rows, tag))
}
