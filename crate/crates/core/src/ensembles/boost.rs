use serde::{Deserialize, Serialize};

use super::model::{Combiner, Ensemble, Estimator, Member};
use super::CostVector;
use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::learners::{argmax, fit_tree, TreeParams};
use crate::rng;
use crate::samplers::{self, ResampleResult, SamplerKind, SamplerParams};

const PROBA_CLIP: f64 = 1e-12;
const ZERO_ERROR_ODDS: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "SAMME")]
    Samme,
    #[serde(rename = "SAMME.R")]
    SammeR,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SAMME" | "samme" => Ok(Algorithm::Samme),
            "SAMME.R" | "samme.r" => Ok(Algorithm::SammeR),
            _ => Err(Error::invalid_param(format!("algorithm `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub algorithm: Algorithm,
    pub base: TreeParams,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_estimators: 100,
            learning_rate: 1.0,
            algorithm: Algorithm::Samme,
            base: TreeParams::default(),
        }
    }
}

/// Per-round diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub error: f64,
    pub alpha: f64,
    /// Sum of sample weights after the round's update.
    pub weight_sum: f64,
    pub discarded: bool,
}

#[derive(Debug, Clone)]
pub struct BoostFit {
    pub ensemble: Ensemble,
    pub trace: Vec<RoundTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostBoostKind {
    AdaCost,
    AdaUBoost,
    AsymBoost,
}

impl CostBoostKind {
    pub fn tag(self) -> &'static str {
        match self {
            CostBoostKind::AdaCost => "adacost",
            CostBoostKind::AdaUBoost => "adauboost",
            CostBoostKind::AsymBoost => "asymboost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleBoostKind {
    RusBoost,
    OverBoost,
    SmoteBoost,
}

impl ResampleBoostKind {
    pub fn tag(self) -> &'static str {
        match self {
            ResampleBoostKind::RusBoost => "rusboost",
            ResampleBoostKind::OverBoost => "overboost",
            ResampleBoostKind::SmoteBoost => "smoteboost",
        }
    }
}

/// Per-round training view supplier for resample-boosting.
pub(crate) type Resampler<'a> = dyn Fn(usize) -> Result<ResampleResult> + 'a;

/// `β−(c) = 0.5c + 0.5`, applied to misclassified samples.
pub fn adacost_beta_minus(c: f64) -> f64 {
    0.5 * c + 0.5
}

/// `β+(c) = −0.5c + 0.5`, applied to correctly classified samples.
pub fn adacost_beta_plus(c: f64) -> f64 {
    -0.5 * c + 0.5
}

/// SAMME member weight for weighted error `err` with `k` classes.
pub fn samme_alpha(err: f64, k: usize, learning_rate: f64) -> f64 {
    let extra = (k as f64 - 1.0).ln();
    if err <= 0.0 {
        learning_rate * (ZERO_ERROR_ODDS.ln() + extra)
    } else {
        learning_rate * (((1.0 - err) / err).ln() + extra)
    }
}

fn normalize(w: &mut [f64]) -> Result<f64> {
    let s: f64 = w.iter().sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Fit("boosting weights became non-finite or zero".into()));
    }
    w.iter_mut().for_each(|v| *v /= s);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("boosting weights became non-finite".into()));
    }
    Ok(w.iter().sum())
}

/// Weights for the rows of a resampled view: kept rows carry their current
/// weight, synthetic rows get the mean weight of their class's kept rows.
fn view_weights(view: &ResampleResult, full: &Dataset, w: &[f64]) -> Vec<f64> {
    let k = full.n_classes();
    let mut sum = vec![0.0; k];
    let mut cnt = vec![0usize; k];
    for &i in &view.kept_original_indices {
        sum[full.labels()[i]] += w[i];
        cnt[full.labels()[i]] += 1;
    }
    let mut fallback_sum = vec![0.0; k];
    let mut fallback_cnt = vec![0usize; k];
    for (i, &y) in full.labels().iter().enumerate() {
        fallback_sum[y] += w[i];
        fallback_cnt[y] += 1;
    }
    let class_mean: Vec<f64> = (0..k)
        .map(|c| {
            if cnt[c] > 0 {
                sum[c] / cnt[c] as f64
            } else if fallback_cnt[c] > 0 {
                fallback_sum[c] / fallback_cnt[c] as f64
            } else {
                0.0
            }
        })
        .collect();
    let n_kept = view.kept_original_indices.len();
    (0..view.dataset.n_samples())
        .map(|r| {
            if r < n_kept {
                w[view.kept_original_indices[r]]
            } else {
                class_mean[view.dataset.labels()[r]]
            }
        })
        .collect()
}

/// Shared AdaBoost core. Errors and weight updates always use the full
/// training set; `resampler` only changes what each round's tree sees.
pub(crate) fn fit_adaboost(
    ds: &Dataset,
    params: &BoostParams,
    seed: u64,
    resampler: Option<&Resampler<'_>>,
    cost: Option<(CostBoostKind, &CostVector)>,
) -> Result<BoostFit> {
    let t_max = params.n_estimators;
    if t_max == 0 {
        return Err(Error::invalid_param("n_estimators must be >= 1"));
    }
    let eta = params.learning_rate;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid_param(format!("learning_rate={eta} must be > 0")));
    }
    let n = ds.n_samples();
    let k = ds.n_classes();
    let kf = k as f64;
    let y = ds.labels();
    let sample_cost: Option<Vec<f64>> = cost.map(|(_, c)| y.iter().map(|&l| c.get(l)).collect());
    let asym_step: Option<Vec<f64>> = match cost {
        Some((CostBoostKind::AsymBoost, c)) => {
            let min = c.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
            Some(c.as_slice().iter().map(|&ck| (ck / min).sqrt().ln() / t_max as f64).collect())
        }
        _ => None,
    };

    let uniform = vec![1.0 / n as f64; n];
    let mut w = uniform.clone();
    let mut members = Vec::new();
    let mut trace = Vec::with_capacity(t_max);

    for t in 0..t_max {
        if let Some(step) = &asym_step {
            for (wi, &yi) in w.iter_mut().zip(y) {
                *wi *= step[yi].exp();
            }
            normalize(&mut w)?;
        }
        let tree_params = TreeParams { seed: rng::child(seed, "boost-tree", t as u64), ..params.base.clone() };
        let tree = match resampler {
            Some(f) => {
                let view = f(t)?;
                let vw = view_weights(&view, ds, &w);
                fit_tree(view.features(), view.dataset.labels(), k, Some(&vw), None, &tree_params)?
            }
            None => fit_tree(ds.features(), y, k, Some(&w), None, &tree_params)?,
        };
        let proba = tree.predict_proba(ds.features())?;
        let miss: Vec<bool> = (0..n).map(|i| argmax(proba.row(i)) != y[i]).collect();
        let err: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(w, _)| w).sum::<f64>()
            / w.iter().sum::<f64>();

        if err >= 1.0 - 1.0 / kf {
            w.copy_from_slice(&uniform);
            trace.push(RoundTrace { round: t, error: err, alpha: 0.0, weight_sum: w.iter().sum(), discarded: true });
            continue;
        }
        let alpha = match params.algorithm {
            Algorithm::Samme => samme_alpha(err, k, eta),
            Algorithm::SammeR => 1.0,
        };
        members.push(Member::new(Estimator::Tree(tree), alpha));
        if err <= 0.0 {
            trace.push(RoundTrace { round: t, error: err, alpha, weight_sum: w.iter().sum(), discarded: false });
            break;
        }

        for i in 0..n {
            let exponent = match params.algorithm {
                Algorithm::Samme => {
                    let c = sample_cost.as_ref().map_or(1.0, |c| c[i]);
                    match (cost.map(|(kind, _)| kind), miss[i]) {
                        (Some(CostBoostKind::AdaCost), true) => alpha * adacost_beta_minus(c),
                        (Some(CostBoostKind::AdaCost), false) => -alpha * adacost_beta_plus(c),
                        (Some(CostBoostKind::AdaUBoost), true) => alpha * c,
                        (_, true) => alpha,
                        (_, false) => 0.0,
                    }
                }
                Algorithm::SammeR => {
                    let p = proba.row(i);
                    let s: f64 = (0..k)
                        .map(|j| {
                            let code = if j == y[i] { 1.0 } else { -1.0 / (kf - 1.0) };
                            code * p[j].max(PROBA_CLIP).ln()
                        })
                        .sum();
                    let e = -eta * (kf - 1.0) / kf * s;
                    let c = sample_cost.as_ref().map_or(1.0, |c| c[i]);
                    match (cost.map(|(kind, _)| kind), miss[i]) {
                        (Some(CostBoostKind::AdaCost), true) => e * adacost_beta_minus(c),
                        (Some(CostBoostKind::AdaCost), false) => e * adacost_beta_plus(c),
                        (Some(CostBoostKind::AdaUBoost), true) => e * c,
                        _ => e,
                    }
                }
            };
            w[i] *= exponent.exp();
        }
        let weight_sum = normalize(&mut w)?;
        trace.push(RoundTrace { round: t, error: err, alpha, weight_sum, discarded: false });
    }

    if members.is_empty() {
        let tree_params = TreeParams { seed: rng::child(seed, "boost-tree", 0), ..params.base.clone() };
        let tree = fit_tree(ds.features(), y, k, None, None, &tree_params)?;
        members.push(Member::new(Estimator::Tree(tree), 1.0));
    }
    let combiner = match params.algorithm {
        Algorithm::Samme => Combiner::WeightedVote,
        Algorithm::SammeR => Combiner::SammeR,
    };
    Ok(BoostFit { ensemble: Ensemble::new(members, combiner, k, ds.n_features())?, trace })
}

/// Plain AdaBoost on the original data.
pub fn fit_boost(ds: &Dataset, params: &BoostParams, seed: u64) -> Result<BoostFit> {
    fit_adaboost(ds, params, seed, None, None)
}

/// RUSBoost, OverBoost and SMOTEBoost: every round fits on a fresh RUS, ROS
/// or SMOTE view drawn with a per-round seed.
pub fn fit_resample_boost(
    ds: &Dataset,
    kind: ResampleBoostKind,
    params: &BoostParams,
    sampler: &SamplerParams,
    seed: u64,
) -> Result<BoostFit> {
    let sk = match kind {
        ResampleBoostKind::RusBoost => SamplerKind::RandomUnder,
        ResampleBoostKind::OverBoost => SamplerKind::RandomOver,
        ResampleBoostKind::SmoteBoost => SamplerKind::Smote,
    };
    let resampler = |t: usize| {
        samplers::resample(sk, ds, sampler, rng::child(seed, kind.tag(), t as u64))
    };
    fit_adaboost(ds, params, seed, Some(&resampler), None)
}

/// AdaCost, AdaUBoost and AsymBoost.
pub fn fit_cost_boost(
    ds: &Dataset,
    kind: CostBoostKind,
    params: &BoostParams,
    costs: &CostVector,
    seed: u64,
) -> Result<BoostFit> {
    if costs.len() != ds.n_classes() {
        return Err(Error::invalid_param("cost vector length differs from class count"));
    }
    fit_adaboost(ds, params, seed, None, Some((kind, costs)))
}

/// Helper for callers that want the weighted training error of a SAMME
/// ensemble as members are added.
pub fn staged_training_error(ens: &Ensemble, ds: &Dataset) -> Result<Vec<f64>> {
    let k = ds.n_classes();
    let mut votes = Matrix::zeros(ds.n_samples(), k);
    let mut out = Vec::with_capacity(ens.members.len());
    for m in &ens.members {
        let single = Ensemble::new(vec![m.clone()], ens.combiner, k, ens.n_features)?;
        let p = single.predict_proba(ds.features())?;
        for i in 0..ds.n_samples() {
            votes.row_mut(i)[argmax(p.row(i))] += m.weight;
        }
        let wrong = (0..ds.n_samples()).filter(|&i| argmax(votes.row(i)) != ds.labels()[i]).count();
        out.push(wrong as f64 / ds.n_samples() as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, seed: u64) -> Dataset {
        use rand::Rng as _;
        let mut r = rng::rng(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = (i % 5 == 0) as usize;
            let off = if c == 1 { 1.0 } else { 0.0 };
            rows.push([r.gen::<f64>() + off, r.gen::<f64>()]);
            y.push(c);
        }
        Dataset::numeric("toy", Matrix::from_rows(&rows).unwrap(), y, 2).unwrap()
    }

    fn stumps() -> BoostParams {
        BoostParams { n_estimators: 20, base: TreeParams { max_depth: Some(1), ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn alpha_closed_form() {
        assert!((samme_alpha(0.25, 2, 1.0) - 3f64.ln()).abs() < 1e-12);
        assert!((samme_alpha(0.25, 3, 0.5) - 0.5 * (3f64.ln() + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn separable_single_member() {
        let x = Matrix::from_rows(&[[0.0], [0.1], [1.0], [1.1]]).unwrap();
        let d = Dataset::numeric("s", x, vec![0, 0, 1, 1], 2).unwrap();
        let fit = fit_boost(&d, &stumps(), 0).unwrap();
        assert_eq!(fit.ensemble.members.len(), 1);
        assert_eq!(fit.trace.len(), 1);
        let pred = crate::learners::tree::argmax_rows(&fit.ensemble.predict_proba(d.features()).unwrap());
        assert_eq!(pred, vec![0, 0, 1, 1]);
    }

    #[test]
    fn weights_stay_normalized() {
        let d = toy(60, 3);
        let costs = CostVector::inverse_frequency(&d.class_counts()).unwrap();
        for alg in [Algorithm::Samme, Algorithm::SammeR] {
            let p = BoostParams { algorithm: alg, ..stumps() };
            let mut traces = vec![fit_boost(&d, &p, 1).unwrap().trace];
            for kind in [CostBoostKind::AdaCost, CostBoostKind::AdaUBoost, CostBoostKind::AsymBoost] {
                traces.push(fit_cost_boost(&d, kind, &p, &costs, 1).unwrap().trace);
            }
            for kind in [ResampleBoostKind::RusBoost, ResampleBoostKind::OverBoost, ResampleBoostKind::SmoteBoost] {
                traces.push(fit_resample_boost(&d, kind, &p, &SamplerParams::default(), 1).unwrap().trace);
            }
            for tr in traces {
                assert!(!tr.is_empty());
                for r in tr {
                    assert!((r.weight_sum - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn adacost_uniform_costs_equals_samme() {
        let d = toy(50, 8);
        let uniform = CostVector::new(vec![1.0, 1.0]).unwrap();
        let a = fit_cost_boost(&d, CostBoostKind::AdaCost, &stumps(), &uniform, 2).unwrap();
        let s = fit_boost(&d, &stumps(), 2).unwrap();
        assert_eq!(a.ensemble, s.ensemble);
    }

    #[test]
    fn zero_estimators_rejected() {
        let d = toy(20, 1);
        let p = BoostParams { n_estimators: 0, ..Default::default() };
        assert!(fit_boost(&d, &p, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let d = toy(40, 2);
        let p = BoostParams { algorithm: Algorithm::SammeR, ..stumps() };
        let a = fit_resample_boost(&d, ResampleBoostKind::SmoteBoost, &p, &SamplerParams::default(), 5).unwrap();
        let b = fit_resample_boost(&d, ResampleBoostKind::SmoteBoost, &p, &SamplerParams::default(), 5).unwrap();
        assert_eq!(a.ensemble, b.ensemble);
    }
}
