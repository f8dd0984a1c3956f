//! Method registry: every benchmarked tag, its defaults and a uniform `fit`.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::data::Dataset;
use crate::ensembles::{
    self, Algorithm, BaggingKind, BaggingParams, BoostParams, CascadeParams, CostBoostKind, CostVector,
    EasyParams, Estimator, ResampleBoostKind, SpeParams, TrainedModel,
};
use crate::error::{Error, Result};
use crate::learners::{fit_tree, TreeParams};
use crate::rng;
use crate::samplers::{self, KindSel, SamplerKind, SamplerParams};

pub type Params = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Base,
    Undersampling,
    Cleaning,
    Oversampling,
    Hybrid,
    UnderEnsemble,
    OverEnsemble,
    CostSensitive,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Base => "base",
            Family::Undersampling => "under-sampling",
            Family::Cleaning => "cleaning",
            Family::Oversampling => "over-sampling",
            Family::Hybrid => "hybrid",
            Family::UnderEnsemble => "under-sampling ensemble",
            Family::OverEnsemble => "over-sampling ensemble",
            Family::CostSensitive => "cost-sensitive",
        }
    }
}

pub const METHOD_TAGS: [&str; 32] = [
    "base", "rus", "cc", "iht", "nm", "tl", "enn", "renn", "allknn", "oss", "ncr", "ros", "smote", "bsmote",
    "svmsmote", "adasyn", "smoteenn", "smotetomek", "spe", "bc", "brf", "ee", "rusboost", "uba", "overboost",
    "smoteboost", "oba", "smba", "cs", "adacost", "adauboost", "asymboost",
];

pub fn is_method(tag: &str) -> bool {
    METHOD_TAGS.contains(&tag)
}

pub fn family(tag: &str) -> Result<Family> {
    Ok(match tag {
        "base" => Family::Base,
        "rus" | "cc" | "iht" | "nm" => Family::Undersampling,
        "tl" | "enn" | "renn" | "allknn" | "oss" | "ncr" => Family::Cleaning,
        "ros" | "smote" | "bsmote" | "svmsmote" | "adasyn" => Family::Oversampling,
        "smoteenn" | "smotetomek" => Family::Hybrid,
        "spe" | "bc" | "brf" | "ee" | "rusboost" | "uba" => Family::UnderEnsemble,
        "overboost" | "smoteboost" | "oba" | "smba" => Family::OverEnsemble,
        "cs" | "adacost" | "adauboost" | "asymboost" => Family::CostSensitive,
        _ => return Err(Error::UnknownMethod(tag.to_string())),
    })
}

/// Default hyperparameters for a tag. `max_depth` (base tree depth, null =
/// unlimited) is accepted by every method.
pub fn default_params(tag: &str) -> Result<Params> {
    let mut p = Params::new();
    let mut set = |k: &str, v: Value| {
        p.insert(k.to_string(), v);
    };
    set("max_depth", Value::Null);
    if let Some(kind) = SamplerKind::from_tag(tag) {
        let sp = SamplerParams::for_kind(kind);
        match kind {
            SamplerKind::NearMiss | SamplerKind::OneSidedSelection => set("n_neighbors", json!(sp.n_neighbors)),
            SamplerKind::EditedNn | SamplerKind::RepeatedEnn | SamplerKind::AllKnn => {
                set("n_neighbors", json!(sp.n_neighbors));
                set("kind_sel", json!("all"));
            }
            SamplerKind::NeighborhoodCleaning => {
                set("n_neighbors", json!(sp.n_neighbors));
                set("kind_sel", json!("all"));
                set("threshold_cleaning", json!(sp.threshold_cleaning));
            }
            SamplerKind::Smote | SamplerKind::SmoteEnn | SamplerKind::SmoteTomek => {
                set("k_neighbors", json!(sp.k_neighbors))
            }
            SamplerKind::BorderlineSmote | SamplerKind::SvmSmote => {
                set("k_neighbors", json!(sp.k_neighbors));
                set("m_neighbors", json!(sp.m_neighbors));
            }
            SamplerKind::Adasyn => set("n_neighbors", json!(sp.n_neighbors)),
            _ => {}
        }
        return Ok(p);
    }
    match tag {
        "base" | "cs" => {}
        "rusboost" | "overboost" | "smoteboost" | "adacost" | "adauboost" | "asymboost" => {
            set("n_estimators", json!(100));
            set("learning_rate", json!(1.0));
            set("algorithm", json!("SAMME"));
            if tag == "smoteboost" {
                set("k_neighbors", json!(5));
            }
        }
        "uba" | "oba" | "smba" | "brf" => {
            set("n_estimators", json!(100));
            set("max_samples", json!(1.0));
            set("max_features", json!(1.0));
            if tag == "smba" {
                set("k_neighbors", json!(5));
            }
        }
        "ee" => {
            set("n_subsets", json!(10));
            set("rounds_per_subset", json!(10));
            set("max_samples", json!(1.0));
            set("max_features", json!(1.0));
        }
        "spe" => {
            set("n_estimators", json!(100));
            set("k_bins", json!(5));
        }
        "bc" => {
            set("n_estimators", json!(100));
            set("replacement", json!(false));
        }
        _ => return Err(Error::UnknownMethod(tag.to_string())),
    }
    Ok(p)
}

/// Defaults overlaid with `overrides`; unknown keys are rejected.
pub fn resolve_params(tag: &str, overrides: &Params) -> Result<Params> {
    let mut p = default_params(tag)?;
    for (k, v) in overrides {
        if !p.contains_key(k) {
            return Err(Error::invalid_param(format!("method `{tag}` has no parameter `{k}`")));
        }
        p.insert(k.clone(), v.clone());
    }
    Ok(p)
}

struct Reader<'a> {
    tag: &'a str,
    p: &'a Params,
    used: BTreeSet<&'a str>,
}

impl<'a> Reader<'a> {
    fn value(&mut self, key: &'a str) -> Result<&'a Value> {
        self.used.insert(key);
        self.p
            .get(key)
            .ok_or_else(|| Error::invalid_param(format!("method `{}` missing parameter `{key}`", self.tag)))
    }

    fn bad(&self, key: &str, want: &str) -> Error {
        Error::invalid_param(format!("method `{}`: `{key}` must be {want}", self.tag))
    }

    fn usize(&mut self, key: &'a str) -> Result<usize> {
        let v = self.value(key)?;
        v.as_u64().map(|u| u as usize).ok_or_else(|| self.bad(key, "a non-negative integer"))
    }

    fn f64(&mut self, key: &'a str) -> Result<f64> {
        let v = self.value(key)?;
        v.as_f64().ok_or_else(|| self.bad(key, "a number"))
    }

    fn bool(&mut self, key: &'a str) -> Result<bool> {
        let v = self.value(key)?;
        v.as_bool().ok_or_else(|| self.bad(key, "a boolean"))
    }

    fn str(&mut self, key: &'a str) -> Result<&'a str> {
        let v = self.value(key)?;
        v.as_str().ok_or_else(|| self.bad(key, "a string"))
    }

    fn opt_usize(&mut self, key: &'a str) -> Result<Option<usize>> {
        match self.value(key)? {
            Value::Null => Ok(None),
            v => v.as_u64().map(|u| Some(u as usize)).ok_or_else(|| self.bad(key, "an integer or null")),
        }
    }

    fn finish(self) -> Result<()> {
        match self.p.keys().find(|k| !self.used.contains(k.as_str())) {
            Some(k) => Err(Error::invalid_param(format!("method `{}` has no parameter `{k}`", self.tag))),
            None => Ok(()),
        }
    }
}

fn sampler_params(r: &mut Reader<'_>, kind: SamplerKind) -> Result<SamplerParams> {
    let mut sp = SamplerParams::for_kind(kind);
    for key in ["k_neighbors", "m_neighbors", "n_neighbors"] {
        if r.p.contains_key(key) {
            let v = r.usize(key)?;
            match key {
                "k_neighbors" => sp.k_neighbors = v,
                "m_neighbors" => sp.m_neighbors = v,
                _ => sp.n_neighbors = v,
            }
        }
    }
    if r.p.contains_key("kind_sel") {
        sp.kind_sel = r.str("kind_sel")?.parse::<KindSel>()?;
    }
    if r.p.contains_key("threshold_cleaning") {
        sp.threshold_cleaning = r.f64("threshold_cleaning")?;
    }
    Ok(sp)
}

fn boost_params(r: &mut Reader<'_>, base: TreeParams) -> Result<BoostParams> {
    Ok(BoostParams {
        n_estimators: r.usize("n_estimators")?,
        learning_rate: r.f64("learning_rate")?,
        algorithm: r.str("algorithm")?.parse::<Algorithm>()?,
        base,
    })
}

/// Fits `tag` on `ds`. `params` may be partial; missing keys take defaults.
pub fn fit(tag: &str, ds: &Dataset, params: &Params, seed: u64) -> Result<TrainedModel> {
    let resolved = resolve_params(tag, params)?;
    let mut r = Reader { tag, p: &resolved, used: BTreeSet::new() };
    let base = TreeParams { max_depth: r.opt_usize("max_depth")?, ..TreeParams::default() };
    let tree_seed = rng::child(seed, "tree", 0);
    let estimator = if let Some(kind) = SamplerKind::from_tag(tag) {
        let sp = sampler_params(&mut r, kind)?;
        r.finish()?;
        let view = samplers::resample(kind, ds, &sp, rng::child(seed, "sampler", 0))?;
        let tp = TreeParams { seed: tree_seed, ..base };
        let t = fit_tree(view.features(), view.dataset.labels(), ds.n_classes(), None, None, &tp)?;
        Estimator::Tree(t)
    } else {
        match tag {
            "base" => {
                r.finish()?;
                let tp = TreeParams { seed: tree_seed, ..base };
                Estimator::Tree(fit_tree(ds.features(), ds.labels(), ds.n_classes(), None, None, &tp)?)
            }
            "cs" => {
                r.finish()?;
                let costs = CostVector::inverse_frequency(&ds.class_counts())?;
                let tp = TreeParams { seed: tree_seed, ..base };
                Estimator::Tree(ensembles::fit_cost_sensitive_tree(ds, &costs, &tp)?)
            }
            "rusboost" | "overboost" | "smoteboost" => {
                let bp = boost_params(&mut r, base)?;
                let mut sp = SamplerParams::default();
                if tag == "smoteboost" {
                    sp.k_neighbors = r.usize("k_neighbors")?;
                }
                r.finish()?;
                let kind = match tag {
                    "rusboost" => ResampleBoostKind::RusBoost,
                    "overboost" => ResampleBoostKind::OverBoost,
                    _ => ResampleBoostKind::SmoteBoost,
                };
                let fit = ensembles::fit_resample_boost(ds, kind, &bp, &sp, seed)?;
                Estimator::Ensemble(Box::new(fit.ensemble))
            }
            "adacost" | "adauboost" | "asymboost" => {
                let bp = boost_params(&mut r, base)?;
                r.finish()?;
                let kind = match tag {
                    "adacost" => CostBoostKind::AdaCost,
                    "adauboost" => CostBoostKind::AdaUBoost,
                    _ => CostBoostKind::AsymBoost,
                };
                let costs = CostVector::inverse_frequency(&ds.class_counts())?;
                let fit = ensembles::fit_cost_boost(ds, kind, &bp, &costs, seed)?;
                Estimator::Ensemble(Box::new(fit.ensemble))
            }
            "uba" | "oba" | "smba" | "brf" => {
                let mut bp = BaggingParams {
                    n_estimators: r.usize("n_estimators")?,
                    max_samples: r.f64("max_samples")?,
                    max_features: r.f64("max_features")?,
                    base,
                    ..Default::default()
                };
                if tag == "smba" {
                    bp.k_neighbors = r.usize("k_neighbors")?;
                }
                r.finish()?;
                let kind = match tag {
                    "uba" => BaggingKind::UnderBagging,
                    "oba" => BaggingKind::OverBagging,
                    "smba" => BaggingKind::SmoteBagging,
                    _ => BaggingKind::Brf,
                };
                Estimator::Ensemble(Box::new(ensembles::fit_balanced_bagging(ds, kind, &bp, seed)?))
            }
            "ee" => {
                let ep = EasyParams {
                    n_subsets: r.usize("n_subsets")?,
                    rounds_per_subset: r.usize("rounds_per_subset")?,
                    max_samples: r.f64("max_samples")?,
                    max_features: r.f64("max_features")?,
                    base,
                };
                r.finish()?;
                Estimator::Ensemble(Box::new(ensembles::fit_easy_ensemble(ds, &ep, seed)?))
            }
            "spe" => {
                let sp = SpeParams { n_estimators: r.usize("n_estimators")?, k_bins: r.usize("k_bins")?, base };
                r.finish()?;
                Estimator::Ensemble(Box::new(ensembles::fit_self_paced_ensemble(ds, &sp, seed)?))
            }
            "bc" => {
                let cp = CascadeParams {
                    n_estimators: r.usize("n_estimators")?,
                    replacement: r.bool("replacement")?,
                    base,
                };
                r.finish()?;
                Estimator::Ensemble(Box::new(ensembles::fit_balance_cascade(ds, &cp, seed)?))
            }
            _ => return Err(Error::UnknownMethod(tag.to_string())),
        }
    };
    Ok(TrainedModel { method: tag.to_string(), params: resolved, seed, estimator })
}
