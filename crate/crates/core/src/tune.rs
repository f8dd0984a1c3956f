//! Seeded random hyperparameter search with paired cross-validation.

use std::io::Write;
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::data::{stratified_kfold, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::methods::{self, Params};
use crate::metrics;
use crate::rng;

pub const TUNE_FOLDS: usize = 5;
pub const MIN_LEARNING_RATE: f64 = 1e-3;
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Int { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
    Categorical { values: Vec<Value> },
}

impl Domain {
    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Domain::Int { lo, hi } => v.as_i64().is_some_and(|x| x >= *lo && x <= *hi),
            Domain::Real { lo, hi } => v.as_f64().is_some_and(|x| x >= *lo && x <= *hi),
            Domain::Categorical { values } => values.contains(v),
        }
    }

    fn sample(&self, name: &str, r: &mut rng::Rng) -> Value {
        match self {
            Domain::Int { lo, hi } => json!(r.gen_range(*lo..=*hi)),
            Domain::Real { lo, hi } => {
                let v = lo + r.gen::<f64>() * (hi - lo);
                if name == "learning_rate" {
                    json!(v.max(MIN_LEARNING_RATE))
                } else {
                    json!(v)
                }
            }
            Domain::Categorical { values } => values[r.gen_range(0..values.len())].clone(),
        }
    }
}

pub type SearchSpace = Vec<(&'static str, Domain)>;

pub const TUNABLE_METHODS: [&str; 23] = [
    "nm", "enn", "renn", "allknn", "oss", "ncr", "smote", "bsmote", "svmsmote", "adasyn", "spe", "bc", "brf",
    "ee", "rusboost", "uba", "overboost", "oba", "smoteboost", "smba", "adacost", "adauboost", "asymboost",
];

/// Search space for a tunable method, or `None`.
pub fn search_space(tag: &str) -> Option<SearchSpace> {
    let nn = || ("n_neighbors", Domain::Int { lo: 1, hi: 10 });
    let kn = || ("k_neighbors", Domain::Int { lo: 1, hi: 10 });
    let mn = || ("m_neighbors", Domain::Int { lo: 1, hi: 10 });
    let kind = || ("kind_sel", Domain::Categorical { values: vec![json!("all"), json!("mode")] });
    let frac = |n: &'static str| (n, Domain::Real { lo: 0.5, hi: 1.0 });
    let boost = || {
        vec![
            ("learning_rate", Domain::Real { lo: 0.0, hi: 1.0 }),
            ("algorithm", Domain::Categorical { values: vec![json!("SAMME"), json!("SAMME.R")] }),
        ]
    };
    Some(match tag {
        "nm" | "oss" | "adasyn" => vec![nn()],
        "enn" | "renn" | "allknn" => vec![nn(), kind()],
        "ncr" => vec![nn(), kind(), ("threshold_cleaning", Domain::Real { lo: 0.0, hi: 1.0 })],
        "smote" => vec![kn()],
        "bsmote" | "svmsmote" => vec![kn(), mn()],
        "spe" => vec![("k_bins", Domain::Int { lo: 1, hi: 10 })],
        "bc" => vec![("replacement", Domain::Categorical { values: vec![json!(true), json!(false)] })],
        "brf" | "ee" | "uba" | "oba" => vec![frac("max_samples"), frac("max_features")],
        "smba" => vec![frac("max_samples"), frac("max_features"), kn()],
        "rusboost" | "overboost" | "adacost" | "adauboost" | "asymboost" => boost(),
        "smoteboost" => {
            let mut b = boost();
            b.push(kn());
            b
        }
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub is_default: bool,
    pub method: String,
    pub params: Params,
    pub fold_auprc: Vec<f64>,
    /// Mean fold AUPRC; `None` when the configuration failed to fit.
    pub mean_auprc: Option<f64>,
    pub error: Option<String>,
    pub seed: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_params: Params,
    pub best_score: f64,
    pub default_score: Option<f64>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub budget: usize,
    pub patience: usize,
    /// Fixed parameters applied to every trial (for example a smaller
    /// `n_estimators` for quick runs).
    pub fixed: Params,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 100, patience: 10, fixed: Params::new() }
    }
}

/// Mean out-of-fold AUPRC of `params` under `plan`. Fit seeds depend only on
/// the fold, so every configuration sees identical randomness.
pub fn cross_val_auprc(tag: &str, ds: &Dataset, params: &Params, plan: &FoldPlan, seed: u64) -> Result<Vec<f64>> {
    (0..plan.k)
        .map(|f| {
            let train = ds.select(&plan.train_indices(f));
            let test_idx = plan.test_indices(f);
            let test = ds.select(&test_idx);
            let model = methods::fit(tag, &train, params, rng::child(seed, "tune-fit", f as u64))?;
            let proba = model.predict_proba(test.features())?;
            metrics::auprc(test.labels(), &proba)
        })
        .collect()
}

fn run_trial(
    tag: &str,
    ds: &Dataset,
    params: Params,
    plan: &FoldPlan,
    seed: u64,
    trial: usize,
    is_default: bool,
) -> TrialRecord {
    let start = Instant::now();
    let (fold_auprc, mean_auprc, error) = match cross_val_auprc(tag, ds, &params, plan, seed) {
        Ok(v) => {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (v, Some(mean), None)
        }
        Err(e) => (Vec::new(), None, Some(e.to_string())),
    };
    TrialRecord {
        trial,
        is_default,
        method: tag.to_string(),
        params,
        fold_auprc,
        mean_auprc,
        error,
        seed,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Random search. The default configuration is trial 0; `budget` further
/// distinct configurations are drawn uniformly from the search space. The
/// search stops early after `patience` trials without strict improvement,
/// or when every distinct configuration has been tried. The best trial
/// wins, ties going to the earliest.
pub fn random_search(
    ds: &Dataset,
    tag: &str,
    opts: &SearchOptions,
    seed: u64,
    mut log: Option<&mut dyn Write>,
) -> Result<SearchResult> {
    let space = search_space(tag).ok_or_else(|| {
        if methods::is_method(tag) {
            Error::invalid_param(format!("method `{tag}` has no search space"))
        } else {
            Error::UnknownMethod(tag.to_string())
        }
    })?;
    if opts.budget == 0 {
        return Err(Error::invalid_param("budget must be >= 1"));
    }
    let plan = stratified_kfold(ds.labels(), TUNE_FOLDS, rng::child(seed, "tune-folds", 0))?;
    let defaults = methods::resolve_params(tag, &opts.fixed)?;
    let mut seen: Vec<Params> = vec![defaults.clone()];
    let mut trials = Vec::new();
    let emit = |rec: &TrialRecord, log: &mut Option<&mut dyn Write>| -> Result<()> {
        if let Some(w) = log.as_mut() {
            serde_json::to_writer(&mut **w, rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    };

    let first = run_trial(tag, ds, defaults, &plan, seed, 0, true);
    emit(&first, &mut log)?;
    let mut best: Option<(f64, usize)> = first.mean_auprc.map(|s| (s, 0));
    let default_score = first.mean_auprc;
    trials.push(first);

    let mut r = rng::rng(rng::child(seed, "tune-draw", 0));
    let mut since_best = 0;
    'outer: for t in 1..=opts.budget {
        let mut draws = 0;
        let params = loop {
            let mut p = methods::resolve_params(tag, &opts.fixed)?;
            for (name, dom) in &space {
                p.insert((*name).to_string(), dom.sample(name, &mut r));
            }
            if !seen.contains(&p) {
                break p;
            }
            draws += 1;
            if draws >= MAX_REDRAWS {
                break 'outer;
            }
        };
        seen.push(params.clone());
        let rec = run_trial(tag, ds, params, &plan, seed, t, false);
        emit(&rec, &mut log)?;
        match (rec.mean_auprc, best) {
            (Some(s), Some((b, _))) if s > b => {
                best = Some((s, t));
                since_best = 0;
            }
            (Some(s), None) => {
                best = Some((s, t));
                since_best = 0;
            }
            _ => since_best += 1,
        }
        trials.push(rec);
        if since_best >= opts.patience {
            break;
        }
    }
    let (best_score, idx) = best.ok_or_else(|| {
        Error::Fit(format!(
            "every configuration of `{tag}` failed; first error: {}",
            trials[0].error.as_deref().unwrap_or("unknown")
        ))
    })?;
    Ok(SearchResult { best_params: trials[idx].params.clone(), best_score, default_score, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;

    #[test]
    fn spaces_cover_tunable_methods() {
        for t in TUNABLE_METHODS {
            let space = search_space(t).unwrap();
            let defaults = methods::default_params(t).unwrap();
            for (name, _) in &space {
                assert!(defaults.contains_key(*name), "{t}.{name}");
            }
        }
        assert!(search_space("base").is_none());
        assert!(search_space("rus").is_none());
    }

    #[test]
    fn draws_stay_in_domain() {
        let mut r = rng::rng(0);
        for t in TUNABLE_METHODS {
            for (name, dom) in search_space(t).unwrap() {
                for _ in 0..50 {
                    let v = dom.sample(name, &mut r);
                    assert!(dom.contains(&v), "{t}.{name}={v}");
                    if name == "learning_rate" {
                        assert!(v.as_f64().unwrap() >= MIN_LEARNING_RATE);
                    }
                }
            }
        }
    }

    fn toy() -> Dataset {
        let mut r = rng::rng(4);
        let rows: Vec<[f64; 2]> = (0..60).map(|_| [r.gen(), r.gen()]).collect();
        let y = rows.iter().enumerate().map(|(i, p)| (i % 5 == 0 || p[0] > 0.9) as usize).collect();
        Dataset::numeric("tune", Matrix::from_rows(&rows).unwrap(), y, 2).unwrap()
    }

    #[test]
    fn budget_one_and_determinism() {
        let d = toy();
        let opts = SearchOptions { budget: 1, patience: 10, fixed: Params::new() };
        let a = random_search(&d, "enn", &opts, 1, None).unwrap();
        assert_eq!(a.trials.len(), 2);
        let scores: Vec<f64> = a.trials.iter().map(|t| t.mean_auprc.unwrap()).collect();
        assert_eq!(a.best_score, scores[0].max(scores[1]));
        let b = random_search(&d, "enn", &opts, 1, None).unwrap();
        assert_eq!(a.best_params, b.best_params);
        assert!(random_search(&d, "base", &opts, 1, None).is_err());
        let zero = SearchOptions { budget: 0, ..opts };
        assert!(random_search(&d, "enn", &zero, 1, None).is_err());
    }

    #[test]
    fn exhausts_small_space_and_logs() {
        let d = toy();
        let opts = SearchOptions { budget: 30, patience: 100, fixed: Params::new() };
        let mut buf = Vec::new();
        let res = random_search(&d, "bc", &opts, 2, Some(&mut buf)).unwrap();
        // Defaults cover replacement=false; only replacement=true remains.
        assert_eq!(res.trials.len(), 2);
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
        assert!(res.best_score >= res.default_score.unwrap());
    }

    #[test]
    fn patience_stops_early() {
        let d = toy();
        let opts = SearchOptions { budget: 50, patience: 2, fixed: Params::new() };
        let res = random_search(&d, "ncr", &opts, 3, None).unwrap();
        assert!(res.trials.len() < 51);
        let best = res.trials.iter().position(|t| t.params == res.best_params).unwrap();
        assert!(res.trials.len() - 1 - best <= 2 || res.trials.len() == 51);
    }
}
