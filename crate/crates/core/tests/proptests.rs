use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use imbalkit::data::preprocess::encode_table;
use imbalkit::data::{stratified_kfold, Dataset, Matrix};
use imbalkit::ensembles::{
    fit_boost, fit_cost_boost, fit_resample_boost, Algorithm, BoostParams, CostBoostKind, CostVector,
    ResampleBoostKind, TrainedModel,
};
use imbalkit::learners::TreeParams;
use imbalkit::metrics::{average_precision, average_ranks, win_ratio_matrix};
use imbalkit::perturb::{inject_label_noise, inject_missing, intensify_imbalance};
use imbalkit::samplers::{resample, SamplerKind, SamplerParams};
use imbalkit::tune::{random_search, search_space, SearchOptions};
use imbalkit::{bench, methods};

fn make(counts: &[usize], d: usize, seed: u64) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            rows.push((0..d).map(|j| r.gen::<f64>() * 4.0 + if j == 0 { c as f64 * 1.5 } else { 0.0 }).collect::<Vec<_>>());
            y.push(c);
        }
    }
    Dataset::numeric("p", Matrix::from_rows(&rows).unwrap(), y, counts.len()).unwrap()
}

fn counts_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(8usize..40, 2..=3)
}

fn on_segment_or_ray(p: &[f64], ds: &Dataset, class: usize) -> bool {
    let rows = &ds.class_indices()[class];
    for &a in rows {
        for &b in rows {
            let (va, vb) = (ds.row(a), ds.row(b));
            let dir: Vec<f64> = vb.iter().zip(va).map(|(x, y)| x - y).collect();
            let len2: f64 = dir.iter().map(|v| v * v).sum();
            let off: Vec<f64> = p.iter().zip(va).map(|(x, y)| x - y).collect();
            if len2 == 0.0 {
                if off.iter().all(|v| v.abs() < 1e-9) {
                    return true;
                }
                continue;
            }
            let t = off.iter().zip(&dir).map(|(o, d)| o * d).sum::<f64>() / len2;
            let resid: f64 = off.iter().zip(&dir).map(|(o, d)| (o - t * d).powi(2)).sum::<f64>().sqrt();
            if resid < 1e-9 && (-1.0 - 1e-9..=1.0 + 1e-9).contains(&t) {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn folds_are_stratified(labels in prop::collection::vec(0usize..4, 10..200), k in 2usize..6, seed: u64) {
        let plan = stratified_kfold(&labels, k, seed).unwrap();
        let mut seen = vec![0usize; labels.len()];
        for f in 0..k {
            for i in plan.test_indices(f) {
                seen[i] += 1;
            }
            for c in 0..4 {
                let total = labels.iter().filter(|&&y| y == c).count() as f64;
                let got = plan.test_indices(f).iter().filter(|&&i| labels[i] == c).count() as f64;
                prop_assert!((got - total / k as f64).abs() <= 1.0);
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn undersamplers_equalize_to_minority(counts in counts_strategy(), seed in 0u64..1000) {
        let ds = make(&counts, 3, seed);
        let min = *counts.iter().min().unwrap();
        for kind in SamplerKind::ALL.into_iter().filter(|k| k.is_undersampler()) {
            let out = resample(kind, &ds, &SamplerParams::for_kind(kind), seed).unwrap();
            prop_assert!(out.dataset.class_counts().iter().all(|&c| c == min), "{:?}", kind);
        }
    }

    #[test]
    fn oversamplers_equalize_to_majority_on_segments(counts in counts_strategy(), seed in 0u64..1000) {
        let ds = make(&counts, 2, seed);
        let max = *counts.iter().max().unwrap();
        for kind in SamplerKind::ALL.into_iter().filter(|k| k.is_oversampler()) {
            let out = resample(kind, &ds, &SamplerParams::for_kind(kind), seed).unwrap();
            prop_assert!(out.dataset.class_counts().iter().all(|&c| c == max), "{:?}", kind);
            let n_kept = out.kept_original_indices.len();
            for i in n_kept..out.dataset.n_samples() {
                let c = out.dataset.labels()[i];
                prop_assert!(on_segment_or_ray(out.dataset.row(i), &ds, c), "{:?} row {}", kind, i);
            }
        }
    }

    #[test]
    fn cleaners_keep_original_rows_and_the_minority(counts in counts_strategy(), seed in 0u64..1000) {
        let ds = make(&counts, 2, seed);
        let minority = (0..counts.len()).min_by_key(|&c| counts[c]).unwrap();
        for tag in ["tl", "enn", "renn", "allknn", "oss", "ncr"] {
            let kind = SamplerKind::from_tag(tag).unwrap();
            let out = resample(kind, &ds, &SamplerParams::for_kind(kind), seed).unwrap();
            prop_assert_eq!(out.n_synthetic(), 0);
            prop_assert_eq!(out.dataset.class_counts()[minority], counts[minority], "{}", tag);
            for (r, &orig) in out.kept_original_indices.iter().enumerate() {
                prop_assert_eq!(out.dataset.row(r), ds.row(orig));
            }
        }
    }

    #[test]
    fn perturbations_keep_their_contracts(counts in counts_strategy(), seed: u64, ratio in 0.0f64..0.9) {
        let ds = make(&counts, 3, seed % 1000);
        let noisy = inject_label_noise(&ds, ratio, seed).unwrap();
        prop_assert_eq!(noisy.class_counts(), ds.class_counts());
        let min = *counts.iter().min().unwrap();
        let changed = ds.labels().iter().zip(noisy.labels()).filter(|(a, b)| a != b).count();
        prop_assert_eq!(changed, 2 * (ratio * min as f64).floor() as usize);

        let masked = inject_missing(&ds, ratio, seed).unwrap();
        let cells = (0..ds.n_samples())
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| ds.features().get(i, j) != masked.features().get(i, j))
            .count();
        prop_assert_eq!(cells, (ratio * (ds.n_samples() * 3) as f64).floor() as usize);

        let level = 100.0 + ratio * 200.0;
        let keep = (min as f64 * 100.0 / level).floor() as usize;
        if keep >= 2 {
            let out = intensify_imbalance(&ds, level, seed).unwrap();
            prop_assert_eq!(*out.class_counts().iter().min().unwrap(), keep);
        }
    }

    #[test]
    fn preprocessing_standardizes_training_columns(counts in counts_strategy(), seed in 0u64..1000) {
        let ds = make(&counts, 3, seed);
        let table = bench::runner::dataset_to_table(&ds).unwrap();
        let (enc, _) = encode_table(&table, "p").unwrap();
        for j in 0..3 {
            let col = enc.features().column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-9 && (std - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn average_precision_is_bounded(truth in prop::collection::vec(any::<bool>(), 1..60), seed: u64) {
        prop_assume!(truth.iter().any(|&t| t));
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = truth.iter().map(|_| (r.gen_range(0..5) as f64) / 4.0).collect();
        let ap = average_precision(&truth, &scores).unwrap();
        prop_assert!((0.0..=1.0).contains(&ap));
        let perfect: Vec<f64> = truth.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        prop_assert_eq!(average_precision(&truth, &perfect).unwrap(), 1.0);
    }

    #[test]
    fn ranks_and_win_ratios_are_consistent(scores in prop::collection::vec(prop::collection::vec(0u8..4, 5), 2..6)) {
        let scores: Vec<Vec<f64>> = scores.iter().map(|s| s.iter().map(|&v| v as f64).collect()).collect();
        let m = scores.len();
        for d in 0..5 {
            let col: Vec<f64> = scores.iter().map(|s| s[d]).collect();
            let sum: f64 = average_ranks(&col).iter().sum();
            prop_assert!((sum - (m * (m + 1)) as f64 / 2.0).abs() < 1e-12);
        }
        let w = win_ratio_matrix(&scores).unwrap();
        for r in 0..m {
            for c in 0..m {
                prop_assert!(w[r][c] + w[c][r] <= 1.0 + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn boosting_weights_stay_normalized(counts in counts_strategy(), seed in 0u64..1000, real: bool) {
        let ds = make(&counts, 2, seed);
        let params = BoostParams {
            n_estimators: 8,
            learning_rate: 0.5,
            algorithm: if real { Algorithm::SammeR } else { Algorithm::Samme },
            base: TreeParams { max_depth: Some(2), ..TreeParams::default() },
        };
        let costs = CostVector::inverse_frequency(&ds.class_counts()).unwrap();
        let mut traces = vec![fit_boost(&ds, &params, seed).unwrap().trace];
        for kind in [ResampleBoostKind::RusBoost, ResampleBoostKind::OverBoost, ResampleBoostKind::SmoteBoost] {
            traces.push(fit_resample_boost(&ds, kind, &params, &SamplerParams::default(), seed).unwrap().trace);
        }
        for kind in [CostBoostKind::AdaCost, CostBoostKind::AdaUBoost, CostBoostKind::AsymBoost] {
            traces.push(fit_cost_boost(&ds, kind, &params, &costs, seed).unwrap().trace);
        }
        for trace in traces {
            for round in trace {
                prop_assert!((round.weight_sum - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn models_predict_distributions_and_round_trip(seed in 0u64..1000, tag_idx in 0usize..32) {
        let tag = methods::METHOD_TAGS[tag_idx];
        let ds = make(&[30, 12], 2, seed);
        let mut params = methods::Params::new();
        let defaults = methods::default_params(tag).unwrap();
        for key in ["n_estimators", "n_subsets", "rounds_per_subset"] {
            if defaults.contains_key(key) {
                params.insert(key.to_string(), serde_json::json!(3));
            }
        }
        let model = methods::fit(tag, &ds, &params, seed).unwrap();
        let proba = model.predict_proba(ds.features()).unwrap();
        for row in proba.iter_rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
        let bytes = model.to_bytes().unwrap();
        let back = TrainedModel::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        prop_assert_eq!(back.predict_proba(ds.features()).unwrap(), proba);
    }

    #[test]
    fn tuning_draws_stay_in_domain(seed: u64, tag in prop::sample::select(vec!["nm", "enn", "smote", "bc", "uba"])) {
        let ds = make(&[40, 15], 2, seed % 1000);
        let mut fixed = methods::Params::new();
        if methods::default_params(tag).unwrap().contains_key("n_estimators") && tag != "bc" {
            fixed.insert("n_estimators".into(), serde_json::json!(3));
        }
        let opts = SearchOptions { budget: 4, patience: 10, fixed };
        let res = random_search(&ds, tag, &opts, seed, None).unwrap();
        let space = search_space(tag).unwrap();
        for t in res.trials.iter().filter(|t| !t.is_default) {
            for (name, dom) in &space {
                prop_assert!(dom.contains(&t.params[*name]), "{} {}", name, t.params[*name]);
            }
        }
        prop_assert!(res.best_score >= res.default_score.unwrap_or(f64::NEG_INFINITY));
    }
}

#[test]
fn job_seeds_are_unique_across_a_grid() {
    let text = r#"
methods = ["base", "rus", "ros", "spe"]
seeds = [0, 1, 2]
folds = 5
[[datasets]]
synthetic = { n = 100, d = 2, ir = 3.0 }
[[datasets]]
synthetic = { n = 100, d = 2, ir = 3.0, seed = 1 }
[[perturb]]
kind = "label_noise"
levels = [0.1, 0.2, 0.4]
"#;
    let cfg = bench::BenchConfig::from_toml(text).unwrap();
    let jobs = bench::build_jobs(&cfg).unwrap();
    assert_eq!(jobs.len(), 2 * 3 * 4 * 4 * 5);
    let unique: std::collections::HashSet<u64> = jobs.iter().map(|j| j.job_seed).collect();
    assert_eq!(unique.len(), jobs.len());
}
