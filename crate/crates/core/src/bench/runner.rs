use std::collections::HashSet;
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{BenchConfig, DatasetSource};
use super::records::{BenchRecord, RecordKey, RecordPayload, RecordStore, Status, Timing};
use crate::data::preprocess::{self, Schema};
use crate::data::{stratified_kfold, ClassDistribution, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::ingest::openml::resolve_cache_dir;
use crate::ingest::{parse_arff, parse_csv, Cell, Column, ColumnType, CsvOptions, FetchOptions, LabelEncoding, OpenMl, RawTable, TargetColumn};
use crate::methods::{self, Params};
use crate::metrics;
use crate::perturb::PerturbationSpec;
use crate::rng::{self, SeedPart};
use crate::tune::{self, SearchOptions};

/// A loaded dataset with its label encoding and inferred schema.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub name: String,
    pub table: RawTable,
    pub labels: LabelEncoding,
    pub schema: Schema,
    pub imbalance_ratio: f64,
}

impl LoadedData {
    pub fn new(name: impl Into<String>, table: RawTable) -> Result<Self> {
        if table.has_missing() {
            return Err(Error::invalid_dataset("raw data contains missing values"));
        }
        let labels = LabelEncoding::fit(&table)?;
        let dist = ClassDistribution::from_labels(&labels.labels, labels.n_classes())?;
        let schema = Schema::infer(&table);
        Ok(LoadedData { name: name.into(), table, labels, schema, imbalance_ratio: dist.imbalance_ratio })
    }

    /// Standardizes on `train` and encodes both splits with the same model.
    pub fn split(&self, train: &[usize], test: &[usize]) -> Result<(Dataset, Dataset)> {
        let model = preprocess::fit(&self.table, &self.schema, train)?;
        let tr = model.apply(&self.table, &self.labels, train, &self.name)?;
        let te = model.apply(&self.table, &self.labels, test, &self.name)?;
        Ok((tr, te))
    }

    /// Encodes every row with statistics from every row.
    pub fn full(&self) -> Result<Dataset> {
        let rows: Vec<usize> = (0..self.table.n_rows()).collect();
        let model = preprocess::fit(&self.table, &self.schema, &rows)?;
        model.apply(&self.table, &self.labels, &rows, &self.name)
    }
}

/// Numeric dataset as a raw table with a nominal target named `class`.
pub fn dataset_to_table(ds: &Dataset) -> Result<RawTable> {
    let mut columns: Vec<Column> = (0..ds.n_features())
        .map(|j| Column { name: format!("x{j}"), kind: ColumnType::Numeric })
        .collect();
    columns.push(Column {
        name: "class".into(),
        kind: ColumnType::Nominal((0..ds.n_classes()).map(|c| c.to_string()).collect()),
    });
    let rows = (0..ds.n_samples())
        .map(|i| {
            let mut row: Vec<Cell> = ds.row(i).iter().map(|&v| Cell::Number(v)).collect();
            row.push(Cell::Nominal(ds.labels()[i]));
            row
        })
        .collect();
    RawTable::new(ds.name(), columns, rows, ds.n_features())
}

fn load_file(path: &Path, target: Option<&str>) -> Result<RawTable> {
    let bytes = std::fs::read(path)?;
    let is_arff = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff"));
    let table = if is_arff {
        parse_arff(&bytes)?.1
    } else {
        let target = target.map_or(TargetColumn::Last, |t| TargetColumn::Name(t.to_string()));
        return parse_csv(&bytes, &CsvOptions { target, ..CsvOptions::default() });
    };
    match target {
        Some(t) => {
            let idx = table
                .column_index(t)
                .ok_or_else(|| Error::Schema(format!("{}: no column `{t}`", path.display())))?;
            table.with_target(idx)
        }
        None => Ok(table),
    }
}

/// Resolves dataset sources. OpenML requests go through the supplied
/// client, or a default HTTP client over the configured cache.
pub struct DataLoader {
    openml: Option<OpenMl>,
    cache_dir: Option<std::path::PathBuf>,
    base_dir: std::path::PathBuf,
}

impl DataLoader {
    pub fn new(cache_dir: Option<&Path>) -> Self {
        DataLoader { openml: None, cache_dir: cache_dir.map(Path::to_path_buf), base_dir: ".".into() }
    }

    pub fn with_openml(mut self, client: OpenMl) -> Self {
        self.openml = Some(client);
        self
    }

    /// Relative dataset paths are resolved against `dir`.
    pub fn with_base_dir(mut self, dir: &Path) -> Self {
        self.base_dir = dir.to_path_buf();
        self
    }

    fn client(&mut self) -> Result<&OpenMl> {
        if self.openml.is_none() {
            #[cfg(feature = "http")]
            {
                self.openml = Some(OpenMl::with_http(resolve_cache_dir(self.cache_dir.as_deref())));
            }
            #[cfg(not(feature = "http"))]
            {
                let _ = resolve_cache_dir(self.cache_dir.as_deref());
                return Err(Error::Config("OpenML sources need the `http` feature".into()));
            }
        }
        Ok(self.openml.as_ref().expect("set above"))
    }

    pub fn load(&mut self, src: &DatasetSource) -> Result<LoadedData> {
        let name = src.display_name();
        let opts = FetchOptions { target: src.target.clone() };
        let table = if let Some(p) = &src.path {
            load_file(&self.base_dir.join(p), src.target.as_deref())?
        } else if let Some(n) = &src.openml {
            self.client()?.fetch_by_name(n, &opts)?
        } else if let Some(id) = src.openml_id {
            self.client()?.fetch(id, &opts)?
        } else if let Some(spec) = &src.synthetic {
            dataset_to_table(&spec.generate()?)?
        } else {
            return Err(Error::Config(format!("dataset `{name}` has no source")));
        };
        LoadedData::new(name, table)
    }
}

/// One grid cell.
#[derive(Debug, Clone)]
pub struct Job {
    pub dataset: usize,
    pub seed: u64,
    pub perturbation: Option<PerturbationSpec>,
    pub method: String,
    pub fold: usize,
    pub job_seed: u64,
    pub key: RecordKey,
}

pub fn perturbation_key(p: &Option<PerturbationSpec>) -> String {
    p.map_or_else(|| "none".to_string(), |s| s.key())
}

/// `hash(seed, dataset, method, fold, perturbation)`.
pub fn job_seed(seed: u64, dataset: &str, method: &str, fold: usize, perturbation: &str) -> u64 {
    rng::derive(
        seed,
        &[SeedPart::Str(dataset), SeedPart::Str(method), SeedPart::Int(fold as u64), SeedPart::Str(perturbation)],
    )
}

/// Fold assignment seed; shared by every method and perturbation so that
/// comparisons are paired.
pub fn fold_seed(seed: u64, dataset: &str) -> u64 {
    rng::derive(seed, &[SeedPart::Str(dataset)])
}

/// Perturbation seed; independent of the method for the same reason.
pub fn perturb_seed(seed: u64, dataset: &str, fold: usize, perturbation: &str) -> u64 {
    rng::derive(
        seed,
        &[SeedPart::Str("perturb"), SeedPart::Str(dataset), SeedPart::Int(fold as u64), SeedPart::Str(perturbation)],
    )
}

/// Every grid cell in config order: dataset, seed, perturbation, method,
/// fold.
pub fn build_jobs(cfg: &BenchConfig) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    let mut seeds = HashSet::new();
    let perturbations = cfg.perturbations();
    for (d, src) in cfg.datasets.iter().enumerate() {
        let name = src.display_name();
        for &seed in &cfg.seeds {
            for p in &perturbations {
                let pk = perturbation_key(p);
                for method in &cfg.methods {
                    for fold in 0..cfg.folds {
                        let js = job_seed(seed, &name, method, fold, &pk);
                        if !seeds.insert(js) {
                            return Err(Error::Config(format!(
                                "job seed collision at {name}/{pk}/{method}/{seed}/{fold}"
                            )));
                        }
                        jobs.push(Job {
                            dataset: d,
                            seed,
                            perturbation: *p,
                            method: method.clone(),
                            fold,
                            job_seed: js,
                            key: RecordKey {
                                dataset: name.clone(),
                                perturbation: pk.clone(),
                                method: method.clone(),
                                seed,
                                fold,
                            },
                        });
                    }
                }
            }
        }
    }
    Ok(jobs)
}

struct Prepared {
    data: std::result::Result<LoadedData, String>,
    plans: Vec<std::result::Result<FoldPlan, String>>,
}

struct JobOutcome {
    metrics: metrics::MetricTriple,
    params: Params,
    timing: Timing,
}

fn execute(cfg: &BenchConfig, data: &LoadedData, plan: &FoldPlan, job: &Job, params: &mut Params) -> Result<JobOutcome> {
    let (mut train, test) = data.split(&plan.train_indices(job.fold), &plan.test_indices(job.fold))?;
    if let Some(p) = &job.perturbation {
        train = p.apply(&train, perturb_seed(job.seed, &data.name, job.fold, &job.key.perturbation))?;
    }
    let overrides = cfg.params_for(&job.method);
    *params = if cfg.tune.enabled && tune::search_space(&job.method).is_some() {
        let opts = SearchOptions { budget: cfg.tune.budget, patience: cfg.tune.patience, fixed: overrides };
        tune::random_search(&train, &job.method, &opts, rng::child(job.job_seed, "tune", 0), None)?.best_params
    } else {
        methods::resolve_params(&job.method, &overrides)?
    };
    let t0 = Instant::now();
    let model = methods::fit(&job.method, &train, params, job.job_seed)?;
    let fit_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let proba = model.predict_proba(test.features())?;
    let predict_ms = t1.elapsed().as_secs_f64() * 1e3;
    let metrics = metrics::evaluate(test.labels(), &proba)?;
    Ok(JobOutcome { metrics, params: params.clone(), timing: Timing { fit_ms, predict_ms } })
}

fn run_job(cfg: &BenchConfig, prepared: &[Prepared], seed_index: usize, job: &Job) -> BenchRecord {
    let prep = &prepared[job.dataset];
    let mut params = Params::new();
    let (ir, result) = match (&prep.data, &prep.plans[seed_index]) {
        (Ok(data), Ok(plan)) => (Some(data.imbalance_ratio), execute(cfg, data, plan, job, &mut params)),
        (Ok(data), Err(e)) => (Some(data.imbalance_ratio), Err(Error::invalid_dataset(e.clone()))),
        (Err(e), _) => (None, Err(Error::invalid_dataset(e.clone()))),
    };
    let mut payload = RecordPayload {
        dataset: job.key.dataset.clone(),
        method: job.method.clone(),
        fold: job.fold,
        seed: job.seed,
        perturbation: job.key.perturbation.clone(),
        job_seed: job.job_seed,
        status: Status::Ok,
        error: None,
        metrics: None,
        imbalance_ratio: ir,
        params,
    };
    match result {
        Ok(out) => {
            payload.metrics = Some(out.metrics);
            payload.params = out.params;
            BenchRecord { payload, timing: out.timing }
        }
        Err(e) => {
            log::warn!("job {} failed: {e}", job.key);
            payload.status = Status::Failed;
            payload.error = Some(e.to_string());
            BenchRecord { payload, timing: Timing::default() }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub total: usize,
    pub skipped: usize,
    pub executed: usize,
    /// Grid cells whose final record is a failure.
    pub failed: usize,
    pub records: Vec<BenchRecord>,
}

/// Runs every grid cell not already completed in `cfg.out`, then rewrites
/// the record file sorted.
pub fn run_benchmark(cfg: &BenchConfig, loader: &mut DataLoader, jobs: usize) -> Result<RunSummary> {
    cfg.validate()?;
    let grid = build_jobs(cfg)?;
    let mut store = RecordStore::open(&cfg.out)?;
    let pending: Vec<&Job> = grid.iter().filter(|j| !store.is_done(&j.key)).collect();
    let skipped = grid.len() - pending.len();
    log::info!("{} jobs, {} already complete", grid.len(), skipped);

    let needed: HashSet<usize> = pending.iter().map(|j| j.dataset).collect();
    let prepared: Vec<Prepared> = cfg
        .datasets
        .iter()
        .enumerate()
        .map(|(d, src)| {
            if !needed.contains(&d) {
                return Prepared { data: Err("not loaded".into()), plans: Vec::new() };
            }
            let data = loader.load(src).map_err(|e| format!("loading `{}`: {e}", src.display_name()));
            let plans = cfg
                .seeds
                .iter()
                .map(|&s| match &data {
                    Ok(d) => stratified_kfold(&d.labels.labels, cfg.folds, fold_seed(s, &d.name)).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                })
                .collect();
            Prepared { data, plans }
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<BenchRecord>();
    let executed = pending.len();
    let write_result = std::thread::scope(|scope| {
        let writer = scope.spawn(move || -> Result<()> {
            for (done, rec) in rx.into_iter().enumerate() {
                store.append(&rec)?;
                log::debug!("[{}/{}] {}", done + 1, executed, rec.key());
            }
            Ok(())
        });
        pool.install(|| {
            pending.par_iter().for_each_with(tx, |tx, job| {
                let si = cfg.seeds.iter().position(|&s| s == job.seed).expect("seed from config");
                let rec = run_job(cfg, &prepared, si, job);
                let _ = tx.send(rec);
            });
        });
        writer.join().expect("writer thread panicked")
    });
    write_result?;

    let store = RecordStore::open(&cfg.out)?;
    let records = store.finalize()?;
    let keys: HashSet<&RecordKey> = grid.iter().map(|j| &j.key).collect();
    let failed = records.iter().filter(|r| !r.is_ok() && keys.contains(&r.key())).count();
    Ok(RunSummary { total: grid.len(), skipped, executed, failed, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::BenchConfig;

    fn cfg(out: &Path, extra: &str) -> BenchConfig {
        let text = format!(
            "out = {:?}\nfolds = 3\nmethods = [\"base\", \"rus\"]\n{extra}\n[[datasets]]\nsynthetic = {{ n = 120, d = 3, ir = 3.0, seed = 4 }}\n",
            out.display().to_string()
        );
        BenchConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn grid_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path(), "");
        let s = run_benchmark(&c, &mut DataLoader::new(None), 2).unwrap();
        assert_eq!((s.total, s.executed, s.failed, s.records.len()), (6, 6, 0, 6));
        for r in &s.records {
            let m = r.payload.metrics.unwrap();
            assert!((0.0..=1.0).contains(&m.auprc));
        }
        let again = run_benchmark(&c, &mut DataLoader::new(None), 2).unwrap();
        assert_eq!((again.skipped, again.executed), (6, 0));
        let payloads = |v: &[BenchRecord]| v.iter().map(|r| r.payload.clone()).collect::<Vec<_>>();
        assert_eq!(payloads(&s.records), payloads(&again.records));
    }

    #[test]
    fn failures_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "out = {:?}\nmethods = [\"base\"]\nfolds = 2\n[[datasets]]\npath = \"does-not-exist.csv\"\n",
            dir.path().display().to_string()
        );
        let c = BenchConfig::from_toml(&text).unwrap();
        let s = run_benchmark(&c, &mut DataLoader::new(None), 1).unwrap();
        assert_eq!((s.total, s.failed), (2, 2));
        assert!(s.records[0].payload.error.as_ref().unwrap().contains("does-not-exist"));
    }

    #[test]
    fn seeds_are_distinct_per_component() {
        let a = job_seed(0, "d", "base", 0, "none");
        assert_ne!(a, job_seed(0, "d", "rus", 0, "none"));
        assert_ne!(a, job_seed(0, "d", "base", 1, "none"));
        assert_ne!(a, job_seed(1, "d", "base", 0, "none"));
        assert_ne!(a, job_seed(0, "d", "base", 0, "missing@0.1"));
    }
}
