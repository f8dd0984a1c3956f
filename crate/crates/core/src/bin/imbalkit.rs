use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use imbalkit::bench::{self, BenchConfig, DataLoader};
use imbalkit::ingest::openml::{resolve_cache_dir, REFERENCE_DATASETS};
use imbalkit::ingest::{FetchOptions, OpenMl};
use imbalkit::rng::{self, SeedPart};
use imbalkit::tune::{self, SearchOptions};
use imbalkit::Error;

/// Class-imbalanced learning benchmark runner.
#[derive(Parser)]
#[command(name = "imbalkit", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Benchmark configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Replaces the configured seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the config value, then the CPU count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Download OpenML datasets into the cache.
    Fetch {
        /// Dataset names or numeric ids. Defaults to the OpenML sources in
        /// --config.
        names: Vec<String>,
        /// Fetch the full reference collection.
        #[arg(long)]
        reference: bool,
        #[arg(long, value_name = "DIR")]
        cache_dir: Option<PathBuf>,
    },
    /// Run the benchmark grid and write records.
    Run,
    /// Random hyperparameter search per dataset and tunable method.
    Tune,
    /// Run the grid including the configured perturbations and write the
    /// perturbation table.
    PerturbSweep,
    /// Aggregate records into CSV and Markdown tables.
    Report {
        /// Records file or the directory holding records.jsonl.
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Group datasets by imbalance ratio.
        #[arg(long)]
        group_ir: bool,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownMethod(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(g: &Global) -> Result<(BenchConfig, PathBuf), Failure> {
    let path = g.config.as_ref().ok_or_else(|| Failure::Config("--config FILE is required".into()))?;
    let mut cfg = BenchConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &g.out {
        cfg.out = out.clone();
    }
    if g.jobs == Some(0) {
        return Err(Failure::Config("--jobs must be >= 1".into()));
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn threads(g: &Global, cfg: &BenchConfig) -> usize {
    g.jobs.or(cfg.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run(g: &Global, sweep: bool) -> Result<bool, Failure> {
    let (cfg, base) = load_config(g)?;
    if sweep && cfg.perturb.is_empty() {
        return Err(Failure::Config("perturb-sweep needs at least one [[perturb]] entry".into()));
    }
    let mut loader = DataLoader::new(cfg.cache_dir.as_deref()).with_base_dir(&base);
    let summary = bench::run_benchmark(&cfg, &mut loader, threads(g, &cfg))?;
    println!(
        "{} jobs: {} run, {} already complete, {} failed; records in {}",
        summary.total,
        summary.executed,
        summary.skipped,
        summary.failed,
        cfg.out.join(bench::records::RECORDS_FILE).display()
    );
    if sweep {
        let rows = bench::perturbation_table(&summary.records)?;
        bench::write_perturbation_table(&rows, &cfg.out)?;
        println!("perturbation table in {}", cfg.out.join("perturbation.md").display());
    }
    Ok(summary.failed == 0)
}

fn fetch(g: &Global, names: &[String], reference: bool, cache_dir: Option<&Path>) -> Result<bool, Failure> {
    let mut targets: Vec<(String, Option<String>)> = names.iter().map(|n| (n.clone(), None)).collect();
    let mut configured_cache = cache_dir.map(Path::to_path_buf);
    if reference {
        targets.extend(REFERENCE_DATASETS.iter().map(|n| (n.to_string(), None)));
    }
    if targets.is_empty() {
        let (cfg, _) = load_config(g)?;
        configured_cache = configured_cache.or(cfg.cache_dir.clone());
        for d in &cfg.datasets {
            if let Some(n) = &d.openml {
                targets.push((n.clone(), d.target.clone()));
            } else if let Some(id) = d.openml_id {
                targets.push((id.to_string(), d.target.clone()));
            }
        }
        if targets.is_empty() {
            return Err(Failure::Config("nothing to fetch: no names given and no OpenML sources in the config".into()));
        }
    }
    #[cfg(feature = "http")]
    {
        let client = OpenMl::with_http(resolve_cache_dir(configured_cache.as_deref()));
        let mut ok = true;
        for (name, target) in targets {
            let opts = FetchOptions { target };
            let res = match name.parse::<u64>() {
                Ok(id) => client.fetch(id, &opts),
                Err(_) => client.fetch_by_name(&name, &opts),
            };
            match res {
                Ok(t) => println!("{name}: {} rows, {} columns", t.n_rows(), t.n_columns()),
                Err(e) => {
                    ok = false;
                    eprintln!("{name}: {e}");
                }
            }
        }
        println!("cache: {}", client.cache_dir().display());
        Ok(ok)
    }
    #[cfg(not(feature = "http"))]
    {
        let _ = (targets, configured_cache, resolve_cache_dir, FetchOptions::default);
        Err(Failure::Runtime("built without the `http` feature".into()))
    }
}

fn tune_cmd(g: &Global) -> Result<bool, Failure> {
    let (cfg, base) = load_config(g)?;
    let tunable: Vec<&String> = cfg.methods.iter().filter(|m| tune::search_space(m).is_some()).collect();
    if tunable.is_empty() {
        return Err(Failure::Config("none of the configured methods is tunable".into()));
    }
    let dir = cfg.out.join("tune");
    fs::create_dir_all(&dir).map_err(Error::from)?;
    let mut loader = DataLoader::new(cfg.cache_dir.as_deref()).with_base_dir(&base);
    let mut summary = BufWriter::new(File::create(dir.join("summary.jsonl")).map_err(Error::from)?);
    let mut ok = true;
    for src in &cfg.datasets {
        let name = src.display_name();
        let data = match loader.load(src).and_then(|d| d.full()) {
            Ok(d) => d,
            Err(e) => {
                eprintln!("{name}: {e}");
                ok = false;
                continue;
            }
        };
        for method in &tunable {
            for &seed in &cfg.seeds {
                let opts = SearchOptions {
                    budget: cfg.tune.budget,
                    patience: cfg.tune.patience,
                    fixed: cfg.params_for(method),
                };
                let s = rng::derive(seed, &[SeedPart::Str("tune"), SeedPart::Str(&name), SeedPart::Str(method)]);
                let log_path = dir.join(format!("{name}__{method}__s{seed}.jsonl"));
                let mut log = BufWriter::new(File::create(&log_path).map_err(Error::from)?);
                match tune::random_search(&data, method, &opts, s, Some(&mut log)) {
                    Ok(res) => {
                        println!(
                            "{name} {method} seed {seed}: best {:.4} (default {}) after {} trials",
                            res.best_score,
                            res.default_score.map_or("failed".to_string(), |d| format!("{d:.4}")),
                            res.trials.len()
                        );
                        let line = serde_json::json!({
                            "dataset": name, "method": method, "seed": seed,
                            "best_params": res.best_params, "best_score": res.best_score,
                            "default_score": res.default_score, "trials": res.trials.len(),
                        });
                        serde_json::to_writer(&mut summary, &line).map_err(Error::from)?;
                        std::io::Write::write_all(&mut summary, b"\n").map_err(Error::from)?;
                    }
                    Err(e) => {
                        eprintln!("{name} {method} seed {seed}: {e}");
                        ok = false;
                    }
                }
            }
        }
    }
    std::io::Write::flush(&mut summary).map_err(Error::from)?;
    Ok(ok)
}

fn report(g: &Global, input: &Path, group_ir: bool) -> Result<bool, Failure> {
    let records = bench::read_records(input)?;
    let out = g.out.clone().unwrap_or_else(|| {
        if input.is_dir() {
            input.to_path_buf()
        } else {
            input.parent().map(Path::to_path_buf).unwrap_or_default()
        }
    });
    let rep = bench::build_report(&records, group_ir)?;
    rep.write(&out)?;
    if records.iter().any(|r| r.payload.perturbation != "none") {
        bench::write_perturbation_table(&bench::perturbation_table(&records)?, &out)?;
    }
    println!("{}", rep.to_markdown());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Fetch { names, reference, cache_dir } => fetch(&cli.global, names, *reference, cache_dir.as_deref()),
        Command::Run => run(&cli.global, false),
        Command::Tune => tune_cmd(&cli.global),
        Command::PerturbSweep => run(&cli.global, true),
        Command::Report { input, group_ir } => report(&cli.global, input, *group_ir),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
