use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::{self, Params};
use crate::perturb::{PerturbKind, PerturbationSpec};
use crate::synthetic::GaussianSpec;

/// Declarative benchmark configuration, read from TOML.
///
/// ```toml
/// out = "results"
/// folds = 5
/// seeds = [0, 1, 2]
/// jobs = 4
/// methods = ["base", "rus", "spe"]
///
/// [method_params.spe]
/// n_estimators = 20
///
/// [[datasets]]
/// path = "data/ecoli.arff"
///
/// [[datasets]]
/// openml = "abalone_19"
///
/// [[datasets]]
/// name = "gauss"
/// synthetic = { n = 2000, d = 10, ir = 20.0, seed = 1 }
///
/// [[perturb]]
/// kind = "label_noise"
/// levels = [0.1, 0.2]
///
/// [tune]
/// enabled = true
/// budget = 20
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    pub methods: Vec<String>,
    #[serde(default)]
    pub method_params: BTreeMap<String, Params>,
    pub datasets: Vec<DatasetSource>,
    #[serde(default)]
    pub perturb: Vec<PerturbGrid>,
    #[serde(default)]
    pub tune: TuneConfig,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

fn default_out() -> PathBuf {
    PathBuf::from("bench-out")
}

fn default_folds() -> usize {
    5
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Exactly one of `path`, `openml`, `openml_id` or `synthetic`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub openml: Option<String>,
    #[serde(default)]
    pub openml_id: Option<u64>,
    #[serde(default)]
    pub synthetic: Option<GaussianSpec>,
    /// Target column name; defaults to the last column for files and to the
    /// server default for OpenML.
    #[serde(default)]
    pub target: Option<String>,
}

impl DatasetSource {
    pub fn display_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        if let Some(p) = &self.path {
            return p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
        }
        if let Some(n) = &self.openml {
            return n.clone();
        }
        if let Some(id) = self.openml_id {
            return format!("openml-{id}");
        }
        self.synthetic.as_ref().map_or_else(String::new, GaussianSpec::name)
    }

    fn validate(&self, i: usize) -> Result<()> {
        let given = [self.path.is_some(), self.openml.is_some(), self.openml_id.is_some(), self.synthetic.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given != 1 {
            return Err(Error::Config(format!(
                "datasets[{i}]: expected exactly one of `path`, `openml`, `openml_id`, `synthetic`; found {given}"
            )));
        }
        if self.synthetic.is_some() && self.target.is_some() {
            return Err(Error::Config(format!("datasets[{i}]: `target` does not apply to synthetic data")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbGrid {
    pub kind: PerturbKind,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
}

fn default_budget() -> usize {
    100
}

fn default_patience() -> usize {
    10
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig { enabled: false, budget: default_budget(), patience: default_patience() }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("folds: must be >= 2, got {}", self.folds)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds: at least one seed is required".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs: must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods: at least one method is required".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !methods::is_method(m) {
                return Err(Error::Config(format!("methods: unknown method `{m}`")));
            }
            if !seen.insert(m) {
                return Err(Error::Config(format!("methods: `{m}` listed twice")));
            }
        }
        for (tag, params) in &self.method_params {
            if !methods::is_method(tag) {
                return Err(Error::Config(format!("method_params: unknown method `{tag}`")));
            }
            methods::resolve_params(tag, params).map_err(|e| Error::Config(format!("method_params.{tag}: {e}")))?;
        }
        if self.datasets.is_empty() {
            return Err(Error::Config("datasets: at least one dataset is required".into()));
        }
        let mut names = BTreeSet::new();
        for (i, d) in self.datasets.iter().enumerate() {
            d.validate(i)?;
            let name = d.display_name();
            if !names.insert(name.clone()) {
                return Err(Error::Config(format!("datasets[{i}]: duplicate dataset name `{name}`")));
            }
        }
        for (i, g) in self.perturb.iter().enumerate() {
            if g.levels.is_empty() {
                return Err(Error::Config(format!("perturb[{i}]: `levels` is empty")));
            }
            for &level in &g.levels {
                PerturbationSpec { kind: g.kind, level }
                    .validate()
                    .map_err(|e| Error::Config(format!("perturb[{i}]: {e}")))?;
            }
        }
        if self.tune.enabled && self.tune.budget == 0 {
            return Err(Error::Config("tune.budget: must be >= 1".into()));
        }
        Ok(())
    }

    /// The unperturbed setting followed by every configured level, in
    /// config order.
    pub fn perturbations(&self) -> Vec<Option<PerturbationSpec>> {
        let mut out = vec![None];
        for g in &self.perturb {
            for &level in &g.levels {
                let spec = PerturbationSpec { kind: g.kind, level };
                if !out.contains(&Some(spec)) {
                    out.push(Some(spec));
                }
            }
        }
        out
    }

    pub fn params_for(&self, tag: &str) -> Params {
        self.method_params.get(tag).cloned().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
methods = ["base", "rus"]
[[datasets]]
synthetic = { n = 200, d = 3, ir = 4.0 }
"#;

    #[test]
    fn defaults() {
        let c = BenchConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.folds, 5);
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(c.perturbations(), vec![None]);
        assert_eq!(c.datasets[0].display_name(), "gauss-n200-d3-ir4-s0");
        assert!(!c.tune.enabled);
    }

    #[test]
    fn errors_name_the_field() {
        let e = BenchConfig::from_toml("methods = [\"base\"]\nfoldz = 3\n[[datasets]]\npath = \"a.csv\"\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("foldz") && msg.contains("line 2"), "{msg}");
        let e = BenchConfig::from_toml(&format!("{MINIMAL}\nfolds = 1\n")).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let e = BenchConfig::from_toml("methods = [\"nope\"]\n[[datasets]]\npath = \"a.csv\"\n").unwrap_err();
        assert!(e.to_string().contains("nope"));
        let e = BenchConfig::from_toml("methods = [\"base\"]\n[[datasets]]\npath = \"a.csv\"\nopenml = \"x\"\n")
            .unwrap_err();
        assert!(e.to_string().contains("exactly one"));
        let bad_param = format!("{MINIMAL}\n[method_params.rus]\nk_neighbors = 3\n");
        assert!(BenchConfig::from_toml(&bad_param).is_err());
    }

    #[test]
    fn perturb_grid() {
        let text = format!("{MINIMAL}\n[[perturb]]\nkind = \"label_noise\"\nlevels = [0.1, 0.2]\n[[perturb]]\nkind = \"imbalance\"\nlevels = [200.0]\n");
        let c = BenchConfig::from_toml(&text).unwrap();
        let keys: Vec<String> = c.perturbations().iter().map(|p| p.map_or("none".into(), |s| s.key())).collect();
        assert_eq!(keys, ["none", "label_noise@0.1", "label_noise@0.2", "imbalance@200"]);
        let bad = format!("{MINIMAL}\n[[perturb]]\nkind = \"missing\"\nlevels = [1.5]\n");
        assert!(BenchConfig::from_toml(&bad).is_err());
    }
}
