//! OpenML dataset download with an on-disk cache.
//!
//! Cache layout, per dataset id:
//!
//! ```text
//! <cache_dir>/<id>/data.arff
//! <cache_dir>/<id>/meta.json    { id, name, default_target, sha256 }
//! <cache_dir>/names/<name>      the resolved id, as text
//! ```
//!
//! `IMBAL_CACHE_DIR` takes precedence over any configured cache directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::arff::parse_arff;
use super::table::RawTable;
use crate::error::{Error, Result};

pub const CACHE_ENV: &str = "IMBAL_CACHE_DIR";
pub const DEFAULT_BASE_URL: &str = "https://www.openml.org";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError {
    /// HTTP status when the server answered.
    pub status: Option<u16>,
    pub message: String,
}

/// Blocking GET. Implemented over HTTP for real use and by recorders in tests.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError>;
}

#[cfg(feature = "http")]
pub struct HttpTransport {
    agent: ureq::Agent,
}

#[cfg(feature = "http")]
impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport { agent: ureq::Agent::new_with_defaults() }
    }
}

#[cfg(feature = "http")]
impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError> {
        let mut resp = self.agent.get(url).call().map_err(|e| match e {
            ureq::Error::StatusCode(code) => {
                TransportError { status: Some(code), message: format!("HTTP {code}") }
            }
            other => TransportError { status: None, message: other.to_string() },
        })?;
        resp.body_mut()
            .with_config()
            .limit(2 << 30)
            .read_to_vec()
            .map_err(|e| TransportError { status: None, message: e.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheMeta {
    pub id: u64,
    pub name: String,
    pub default_target: Option<String>,
    pub sha256: String,
}

#[derive(Debug, Clone, Default)]
pub struct FetchOptions {
    /// Overrides the description's default target attribute.
    pub target: Option<String>,
}

#[derive(Deserialize)]
struct DescriptionEnvelope {
    data_set_description: Description,
}

#[derive(Deserialize)]
struct Description {
    #[serde(deserialize_with = "de_id")]
    id: u64,
    name: String,
    url: String,
    #[serde(default)]
    default_target_attribute: Option<String>,
}

#[derive(Deserialize)]
struct ListEnvelope {
    data: ListData,
}

#[derive(Deserialize)]
struct ListData {
    dataset: Vec<ListEntry>,
}

#[derive(Deserialize)]
struct ListEntry {
    #[serde(deserialize_with = "de_id")]
    did: u64,
}

// OpenML encodes ids as strings in some endpoints and numbers in others.
fn de_id<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        N(u64),
        S(String),
    }
    match Id::deserialize(d)? {
        Id::N(n) => Ok(n),
        Id::S(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn id_lock(id: u64) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<u64, Arc<Mutex<()>>>>> = OnceLock::new();
    let map = LOCKS.get_or_init(|| Mutex::new(HashMap::new()));
    map.lock().unwrap().entry(id).or_default().clone()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Cache directory: `IMBAL_CACHE_DIR` if set, else `configured`, else
/// `$HOME/.cache/imbalkit/openml`.
pub fn resolve_cache_dir(configured: Option<&Path>) -> PathBuf {
    if let Some(env) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(env);
    }
    if let Some(p) = configured {
        return p.to_path_buf();
    }
    let home = std::env::var_os("HOME").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    home.join(".cache").join("imbalkit").join("openml")
}

pub struct OpenMl {
    transport: Box<dyn Transport>,
    cache_dir: PathBuf,
    base_url: String,
}

impl OpenMl {
    pub fn new(transport: Box<dyn Transport>, cache_dir: impl Into<PathBuf>) -> Self {
        OpenMl { transport, cache_dir: cache_dir.into(), base_url: DEFAULT_BASE_URL.to_string() }
    }

    #[cfg(feature = "http")]
    pub fn with_http(cache_dir: impl Into<PathBuf>) -> Self {
        Self::new(Box::new(HttpTransport::default()), cache_dir)
    }

    pub fn with_base_url(mut self, url: impl Into<String>) -> Self {
        self.base_url = url.into().trim_end_matches('/').to_string();
        self
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    fn get(&self, url: &str, what: &str) -> Result<Vec<u8>> {
        self.transport.get(url).map_err(|e| match e.status {
            Some(404) | Some(412) => Error::UnknownDataset(what.to_string()),
            _ => Error::Http { url: url.to_string(), msg: e.message },
        })
    }

    /// Resolves a dataset name to its id via the data-list endpoint; cached.
    pub fn resolve_name(&self, name: &str) -> Result<u64> {
        let name_file = self.cache_dir.join("names").join(name);
        if let Ok(s) = fs::read_to_string(&name_file) {
            if let Ok(id) = s.trim().parse() {
                return Ok(id);
            }
        }
        let url = format!("{}/api/v1/json/data/list/data_name/{}/limit/1", self.base_url, name);
        let bytes = self.get(&url, name)?;
        let list: ListEnvelope = serde_json::from_slice(&bytes)?;
        let id = list
            .data
            .dataset
            .first()
            .map(|d| d.did)
            .ok_or_else(|| Error::UnknownDataset(name.to_string()))?;
        fs::create_dir_all(name_file.parent().unwrap())?;
        write_atomic(&name_file, id.to_string().as_bytes())?;
        Ok(id)
    }

    fn read_cache(&self, id: u64) -> Result<Option<(CacheMeta, Vec<u8>)>> {
        let dir = self.cache_dir.join(id.to_string());
        let meta_path = dir.join("meta.json");
        let data_path = dir.join("data.arff");
        if !meta_path.exists() || !data_path.exists() {
            return Ok(None);
        }
        let meta: CacheMeta = serde_json::from_slice(&fs::read(&meta_path)?)?;
        let bytes = fs::read(&data_path)?;
        if sha256_hex(&bytes) != meta.sha256 {
            return Err(Error::ChecksumMismatch { path: data_path });
        }
        Ok(Some((meta, bytes)))
    }

    /// Returns the cached ARFF bytes and metadata, downloading on a miss.
    pub fn fetch_raw(&self, id: u64) -> Result<(CacheMeta, Vec<u8>)> {
        let lock = id_lock(id);
        let _guard = lock.lock().unwrap();
        if let Some(hit) = self.read_cache(id)? {
            return Ok(hit);
        }
        let desc_url = format!("{}/api/v1/json/data/{}", self.base_url, id);
        let desc_bytes = self.get(&desc_url, &id.to_string())?;
        let desc: DescriptionEnvelope = serde_json::from_slice(&desc_bytes)?;
        let desc = desc.data_set_description;
        if desc.id != id {
            return Err(Error::Http {
                url: desc_url,
                msg: format!("description is for dataset {}, expected {id}", desc.id),
            });
        }
        let arff = self.get(&desc.url, &id.to_string())?;
        let meta = CacheMeta {
            id,
            name: desc.name,
            default_target: desc.default_target_attribute.filter(|s| !s.trim().is_empty()),
            sha256: sha256_hex(&arff),
        };
        let dir = self.cache_dir.join(id.to_string());
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join("data.arff"), &arff)?;
        write_atomic(&dir.join("meta.json"), &serde_json::to_vec_pretty(&meta)?)?;
        Ok((meta, arff))
    }

    /// Parsed table with the target set to the override or the description's
    /// default target attribute.
    pub fn fetch(&self, id: u64, opts: &FetchOptions) -> Result<RawTable> {
        let (meta, bytes) = self.fetch_raw(id)?;
        let target = match (&opts.target, &meta.default_target) {
            (Some(t), _) => t.clone(),
            // OpenML allows comma-separated multi-targets; the first is used.
            (None, Some(t)) => t.split(',').next().unwrap().trim().to_string(),
            (None, None) => return Err(Error::NoDefaultTarget(id)),
        };
        let (_, mut table) = parse_arff(&bytes)?;
        let t = table
            .column_index(&target)
            .ok_or_else(|| Error::Schema(format!("dataset {id} has no column `{target}`")))?;
        table = table.with_target(t)?;
        table.relation = meta.name;
        Ok(table)
    }

    pub fn fetch_by_name(&self, name: &str, opts: &FetchOptions) -> Result<RawTable> {
        let id = self.resolve_name(name)?;
        self.fetch(id, opts)
    }
}

/// Dataset names of the 73-dataset reference collection, in increasing
/// imbalance ratio. Ids are resolved by name at fetch time.
pub const REFERENCE_DATASETS: &[&str] = &[
    "bwin_amlb",
    "mozilla4",
    "mc2",
    "vertebra-column",
    "wholesale-customers",
    "law-school-admission-bianry",
    "bank32nh",
    "elevators",
    "cpu_small",
    "Credit_Approval_Classification",
    "house_8L",
    "house_16H",
    "phoneme",
    "ilpd-numeric",
    "planning-relax",
    "MiniBooNE",
    "machine_cpu",
    "telco-customer-churn",
    "haberman",
    "vehicle",
    "cpu",
    "ada",
    "adult",
    "blood-transfusion-service-center",
    "default-of-credit-card-clients",
    "Customer_Churn_Classification",
    "SPECTF",
    "Medical-Appointment-No-Shows",
    "JapaneseVowels",
    "ibm-employee-attrition",
    "first-order-theorem-proving",
    "user-knowledge",
    "online-shoppers-intention",
    "kc1",
    "thoracic-surgery",
    "UCI_churn",
    "arsenic-female-bladder",
    "okcupid_stem",
    "ecoli",
    "pc4",
    "bank-marketing",
    "Diabetes-130-Hospitals_(Fairlearn)",
    "Otto-Group-Product-Classification-Challenge",
    "eucalyptus",
    "pendigits",
    "pc3",
    "page-blocks-bin",
    "optdigits",
    "mfeat-zernike",
    "mfeat-fourier",
    "mfeat-karhunen",
    "Pulsar-Dataset-HTRU2",
    "vowel",
    "heart-h",
    "pc1",
    "seismic-bumps",
    "ozone-level-8hr",
    "microaggregation2",
    "Sick_numeric",
    "insurance_company",
    "wilt",
    "Click_prediction_small",
    "jannis",
    "letter",
    "walking-activity",
    "helena",
    "mammography",
    "dis",
    "Satellite",
    "Employee-Turnover-at-TECHCO",
    "page-blocks",
    "allbp",
    "CreditCardFraudDetection",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_collection_has_73_entries() {
        assert_eq!(REFERENCE_DATASETS.len(), 73);
        let mut names = REFERENCE_DATASETS.to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 73);
    }

    #[test]
    fn ids_accept_strings_and_numbers() {
        let a: ListEnvelope = serde_json::from_str(r#"{"data":{"dataset":[{"did":"310"}]}}"#).unwrap();
        let b: ListEnvelope = serde_json::from_str(r#"{"data":{"dataset":[{"did":310}]}}"#).unwrap();
        assert_eq!(a.data.dataset[0].did, 310);
        assert_eq!(b.data.dataset[0].did, 310);
    }
}
