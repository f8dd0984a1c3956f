//! JSON-lines record store with resume support.
//!
//! `records.jsonl` holds one [`BenchRecord`] per line. While a run is in
//! progress lines are appended in completion order; when it finishes the
//! file is rewritten sorted by key and `records.index` lists every key with
//! the byte offset of its line.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::Params;
use crate::metrics::MetricTriple;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const INDEX_FILE: &str = "records.index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// Identifies one grid cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordKey {
    pub dataset: String,
    pub perturbation: String,
    pub method: String,
    pub seed: u64,
    pub fold: usize,
}

impl std::fmt::Display for RecordKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}/{}/{}", self.dataset, self.perturbation, self.method, self.seed, self.fold)
    }
}

/// Everything about a record that is a pure function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordPayload {
    pub dataset: String,
    pub method: String,
    pub fold: usize,
    pub seed: u64,
    /// `none` or a perturbation key such as `label_noise@0.1`.
    pub perturbation: String,
    pub job_seed: u64,
    pub status: Status,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub metrics: Option<MetricTriple>,
    /// Imbalance ratio of the full, unperturbed dataset.
    #[serde(default)]
    pub imbalance_ratio: Option<f64>,
    #[serde(default)]
    pub params: Params,
}

/// Wall-clock milliseconds; the only nondeterministic part of a record.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub fit_ms: f64,
    pub predict_ms: f64,
}

impl Timing {
    pub fn total_ms(&self) -> f64 {
        self.fit_ms + self.predict_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    #[serde(flatten)]
    pub payload: RecordPayload,
    pub timing: Timing,
}

impl BenchRecord {
    pub fn key(&self) -> RecordKey {
        let p = &self.payload;
        RecordKey {
            dataset: p.dataset.clone(),
            perturbation: p.perturbation.clone(),
            method: p.method.clone(),
            seed: p.seed,
            fold: p.fold,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.payload.status == Status::Ok
    }

    pub fn to_line(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn parse_lines(text: &str, path: &Path) -> Result<Vec<BenchRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("{}: {e}", path.display()),
            })
        })
        .collect()
}

/// Reads records from a `records.jsonl` file, or from the one inside a
/// directory.
pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>> {
    let file = if path.is_dir() { path.join(RECORDS_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file)?;
    parse_lines(&text, &file)
}

/// Last record per key wins, except that a failure never replaces a
/// success.
pub fn latest_by_key(records: Vec<BenchRecord>) -> BTreeMap<RecordKey, BenchRecord> {
    let mut out: BTreeMap<RecordKey, BenchRecord> = BTreeMap::new();
    for r in records {
        let key = r.key();
        match out.get(&key) {
            Some(prev) if prev.is_ok() && !r.is_ok() => {}
            _ => {
                out.insert(key, r);
            }
        }
    }
    out
}

/// Append handle over the records file of an output directory.
pub struct RecordStore {
    dir: PathBuf,
    existing: BTreeMap<RecordKey, BenchRecord>,
    file: Option<BufWriter<File>>,
}

impl RecordStore {
    /// Opens (or creates) the store. A trailing partial line left by an
    /// interrupted run is cut off.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(RECORDS_FILE);
        let mut existing = BTreeMap::new();
        if path.exists() {
            let bytes = fs::read(&path)?;
            let complete = match bytes.iter().rposition(|&b| b == b'\n') {
                Some(p) => p + 1,
                None => 0,
            };
            if complete < bytes.len() {
                log::warn!("{}: dropping {} bytes of a partial record", path.display(), bytes.len() - complete);
                let f = OpenOptions::new().write(true).open(&path)?;
                f.set_len(complete as u64)?;
            }
            let text = std::str::from_utf8(&bytes[..complete])
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            existing = latest_by_key(parse_lines(text, &path)?);
        }
        Ok(RecordStore { dir: dir.to_path_buf(), existing, file: None })
    }

    pub fn path(&self) -> PathBuf {
        self.dir.join(RECORDS_FILE)
    }

    /// Whether a successful record for `key` is already stored.
    pub fn is_done(&self, key: &RecordKey) -> bool {
        self.existing.get(key).is_some_and(BenchRecord::is_ok)
    }

    pub fn n_existing(&self) -> usize {
        self.existing.len()
    }

    /// Appends one record as a single write and flushes it.
    pub fn append(&mut self, record: &BenchRecord) -> Result<()> {
        if self.file.is_none() {
            let f = OpenOptions::new().create(true).append(true).open(self.path())?;
            self.file = Some(BufWriter::new(f));
        }
        let w = self.file.as_mut().expect("opened above");
        w.write_all(record.to_line()?.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Rewrites the records file sorted by key, one record per key, and
    /// writes the index. Returns the final records.
    pub fn finalize(mut self) -> Result<Vec<BenchRecord>> {
        if let Some(mut w) = self.file.take() {
            w.flush()?;
        }
        let path = self.path();
        let all = if path.exists() { read_records(&path)? } else { Vec::new() };
        let records: Vec<BenchRecord> = latest_by_key(all).into_values().collect();
        write_sorted(&self.dir, &records)?;
        Ok(records)
    }
}

/// Writes `records` (already unique and sorted) plus the index, replacing
/// both files atomically.
pub fn write_sorted(dir: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut body = String::new();
    let mut index = String::new();
    for r in records {
        index.push_str(&format!("{}\t{}\n", r.key(), body.len()));
        body.push_str(&r.to_line()?);
    }
    replace_file(&dir.join(RECORDS_FILE), body.as_bytes())?;
    replace_file(&dir.join(INDEX_FILE), index.as_bytes())
}

fn replace_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, fold: usize, status: Status) -> BenchRecord {
        BenchRecord {
            payload: RecordPayload {
                dataset: "d".into(),
                method: method.into(),
                fold,
                seed: 0,
                perturbation: "none".into(),
                job_seed: 1,
                status,
                error: None,
                metrics: None,
                imbalance_ratio: Some(2.0),
                params: Params::new(),
            },
            timing: Timing::default(),
        }
    }

    #[test]
    fn partial_line_is_truncated_and_failures_retried() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = RecordStore::open(dir.path()).unwrap();
        s.append(&rec("base", 0, Status::Ok)).unwrap();
        s.append(&rec("base", 1, Status::Failed)).unwrap();
        drop(s);
        let path = dir.path().join(RECORDS_FILE);
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{\"dataset\":\"d\",\"meth");
        fs::write(&path, text).unwrap();

        let mut s = RecordStore::open(dir.path()).unwrap();
        assert!(s.is_done(&rec("base", 0, Status::Ok).key()));
        assert!(!s.is_done(&rec("base", 1, Status::Ok).key()));
        s.append(&rec("base", 1, Status::Ok)).unwrap();
        s.append(&rec("base", 0, Status::Failed)).unwrap();
        let out = s.finalize().unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(BenchRecord::is_ok));
        let index = fs::read_to_string(dir.path().join(INDEX_FILE)).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        for line in index.lines() {
            let off: usize = line.split('\t').nth(1).unwrap().parse().unwrap();
            assert!(body[off..].starts_with("{\"dataset\":\"d\""));
        }
    }
}
