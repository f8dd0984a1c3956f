#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use imbalkit::ingest::{Cell, Column, ColumnType, RawTable, Transport, TransportError};

const PIECES: &[&str] = &["a", "x1", "with space", "it's", "comma,sep", "50%", "{brace}", "tab\there", "back\\slash", "é", "Q"];

fn token(r: &mut ChaCha8Rng) -> String {
    let n = r.gen_range(1..=3);
    (0..n).map(|_| *PIECES.choose(r).unwrap()).collect::<Vec<_>>().join("_")
}

fn distinct(r: &mut ChaCha8Rng, k: usize, prefix: &str) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}{}", token(r))).collect()
}

fn number(r: &mut ChaCha8Rng) -> f64 {
    match r.gen_range(0..4) {
        0 => r.gen_range(-5i64..5) as f64,
        1 => r.gen::<f64>() * 1e6 - 5e5,
        2 => r.gen::<f64>() * 1e-7,
        _ => r.gen_range(-1e300..1e300),
    }
}

/// Random ARFF-able table with awkward names and missing cells.
pub fn generate(seed: u64) -> RawTable {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let m = r.gen_range(1..7);
    let names = distinct(&mut r, m + 1, "c");
    let mut columns: Vec<Column> = (0..m)
        .map(|j| {
            let kind = if r.gen_bool(0.5) {
                ColumnType::Numeric
            } else {
                let k = r.gen_range(1..5);
                ColumnType::Nominal(distinct(&mut r, k, "v"))
            };
            Column { name: names[j].clone(), kind }
        })
        .collect();
    columns.push(Column { name: names[m].clone(), kind: ColumnType::Nominal(distinct(&mut r, 3, "k")) });
    let n = r.gen_range(0..30);
    let rows = (0..n)
        .map(|_| {
            columns
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if j < m && r.gen_bool(0.1) {
                        return Cell::Missing;
                    }
                    match &c.kind {
                        ColumnType::Numeric => Cell::Number(number(&mut r)),
                        ColumnType::Nominal(cats) => Cell::Nominal(r.gen_range(0..cats.len())),
                    }
                })
                .collect()
        })
        .collect();
    RawTable::new(format!("rel {}", token(&mut r)), columns, rows, m).unwrap()
}

/// Transport answering from the recorded OpenML fixtures and counting calls.
pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/openml")
}

pub struct Replay {
    responses: BTreeMap<String, Vec<u8>>,
    calls: Arc<AtomicUsize>,
}

impl Replay {
    pub fn new() -> (Self, Arc<AtomicUsize>) {
        let dir = fixture_dir();
        let manifest: BTreeMap<String, String> =
            serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
        let responses = manifest.into_iter().map(|(url, file)| (url, std::fs::read(dir.join(file)).unwrap())).collect();
        let calls = Arc::new(AtomicUsize::new(0));
        (Replay { responses, calls: calls.clone() }, calls)
    }
}

impl Transport for Replay {
    fn get(&self, url: &str) -> Result<Vec<u8>, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.responses
            .get(url)
            .cloned()
            .ok_or(TransportError { status: Some(404), message: format!("no recording for {url}") })
    }
}

