//! Offline replay of recorded OpenML responses.

mod common;

use std::path::PathBuf;
use std::sync::atomic::Ordering;

use imbalkit::bench::{run_benchmark, BenchConfig, DataLoader};
use imbalkit::ingest::openml::{resolve_cache_dir, CACHE_ENV};
use imbalkit::ingest::{Cell, FetchOptions, OpenMl};
use imbalkit::Error;

use common::Replay;

#[test]
fn second_fetch_performs_no_transport_calls() {
    let cache = tempfile::tempdir().unwrap();
    let (t, calls) = Replay::new();
    let client = OpenMl::new(Box::new(t), cache.path());
    let table = client.fetch_by_name("toy_blobs", &FetchOptions::default()).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 3);
    assert_eq!(table.n_rows(), 40);
    assert_eq!(table.relation, "toy_blobs");
    assert_eq!(table.columns[table.target].name, "class");
    assert!(matches!(table.rows[0][2], Cell::Nominal(0)));

    let again = client.fetch_by_name("toy_blobs", &FetchOptions::default()).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 3);
    assert_eq!(table, again);

    let (t2, calls2) = Replay::new();
    let fresh_client = OpenMl::new(Box::new(t2), cache.path());
    assert_eq!(fresh_client.fetch(61001, &FetchOptions::default()).unwrap(), table);
    assert_eq!(calls2.load(Ordering::SeqCst), 0);
    assert!(cache.path().join("61001/data.arff").exists());
    assert!(cache.path().join("61001/meta.json").exists());
}

#[test]
fn target_override_and_unknown_name() {
    let cache = tempfile::tempdir().unwrap();
    let (t, _) = Replay::new();
    let client = OpenMl::new(Box::new(t), cache.path());
    let table = client.fetch(61001, &FetchOptions { target: Some("level".into()) }).unwrap();
    assert_eq!(table.columns[table.target].name, "level");
    let err = client.fetch_by_name("missing_dataset", &FetchOptions::default()).unwrap_err();
    assert!(matches!(err, Error::UnknownDataset(_)), "{err}");
}

#[test]
fn corrupted_cache_is_detected() {
    let cache = tempfile::tempdir().unwrap();
    let (t, _) = Replay::new();
    let client = OpenMl::new(Box::new(t), cache.path());
    client.fetch(61001, &FetchOptions::default()).unwrap();
    let data = cache.path().join("61001/data.arff");
    let mut bytes = std::fs::read(&data).unwrap();
    bytes.extend_from_slice(b"9.9,1.0,'low',pos\n");
    std::fs::write(&data, bytes).unwrap();
    let err = client.fetch(61001, &FetchOptions::default()).unwrap_err();
    assert!(matches!(err, Error::ChecksumMismatch { .. }), "{err}");
}

#[test]
fn benchmark_over_replayed_source() {
    let cache = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let (t, calls) = Replay::new();
    let text = format!(
        "out = {:?}\nfolds = 2\nmethods = [\"base\", \"ros\"]\n[[datasets]]\nopenml = \"toy_blobs\"\n",
        out.path().display().to_string()
    );
    let cfg = BenchConfig::from_toml(&text).unwrap();
    let mut loader = DataLoader::new(None).with_openml(OpenMl::new(Box::new(t), cache.path()));
    let s = run_benchmark(&cfg, &mut loader, 1).unwrap();
    assert_eq!((s.total, s.failed), (4, 0));
    assert_eq!(calls.load(Ordering::SeqCst), 3);
    assert!(s.records.iter().all(|r| r.payload.dataset == "toy_blobs"));
}

#[test]
fn cache_dir_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(CACHE_ENV, dir.path());
    assert_eq!(resolve_cache_dir(Some(std::path::Path::new("/elsewhere"))), dir.path());
    std::env::remove_var(CACHE_ENV);
    assert_eq!(resolve_cache_dir(Some(std::path::Path::new("/elsewhere"))), PathBuf::from("/elsewhere"));
}
