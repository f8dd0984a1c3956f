//! Benchmark runner: configuration, job grid, record store and reports.

pub mod config;
pub mod records;
pub mod report;
pub mod runner;

pub use config::{BenchConfig, DatasetSource, PerturbGrid, TuneConfig};
pub use records::{read_records, BenchRecord, RecordKey, RecordPayload, RecordStore, Status, Timing};
pub use report::{build_report, perturbation_table, write_perturbation_table, Report};
pub use runner::{build_jobs, run_benchmark, DataLoader, Job, LoadedData, RunSummary};
