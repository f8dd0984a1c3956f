//! Aggregate tables over benchmark records, written as CSV and Markdown.
//!
//! Scores are first averaged per (dataset, method) over seeds and folds.
//! Group tables then average those dataset scores; rank tables average the
//! per-dataset ranks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::records::BenchRecord;
use crate::error::{Error, Result};
use crate::methods::METHOD_TAGS;
use crate::metrics::{average_ranks, ir_group, win_ratio_matrix, Metric, MetricTriple, IR_GROUPS};

pub const ALL_GROUP: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTables {
    pub metric: Metric,
    /// `[method][group]`; `None` when the group has no scored dataset.
    pub scores: Vec<Vec<Option<f64>>>,
    pub ranks: Vec<Vec<Option<f64>>>,
    /// `[row][column]` over every dataset.
    pub win_ratio: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRow {
    pub method: String,
    pub auprc: Option<f64>,
    pub auprc_rank: Option<f64>,
    pub mean_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub methods: Vec<String>,
    pub groups: Vec<String>,
    pub group_sizes: Vec<usize>,
    pub n_ok: usize,
    pub n_failed: usize,
    pub tables: Vec<MetricTables>,
    pub runtime: Vec<RuntimeRow>,
}

fn method_order(names: impl IntoIterator<Item = String>) -> Vec<String> {
    let set: BTreeSet<String> = names.into_iter().collect();
    let mut out: Vec<String> = METHOD_TAGS.iter().filter(|t| set.contains(**t)).map(|t| t.to_string()).collect();
    out.extend(set.into_iter().filter(|m| !METHOD_TAGS.contains(&m.as_str())));
    out
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Mean metrics per (dataset, method) over the successful records of one
/// perturbation setting, plus each dataset's imbalance ratio.
struct DatasetScores {
    datasets: Vec<(String, f64)>,
    /// `[dataset][method]`
    scores: Vec<Vec<Option<MetricTriple>>>,
}

fn dataset_scores(records: &[&BenchRecord], methods: &[String]) -> DatasetScores {
    let mut acc: BTreeMap<(&str, &str), Vec<MetricTriple>> = BTreeMap::new();
    let mut irs: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records {
        let p = &r.payload;
        if let (Some(m), true) = (p.metrics, r.is_ok()) {
            acc.entry((p.dataset.as_str(), p.method.as_str())).or_default().push(m);
            if let Some(ir) = p.imbalance_ratio {
                irs.insert(p.dataset.as_str(), ir);
            }
        }
    }
    let datasets: Vec<(String, f64)> = irs.iter().map(|(d, ir)| (d.to_string(), *ir)).collect();
    let scores = datasets
        .iter()
        .map(|(d, _)| {
            methods
                .iter()
                .map(|m| {
                    acc.get(&(d.as_str(), m.as_str())).map(|v| MetricTriple {
                        auprc: mean(v.iter().map(|t| t.auprc)).unwrap_or(f64::NAN),
                        macro_f1: mean(v.iter().map(|t| t.macro_f1)).unwrap_or(f64::NAN),
                        balanced_accuracy: mean(v.iter().map(|t| t.balanced_accuracy)).unwrap_or(f64::NAN),
                    })
                })
                .collect()
        })
        .collect();
    DatasetScores { datasets, scores }
}

/// Builds the report from unperturbed records. With `group_by_ir` the
/// datasets fall into the four imbalance-ratio groups; otherwise into a
/// single `all` group.
pub fn build_report(records: &[BenchRecord], group_by_ir: bool) -> Result<Report> {
    let clean: Vec<&BenchRecord> = records.iter().filter(|r| r.payload.perturbation == "none").collect();
    let n_ok = clean.iter().filter(|r| r.is_ok()).count();
    let n_failed = clean.len() - n_ok;
    if n_ok == 0 {
        return Err(Error::invalid_param("no successful unperturbed records to report"));
    }
    let methods = method_order(clean.iter().filter(|r| r.is_ok()).map(|r| r.payload.method.clone()));
    let ds = dataset_scores(&clean, &methods);
    let groups: Vec<String> = if group_by_ir {
        IR_GROUPS.iter().map(|g| g.0.to_string()).collect()
    } else {
        vec![ALL_GROUP.to_string()]
    };
    let group_of = |ir: f64| if group_by_ir { ir_group(ir) } else { ALL_GROUP };
    let members: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| (0..ds.datasets.len()).filter(|&d| group_of(ds.datasets[d].1) == g).collect())
        .collect();
    let group_sizes = members.iter().map(Vec::len).collect();

    let score = |d: usize, m: usize, metric: Metric| ds.scores[d][m].map_or(f64::NAN, |t| t.get(metric));
    let per_dataset_ranks = |metric: Metric| -> Vec<Vec<f64>> {
        (0..ds.datasets.len())
            .map(|d| average_ranks(&(0..methods.len()).map(|m| score(d, m, metric)).collect::<Vec<_>>()))
            .collect()
    };

    let mut tables = Vec::new();
    for metric in Metric::ALL {
        let ranks = per_dataset_ranks(metric);
        let mut scores_t = vec![vec![None; groups.len()]; methods.len()];
        let mut ranks_t = vec![vec![None; groups.len()]; methods.len()];
        for m in 0..methods.len() {
            for (g, idx) in members.iter().enumerate() {
                scores_t[m][g] = mean(idx.iter().map(|&d| score(d, m, metric)).filter(|v| !v.is_nan()));
                ranks_t[m][g] = mean(idx.iter().map(|&d| ranks[d][m]));
            }
        }
        let by_method: Vec<Vec<f64>> =
            (0..methods.len()).map(|m| (0..ds.datasets.len()).map(|d| score(d, m, metric)).collect()).collect();
        tables.push(MetricTables { metric, scores: scores_t, ranks: ranks_t, win_ratio: win_ratio_matrix(&by_method)? });
    }

    let auprc_ranks = per_dataset_ranks(Metric::Auprc);
    let runtime = methods
        .iter()
        .enumerate()
        .map(|(m, name)| RuntimeRow {
            method: name.clone(),
            auprc: mean((0..ds.datasets.len()).map(|d| score(d, m, Metric::Auprc)).filter(|v| !v.is_nan())),
            auprc_rank: mean(auprc_ranks.iter().map(|r| r[m])),
            mean_ms: mean(
                clean.iter().filter(|r| r.is_ok() && &r.payload.method == name).map(|r| r.timing.total_ms()),
            ),
        })
        .collect();

    Ok(Report { methods, groups, group_sizes, n_ok, n_failed, tables, runtime })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

fn md_table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let align: Vec<&str> = header.iter().enumerate().map(|(i, _)| if i == 0 { "---" } else { "---:" }).collect();
    let _ = writeln!(out, "| {} |", align.join(" | "));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out.push('\n');
}

impl Report {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Benchmark report\n\n");
        let _ = writeln!(out, "Successful records: {}. Failed records: {}.\n", self.n_ok, self.n_failed);
        let sizes: Vec<String> =
            self.groups.iter().zip(&self.group_sizes).map(|(g, n)| format!("{g}: {n}")).collect();
        let _ = writeln!(out, "Datasets per imbalance-ratio group: {}.\n", sizes.join(", "));
        let mut header = vec!["method".to_string()];
        header.extend(self.groups.iter().cloned());
        for t in &self.tables {
            let name = t.metric.name();
            let _ = writeln!(out, "## Mean score ({name})\n");
            let rows: Vec<Vec<String>> = self
                .methods
                .iter()
                .enumerate()
                .map(|(m, method)| {
                    std::iter::once(method.clone()).chain(t.scores[m].iter().map(|v| fmt_opt(*v, 4))).collect()
                })
                .collect();
            md_table(&mut out, &header, &rows);
            let _ = writeln!(out, "## Mean rank ({name})\n");
            let rows: Vec<Vec<String>> = self
                .methods
                .iter()
                .enumerate()
                .map(|(m, method)| {
                    std::iter::once(method.clone()).chain(t.ranks[m].iter().map(|v| fmt_opt(*v, 2))).collect()
                })
                .collect();
            md_table(&mut out, &header, &rows);
        }
        for t in &self.tables {
            let _ = writeln!(out, "## Win ratio ({})\n", t.metric.name());
            out.push_str("Fraction of datasets on which the row method scores strictly higher than the column method.\n\n");
            let mut h = vec!["method".to_string()];
            h.extend(self.methods.iter().cloned());
            let rows: Vec<Vec<String>> = self
                .methods
                .iter()
                .enumerate()
                .map(|(r, method)| {
                    std::iter::once(method.clone())
                        .chain((0..self.methods.len()).map(|c| {
                            if r == c {
                                "-".to_string()
                            } else {
                                format!("{:.2}", t.win_ratio[r][c])
                            }
                        }))
                        .collect()
                })
                .collect();
            md_table(&mut out, &h, &rows);
        }
        out.push_str("## Score vs runtime\n\n");
        out.push_str(
            "Time is the mean fit plus predict wall time per fold in milliseconds. It is machine-relative and only comparable within one report.\n\n",
        );
        let h: Vec<String> =
            ["method", "auprc", "mean rank (auprc)", "time ms (machine-relative)"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = self
            .runtime
            .iter()
            .map(|r| vec![r.method.clone(), fmt_opt(r.auprc, 4), fmt_opt(r.auprc_rank, 2), fmt_opt(r.mean_ms, 1)])
            .collect();
        md_table(&mut out, &h, &rows);
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    }

    /// Writes `report.md`, `scores.csv`, `ranks.csv`, `win_ratio.csv` and
    /// `runtime.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.md"), self.to_markdown())?;
        let mut scores = csv::Writer::from_path(dir.join("scores.csv")).map_err(csv_err)?;
        let mut ranks = csv::Writer::from_path(dir.join("ranks.csv")).map_err(csv_err)?;
        let mut wins = csv::Writer::from_path(dir.join("win_ratio.csv")).map_err(csv_err)?;
        scores.write_record(["metric", "group", "method", "score"]).map_err(csv_err)?;
        ranks.write_record(["metric", "group", "method", "mean_rank"]).map_err(csv_err)?;
        wins.write_record(["metric", "row", "column", "win_ratio"]).map_err(csv_err)?;
        for t in &self.tables {
            for (m, method) in self.methods.iter().enumerate() {
                for (g, group) in self.groups.iter().enumerate() {
                    scores
                        .write_record([t.metric.name(), group, method, &csv_opt(t.scores[m][g])])
                        .map_err(csv_err)?;
                    ranks.write_record([t.metric.name(), group, method, &csv_opt(t.ranks[m][g])]).map_err(csv_err)?;
                }
                for (c, col) in self.methods.iter().enumerate() {
                    if c != m {
                        wins.write_record([t.metric.name(), method, col, &t.win_ratio[m][c].to_string()])
                            .map_err(csv_err)?;
                    }
                }
            }
        }
        let mut rt = csv::Writer::from_path(dir.join("runtime.csv")).map_err(csv_err)?;
        rt.write_record(["method", "auprc", "mean_rank_auprc", "time_ms_machine_relative"]).map_err(csv_err)?;
        for r in &self.runtime {
            rt.write_record([&r.method, &csv_opt(r.auprc), &csv_opt(r.auprc_rank), &csv_opt(r.mean_ms)])
                .map_err(csv_err)?;
        }
        for w in [&mut scores, &mut ranks, &mut wins, &mut rt] {
            w.flush()?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbRow {
    pub perturbation: String,
    pub method: String,
    pub n_datasets: usize,
    pub mean: MetricTriple,
}

fn perturbation_order(key: &str) -> (u8, String, f64) {
    match key.split_once('@') {
        Some((kind, level)) => (1, kind.to_string(), level.parse().unwrap_or(f64::NAN)),
        None => (0, String::new(), 0.0),
    }
}

/// Mean scores per (perturbation setting, method) over datasets. The
/// unperturbed setting comes first, then kinds alphabetically by level.
pub fn perturbation_table(records: &[BenchRecord]) -> Result<Vec<PerturbRow>> {
    let mut keys: Vec<String> = records
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| r.payload.perturbation.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if keys.is_empty() {
        return Err(Error::invalid_param("no successful records to report"));
    }
    keys.sort_by(|a, b| {
        let (x, y) = (perturbation_order(a), perturbation_order(b));
        x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2))
    });
    let methods = method_order(records.iter().filter(|r| r.is_ok()).map(|r| r.payload.method.clone()));
    let mut rows = Vec::new();
    for key in &keys {
        let subset: Vec<&BenchRecord> = records.iter().filter(|r| &r.payload.perturbation == key).collect();
        let ds = dataset_scores(&subset, &methods);
        for (m, method) in methods.iter().enumerate() {
            let vals: Vec<MetricTriple> = ds.scores.iter().filter_map(|row| row[m]).collect();
            if vals.is_empty() {
                continue;
            }
            rows.push(PerturbRow {
                perturbation: key.clone(),
                method: method.clone(),
                n_datasets: vals.len(),
                mean: MetricTriple {
                    auprc: mean(vals.iter().map(|t| t.auprc)).unwrap_or(f64::NAN),
                    macro_f1: mean(vals.iter().map(|t| t.macro_f1)).unwrap_or(f64::NAN),
                    balanced_accuracy: mean(vals.iter().map(|t| t.balanced_accuracy)).unwrap_or(f64::NAN),
                },
            });
        }
    }
    Ok(rows)
}

/// Writes `perturbation.md` and `perturbation.csv`.
pub fn write_perturbation_table(rows: &[PerturbRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut md = String::from("# Perturbation sweep\n\n");
    let header: Vec<String> = ["perturbation", "method", "datasets", "auprc", "macro_f1", "balanced_accuracy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.perturbation.clone(),
                r.method.clone(),
                r.n_datasets.to_string(),
                format!("{:.4}", r.mean.auprc),
                format!("{:.4}", r.mean.macro_f1),
                format!("{:.4}", r.mean.balanced_accuracy),
            ]
        })
        .collect();
    md_table(&mut md, &header, &body);
    md.truncate(md.trim_end().len());
    md.push('\n');
    fs::write(dir.join("perturbation.md"), md)?;
    let mut w = csv::Writer::from_path(dir.join("perturbation.csv")).map_err(csv_err)?;
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.perturbation.clone(),
            r.method.clone(),
            r.n_datasets.to_string(),
            r.mean.auprc.to_string(),
            r.mean.macro_f1.to_string(),
            r.mean.balanced_accuracy.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
