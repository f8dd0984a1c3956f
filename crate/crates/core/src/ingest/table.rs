use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnType {
    Numeric,
    /// Declared category list; cells hold an index into it.
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnType,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Number(f64),
    Nominal(usize),
    Missing,
}

/// Parsed tabular file before any encoding. Missing cells stay `Missing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub relation: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub target: usize,
}

impl RawTable {
    pub fn new(
        relation: impl Into<String>,
        columns: Vec<Column>,
        rows: Vec<Vec<Cell>>,
        target: usize,
    ) -> Result<Self> {
        let t = RawTable { relation: relation.into(), columns, rows, target };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.columns.len();
        if m == 0 {
            return Err(Error::Schema("table has no columns".into()));
        }
        if self.target >= m {
            return Err(Error::Schema(format!("target index {} out of range", self.target)));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Parse {
                    line: r + 1,
                    msg: format!("row has {} cells, expected {m}", row.len()),
                });
            }
            for (cell, col) in row.iter().zip(&self.columns) {
                let ok = match (cell, &col.kind) {
                    (Cell::Missing, _) => true,
                    (Cell::Number(_), ColumnType::Numeric) => true,
                    (Cell::Nominal(i), ColumnType::Nominal(cats)) => *i < cats.len(),
                    _ => false,
                };
                if !ok {
                    return Err(Error::Schema(format!(
                        "row {} column `{}` holds a value of the wrong kind",
                        r + 1,
                        col.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn with_target(mut self, target: usize) -> Result<Self> {
        if target >= self.columns.len() {
            return Err(Error::Schema(format!("target index {target} out of range")));
        }
        self.target = target;
        Ok(self)
    }

    /// Indices of non-target columns, in file order.
    pub fn feature_columns(&self) -> Vec<usize> {
        (0..self.columns.len()).filter(|&j| j != self.target).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(|c| matches!(c, Cell::Missing))
    }

    /// Textual rendering of a cell, as it would appear in a data file.
    pub fn cell_text(&self, row: usize, col: usize) -> String {
        match (&self.rows[row][col], &self.columns[col].kind) {
            (Cell::Missing, _) => "?".into(),
            (Cell::Number(v), _) => format_number(*v),
            (Cell::Nominal(i), ColumnType::Nominal(cats)) => cats[*i].clone(),
            (Cell::Nominal(i), ColumnType::Numeric) => i.to_string(),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

/// Mapping from target values to contiguous class ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEncoding {
    pub class_names: Vec<String>,
    pub labels: Vec<usize>,
}

impl LabelEncoding {
    /// Classes are the target values that occur in the table: declared order
    /// for nominal targets, ascending value for numeric ones.
    pub fn fit(table: &RawTable) -> Result<Self> {
        let t = table.target;
        let col = &table.columns[t];
        match &col.kind {
            ColumnType::Nominal(cats) => {
                let mut seen = vec![false; cats.len()];
                for (r, row) in table.rows.iter().enumerate() {
                    match row[t] {
                        Cell::Nominal(i) => seen[i] = true,
                        _ => {
                            return Err(Error::invalid_dataset(format!(
                                "row {} has a missing target",
                                r + 1
                            )))
                        }
                    }
                }
                let mut remap = vec![usize::MAX; cats.len()];
                let mut class_names = Vec::new();
                for (i, s) in seen.iter().enumerate() {
                    if *s {
                        remap[i] = class_names.len();
                        class_names.push(cats[i].clone());
                    }
                }
                let labels = table
                    .rows
                    .iter()
                    .map(|row| match row[t] {
                        Cell::Nominal(i) => remap[i],
                        _ => unreachable!(),
                    })
                    .collect();
                Ok(LabelEncoding { class_names, labels })
            }
            ColumnType::Numeric => {
                let mut values = Vec::with_capacity(table.n_rows());
                for (r, row) in table.rows.iter().enumerate() {
                    match row[t] {
                        Cell::Number(v) => values.push(v),
                        _ => {
                            return Err(Error::invalid_dataset(format!(
                                "row {} has a missing target",
                                r + 1
                            )))
                        }
                    }
                }
                let mut distinct = values.clone();
                distinct.sort_by(|a, b| a.total_cmp(b));
                distinct.dedup();
                let labels = values
                    .iter()
                    .map(|v| distinct.binary_search_by(|d| d.total_cmp(v)).unwrap())
                    .collect();
                let class_names = distinct.iter().map(|v| format_number(*v)).collect();
                Ok(LabelEncoding { class_names, labels })
            }
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}
