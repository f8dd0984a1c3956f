//! Train-fit / test-apply feature encoding: numeric columns are
//! standardized, two-valued nominal columns become one 0/1 column, wider
//! nominal columns are one-hot encoded over the training-observed categories.

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, FeatureKind};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::ingest::table::{Cell, ColumnType, LabelEncoding, RawTable};

pub const STD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// At most two observed category indices; the first maps to 0.
    BinaryCategorical { values: Vec<usize> },
    MultiCategorical,
}

/// Kind per table column; `None` for the target and for columns the caller
/// left unclassified (which makes fitting fail).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub kinds: Vec<Option<ColumnKind>>,
}

impl Schema {
    /// Numeric columns stay numeric; nominal columns are binary when at most
    /// two distinct values occur anywhere in the table, multi otherwise.
    pub fn infer(table: &RawTable) -> Schema {
        let kinds = table
            .columns
            .iter()
            .enumerate()
            .map(|(j, col)| {
                if j == table.target {
                    return None;
                }
                Some(match &col.kind {
                    ColumnType::Numeric => ColumnKind::Numeric,
                    ColumnType::Nominal(cats) => {
                        let mut seen = vec![false; cats.len()];
                        for row in &table.rows {
                            if let Cell::Nominal(i) = row[j] {
                                seen[i] = true;
                            }
                        }
                        let values: Vec<usize> = (0..cats.len()).filter(|&i| seen[i]).collect();
                        if values.len() <= 2 {
                            ColumnKind::BinaryCategorical { values }
                        } else {
                            ColumnKind::MultiCategorical
                        }
                    }
                })
            })
            .collect();
        Schema { kinds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnTransform {
    Standardize { column: usize, mean: f64, std: f64 },
    Ordinal { column: usize, values: Vec<usize> },
    OneHot { column: usize, categories: Vec<usize> },
}

impl ColumnTransform {
    fn width(&self) -> usize {
        match self {
            ColumnTransform::OneHot { categories, .. } => categories.len(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessModel {
    pub transforms: Vec<ColumnTransform>,
    pub output_dim: usize,
    pub n_input_columns: usize,
}

fn numeric_cell(table: &RawTable, r: usize, j: usize) -> Result<f64> {
    match table.rows[r][j] {
        Cell::Number(v) => Ok(v),
        Cell::Missing => Err(Error::invalid_dataset(format!(
            "missing value in row {} column `{}`",
            r + 1,
            table.columns[j].name
        ))),
        Cell::Nominal(_) => Err(Error::Schema(format!(
            "column `{}` is not numeric",
            table.columns[j].name
        ))),
    }
}

fn nominal_cell(table: &RawTable, r: usize, j: usize) -> Result<usize> {
    match table.rows[r][j] {
        Cell::Nominal(i) => Ok(i),
        Cell::Missing => Err(Error::invalid_dataset(format!(
            "missing value in row {} column `{}`",
            r + 1,
            table.columns[j].name
        ))),
        Cell::Number(_) => Err(Error::Schema(format!(
            "column `{}` is not nominal",
            table.columns[j].name
        ))),
    }
}

/// Learns encoding statistics from the given rows only.
pub fn fit(table: &RawTable, schema: &Schema, rows: &[usize]) -> Result<PreprocessModel> {
    if schema.kinds.len() != table.n_columns() {
        return Err(Error::Schema(format!(
            "schema covers {} columns, table has {}",
            schema.kinds.len(),
            table.n_columns()
        )));
    }
    if rows.is_empty() {
        return Err(Error::invalid_dataset("no rows to fit preprocessing on"));
    }
    let mut transforms = Vec::new();
    for j in table.feature_columns() {
        let kind = schema.kinds[j].as_ref().ok_or_else(|| {
            Error::Schema(format!("column `{}` has no kind", table.columns[j].name))
        })?;
        let t = match kind {
            ColumnKind::Numeric => {
                let mut values = Vec::with_capacity(rows.len());
                for &r in rows {
                    values.push(numeric_cell(table, r, j)?);
                }
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                ColumnTransform::Standardize { column: j, mean, std: var.sqrt().max(STD_EPS) }
            }
            ColumnKind::BinaryCategorical { values } => {
                if !matches!(table.columns[j].kind, ColumnType::Nominal(_)) {
                    return Err(Error::Schema(format!(
                        "column `{}` is not nominal",
                        table.columns[j].name
                    )));
                }
                ColumnTransform::Ordinal { column: j, values: values.clone() }
            }
            ColumnKind::MultiCategorical => {
                let n_cats = match &table.columns[j].kind {
                    ColumnType::Nominal(c) => c.len(),
                    ColumnType::Numeric => {
                        return Err(Error::Schema(format!(
                            "column `{}` is not nominal",
                            table.columns[j].name
                        )))
                    }
                };
                let mut seen = vec![false; n_cats];
                for &r in rows {
                    seen[nominal_cell(table, r, j)?] = true;
                }
                let categories = (0..n_cats).filter(|&i| seen[i]).collect();
                ColumnTransform::OneHot { column: j, categories }
            }
        };
        transforms.push(t);
    }
    let output_dim = transforms.iter().map(ColumnTransform::width).sum();
    Ok(PreprocessModel { transforms, output_dim, n_input_columns: table.n_columns() })
}

impl PreprocessModel {
    pub fn feature_kinds(&self) -> Vec<FeatureKind> {
        self.transforms
            .iter()
            .map(|t| match t {
                ColumnTransform::Standardize { .. } => FeatureKind::Numeric,
                ColumnTransform::Ordinal { .. } => FeatureKind::BinaryCategorical,
                ColumnTransform::OneHot { categories, .. } => {
                    FeatureKind::MultiCategorical { cardinality: categories.len() }
                }
            })
            .collect()
    }

    /// Encodes the given rows of `table`.
    pub fn transform(&self, table: &RawTable, rows: &[usize]) -> Result<Matrix> {
        if table.n_columns() != self.n_input_columns {
            return Err(Error::DimensionMismatch {
                expected: self.n_input_columns,
                got: table.n_columns(),
            });
        }
        let mut out = Matrix::zeros(rows.len(), self.output_dim);
        for (o, &r) in rows.iter().enumerate() {
            let dst = out.row_mut(o);
            let mut c = 0;
            for t in &self.transforms {
                match t {
                    ColumnTransform::Standardize { column, mean, std } => {
                        dst[c] = (numeric_cell(table, r, *column)? - mean) / std;
                    }
                    ColumnTransform::Ordinal { column, values } => {
                        let v = nominal_cell(table, r, *column)?;
                        dst[c] = match values.iter().position(|&x| x == v) {
                            Some(p) => p as f64,
                            None => {
                                return Err(Error::Schema(format!(
                                    "unexpected category in binary column `{}`",
                                    table.columns[*column].name
                                )))
                            }
                        };
                    }
                    ColumnTransform::OneHot { column, categories } => {
                        let v = nominal_cell(table, r, *column)?;
                        if let Some(p) = categories.iter().position(|&x| x == v) {
                            dst[c + p] = 1.0;
                        }
                    }
                }
                c += t.width();
            }
        }
        Ok(out)
    }

    /// Encodes rows into a labelled dataset.
    pub fn apply(
        &self,
        table: &RawTable,
        labels: &LabelEncoding,
        rows: &[usize],
        name: &str,
    ) -> Result<Dataset> {
        let features = self.transform(table, rows)?;
        let y = rows.iter().map(|&r| labels.labels[r]).collect();
        Dataset::new(name, features, y, labels.n_classes(), self.feature_kinds())
    }
}

/// Fits on every row and encodes the whole table.
pub fn encode_table(table: &RawTable, name: &str) -> Result<(Dataset, LabelEncoding)> {
    let schema = Schema::infer(table);
    let labels = LabelEncoding::fit(table)?;
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    let model = fit(table, &schema, &rows)?;
    Ok((model.apply(table, &labels, &rows, name)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::table::Column;

    fn table(cols: Vec<Column>, rows: Vec<Vec<Cell>>, target: usize) -> RawTable {
        RawTable::new("t", cols, rows, target).unwrap()
    }

    fn num(name: &str) -> Column {
        Column { name: name.into(), kind: ColumnType::Numeric }
    }

    fn nom(name: &str, cats: &[&str]) -> Column {
        Column {
            name: name.into(),
            kind: ColumnType::Nominal(cats.iter().map(|s| s.to_string()).collect()),
        }
    }

    #[test]
    fn standardizes_with_population_std() {
        let t = table(
            vec![num("x"), nom("y", &["a", "b"])],
            vec![
                vec![Cell::Number(2.0), Cell::Nominal(0)],
                vec![Cell::Number(4.0), Cell::Nominal(1)],
                vec![Cell::Number(6.0), Cell::Nominal(0)],
            ],
            1,
        );
        let (ds, _) = encode_table(&t, "t").unwrap();
        // mean 4, std sqrt(8/3)
        let s = (8.0f64 / 3.0).sqrt();
        let expect = [-2.0 / s, 0.0, 2.0 / s];
        for (i, e) in expect.iter().enumerate() {
            assert!((ds.features().get(i, 0) - e).abs() < 1e-12);
        }
        assert!((expect[2] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let t = table(
            vec![num("x"), nom("y", &["a", "b"])],
            vec![
                vec![Cell::Number(5.0), Cell::Nominal(0)],
                vec![Cell::Number(5.0), Cell::Nominal(1)],
            ],
            1,
        );
        let (ds, _) = encode_table(&t, "t").unwrap();
        assert_eq!(ds.features().column(0), vec![0.0, 0.0]);
    }

    #[test]
    fn one_hot_and_ordinal() {
        let t = table(
            vec![nom("c", &["a", "b", "c"]), nom("bin", &["no", "yes"]), nom("y", &["p", "q"])],
            vec![
                vec![Cell::Nominal(0), Cell::Nominal(1), Cell::Nominal(0)],
                vec![Cell::Nominal(1), Cell::Nominal(0), Cell::Nominal(1)],
                vec![Cell::Nominal(2), Cell::Nominal(1), Cell::Nominal(0)],
            ],
            2,
        );
        let (ds, _) = encode_table(&t, "t").unwrap();
        assert_eq!(ds.n_features(), 4);
        assert_eq!(ds.row(1), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(ds.row(0), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            ds.schema(),
            &[FeatureKind::MultiCategorical { cardinality: 3 }, FeatureKind::BinaryCategorical]
        );
    }

    #[test]
    fn unseen_test_category_is_all_zero() {
        let t = table(
            vec![nom("c", &["a", "b", "c"]), nom("y", &["p", "q"])],
            vec![
                vec![Cell::Nominal(0), Cell::Nominal(0)],
                vec![Cell::Nominal(1), Cell::Nominal(1)],
                vec![Cell::Nominal(2), Cell::Nominal(0)],
            ],
            1,
        );
        let schema = Schema::infer(&t);
        let model = fit(&t, &schema, &[0, 1]).unwrap();
        assert_eq!(model.output_dim, 2);
        let m = model.transform(&t, &[2]).unwrap();
        assert_eq!(m.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn missing_kind_is_schema_error() {
        let t = table(
            vec![num("x"), nom("y", &["a", "b"])],
            vec![vec![Cell::Number(1.0), Cell::Nominal(0)]],
            1,
        );
        let schema = Schema { kinds: vec![None, None] };
        assert!(matches!(fit(&t, &schema, &[0]), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_values_rejected() {
        let t = table(
            vec![num("x"), nom("y", &["a", "b"])],
            vec![vec![Cell::Missing, Cell::Nominal(0)], vec![Cell::Number(1.0), Cell::Nominal(1)]],
            1,
        );
        assert!(encode_table(&t, "t").is_err());
    }
}
