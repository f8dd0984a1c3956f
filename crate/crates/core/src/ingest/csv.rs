use super::table::{Cell, Column, ColumnType, RawTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
    Last,
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub target: TargetColumn,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { delimiter: b',', target: TargetColumn::Last, has_header: true }
    }
}

fn is_missing(s: &str) -> bool {
    s.is_empty() || s == "?"
}

/// Parses delimited text. A column is numeric when every non-missing cell
/// parses as a number; otherwise it is nominal with categories in order of
/// first appearance. `?` and empty cells are missing.
pub fn parse_csv(bytes: &[u8], opts: &CsvOptions) -> Result<RawTable> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Parse { line: 0, msg: format!("invalid UTF-8: {e}") })?;
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    let mut width: Option<usize> = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        let cells: Vec<String> = rec.iter().map(|s| s.trim().to_string()).collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {w} fields, found {}", cells.len()),
                })
            }
            _ => {}
        }
        if opts.has_header && header.is_none() {
            header = Some(cells);
        } else {
            raw_rows.push(cells);
        }
    }
    let m = width.ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
    let names = header.unwrap_or_else(|| (0..m).map(|j| format!("V{}", j + 1)).collect());
    if raw_rows.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no data rows".into() });
    }

    let mut columns = Vec::with_capacity(m);
    let mut grid = vec![vec![Cell::Missing; m]; raw_rows.len()];
    for j in 0..m {
        let numeric = raw_rows
            .iter()
            .all(|r| is_missing(&r[j]) || r[j].parse::<f64>().is_ok());
        if numeric {
            for (i, r) in raw_rows.iter().enumerate() {
                if !is_missing(&r[j]) {
                    grid[i][j] = Cell::Number(r[j].parse().unwrap());
                }
            }
            columns.push(Column { name: names[j].clone(), kind: ColumnType::Numeric });
        } else {
            let mut cats: Vec<String> = Vec::new();
            for (i, r) in raw_rows.iter().enumerate() {
                if is_missing(&r[j]) {
                    continue;
                }
                let idx = match cats.iter().position(|c| c == &r[j]) {
                    Some(p) => p,
                    None => {
                        cats.push(r[j].clone());
                        cats.len() - 1
                    }
                };
                grid[i][j] = Cell::Nominal(idx);
            }
            columns.push(Column { name: names[j].clone(), kind: ColumnType::Nominal(cats) });
        }
    }

    let target = match &opts.target {
        TargetColumn::Last => m - 1,
        TargetColumn::Index(i) if *i < m => *i,
        TargetColumn::Index(i) => {
            return Err(Error::Schema(format!("target index {i} out of range ({m} columns)")))
        }
        TargetColumn::Name(n) => names
            .iter()
            .position(|c| c == n)
            .ok_or_else(|| Error::Schema(format!("no column named `{n}`")))?,
    };
    RawTable::new("csv", columns, grid, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(target: TargetColumn) -> CsvOptions {
        CsvOptions { target, ..Default::default() }
    }

    #[test]
    fn infers_types() {
        let t = parse_csv(b"a,b\n1,x\n2,y", &opts(TargetColumn::Name("b".into()))).unwrap();
        assert_eq!(t.columns[0].kind, ColumnType::Numeric);
        assert_eq!(t.columns[1].kind, ColumnType::Nominal(vec!["x".into(), "y".into()]));
        assert_eq!(t.target, 1);
        assert_eq!(t.rows[1][0], Cell::Number(2.0));
    }

    #[test]
    fn question_mark_is_missing() {
        let t = parse_csv(b"a\n1\n?", &opts(TargetColumn::Last)).unwrap();
        assert_eq!(t.columns[0].kind, ColumnType::Numeric);
        assert_eq!(t.rows[1][0], Cell::Missing);
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_csv(b"a,b\n1,2,3\n", &opts(TargetColumn::Last)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn empty_is_error() {
        assert!(parse_csv(b"", &opts(TargetColumn::Last)).is_err());
    }

    #[test]
    fn quoted_fields_and_semicolons() {
        let o = CsvOptions { delimiter: b';', target: TargetColumn::Index(1), has_header: false };
        let t = parse_csv(b"\"1;5\";a\n2;b\n", &o).unwrap();
        assert!(matches!(t.columns[0].kind, ColumnType::Nominal(_)));
        assert_eq!(t.columns[0].name, "V1");
        assert_eq!(t.cell_text(0, 0), "1;5");
    }
}
