//! Dense ARFF reader and writer.

use super::table::{format_number, Cell, Column, ColumnType, RawTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ArffType {
    Numeric,
    Nominal(Vec<String>),
    String,
    Date(Option<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArffAttribute {
    pub name: String,
    pub kind: ArffType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArffHeader {
    pub relation: String,
    pub attributes: Vec<ArffAttribute>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn unescape(e: char) -> char {
    match e {
        'n' => '\n',
        't' => '\t',
        'r' => '\r',
        e => e,
    }
}

/// Splits on unquoted `sep`, unescaping quoted tokens. Returns each token and
/// whether it was quoted.
fn split_tokens(s: &str, sep: char, line: usize) -> Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut tok = String::new();
        let mut quoted = false;
        match chars.peek() {
            Some(&q) if q == '\'' || q == '"' => {
                quoted = true;
                chars.next();
                let mut closed = false;
                while let Some(c) = chars.next() {
                    if c == '\\' {
                        match chars.next() {
                            Some(e) => tok.push(unescape(e)),
                            None => return Err(perr(line, "dangling escape")),
                        }
                    } else if c == q {
                        closed = true;
                        break;
                    } else {
                        tok.push(c);
                    }
                }
                if !closed {
                    return Err(perr(line, "unterminated quote"));
                }
                while chars.peek().is_some_and(|c| c.is_whitespace()) {
                    chars.next();
                }
                match chars.peek() {
                    None => {}
                    Some(&c) if c == sep => {}
                    Some(_) => return Err(perr(line, "unexpected text after quoted value")),
                }
            }
            _ => {
                while let Some(&c) = chars.peek() {
                    if c == sep {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                }
                tok = tok.trim_end().to_string();
            }
        }
        out.push((tok, quoted));
        match chars.next() {
            Some(c) if c == sep => continue,
            None => break,
            Some(_) => unreachable!(),
        }
    }
    Ok(out)
}

/// First whitespace-delimited (or quoted) word and the remainder.
fn take_word(s: &str, line: usize) -> Result<(String, &str)> {
    let s = s.trim_start();
    let first = s.chars().next().ok_or_else(|| perr(line, "expected a name"))?;
    if first == '\'' || first == '"' {
        let mut name = String::new();
        let mut iter = s.char_indices().skip(1);
        while let Some((i, c)) = iter.next() {
            if c == '\\' {
                if let Some((_, e)) = iter.next() {
                    name.push(unescape(e));
                }
            } else if c == first {
                return Ok((name, &s[i + 1..]));
            } else {
                name.push(c);
            }
        }
        Err(perr(line, "unterminated quoted name"))
    } else {
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        Ok((s[..end].to_string(), &s[end..]))
    }
}

fn parse_type(spec: &str, line: usize) -> Result<ArffType> {
    let spec = spec.trim();
    if let Some(inner) = spec.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| perr(line, "unterminated nominal specification"))?;
        let values: Vec<String> = split_tokens(inner, ',', line)?
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        if values.iter().any(|v| v.is_empty()) {
            return Err(perr(line, "empty nominal value"));
        }
        return Ok(ArffType::Nominal(values));
    }
    let (kw, rest) = take_word(spec, line)?;
    match kw.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(ArffType::Numeric),
        "string" => Ok(ArffType::String),
        "date" => {
            let fmt = rest.trim();
            Ok(ArffType::Date(if fmt.is_empty() {
                None
            } else {
                Some(fmt.trim_matches(|c| c == '"' || c == '\'').to_string())
            }))
        }
        other => Err(perr(line, format!("unknown attribute type `{other}`"))),
    }
}

fn keyword(line: &str) -> Option<(String, &str)> {
    let l = line.trim_start();
    if !l.starts_with('@') {
        return None;
    }
    let end = l.find(char::is_whitespace).unwrap_or(l.len());
    Some((l[..end].to_ascii_lowercase(), &l[end..]))
}

/// Parses dense ARFF. The last attribute becomes the target column.
pub fn parse_arff(bytes: &[u8]) -> Result<(ArffHeader, RawTable)> {
    let text = std::str::from_utf8(bytes).map_err(|e| perr(0, format!("invalid UTF-8: {e}")))?;
    let mut relation: Option<String> = None;
    let mut attributes: Vec<ArffAttribute> = Vec::new();
    let mut in_data = false;
    let mut rows: Vec<Vec<Cell>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let (kw, rest) = keyword(line)
                .ok_or_else(|| perr(line_no, "data line before @DATA header"))?;
            match kw.as_str() {
                "@relation" => {
                    let (name, _) = take_word(rest, line_no)?;
                    relation = Some(name);
                }
                "@attribute" => {
                    if relation.is_none() {
                        return Err(perr(line_no, "@ATTRIBUTE before @RELATION"));
                    }
                    let (name, rest) = take_word(rest, line_no)?;
                    if attributes.iter().any(|a| a.name.eq_ignore_ascii_case(&name)) {
                        return Err(perr(line_no, format!("duplicate attribute `{name}`")));
                    }
                    let kind = parse_type(rest, line_no)?;
                    attributes.push(ArffAttribute { name, kind });
                }
                "@data" => {
                    if attributes.is_empty() {
                        return Err(perr(line_no, "@DATA before any @ATTRIBUTE"));
                    }
                    in_data = true;
                }
                other => return Err(perr(line_no, format!("unknown declaration `{other}`"))),
            }
            continue;
        }

        if line.starts_with('{') {
            return Err(perr(line_no, "sparse ARFF rows are not supported"));
        }
        let tokens = split_tokens(line, ',', line_no)?;
        if tokens.len() != attributes.len() {
            return Err(perr(
                line_no,
                format!("expected {} values, found {}", attributes.len(), tokens.len()),
            ));
        }
        let row_no = rows.len() + 1;
        let mut row = Vec::with_capacity(tokens.len());
        for ((tok, quoted), attr) in tokens.into_iter().zip(&attributes) {
            if !quoted && tok == "?" {
                row.push(Cell::Missing);
                continue;
            }
            let cell = match &attr.kind {
                ArffType::Numeric => Cell::Number(tok.parse().map_err(|_| {
                    perr(line_no, format!("row {row_no}, attribute `{}`: `{tok}` is not numeric", attr.name))
                })?),
                ArffType::Nominal(values) => {
                    Cell::Nominal(values.iter().position(|v| *v == tok).ok_or_else(|| {
                        perr(
                            line_no,
                            format!(
                                "row {row_no}, attribute `{}`: `{tok}` is not a declared value",
                                attr.name
                            ),
                        )
                    })?)
                }
                ArffType::String | ArffType::Date(_) => {
                    return Err(Error::Schema(format!(
                        "attribute `{}` has a string/date type, which is not supported as a feature",
                        attr.name
                    )))
                }
            };
            row.push(cell);
        }
        rows.push(row);
    }

    let relation = relation.ok_or_else(|| perr(0, "missing @RELATION"))?;
    if attributes.is_empty() {
        return Err(perr(0, "no attributes declared"));
    }
    if !in_data {
        return Err(perr(0, "missing @DATA section"));
    }
    let mut columns = Vec::with_capacity(attributes.len());
    for a in &attributes {
        let kind = match &a.kind {
            ArffType::Numeric => ColumnType::Numeric,
            ArffType::Nominal(v) => ColumnType::Nominal(v.clone()),
            ArffType::String | ArffType::Date(_) => {
                return Err(Error::Schema(format!(
                    "attribute `{}` has a string/date type, which is not supported as a feature",
                    a.name
                )))
            }
        };
        columns.push(Column { name: a.name.clone(), kind });
    }
    let target = columns.len() - 1;
    let table = RawTable::new(relation.clone(), columns, rows, target)?;
    Ok((ArffHeader { relation, attributes }, table))
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.chars().any(|c| {
            c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '%' | '{' | '}' | '\\')
        })
        || s.starts_with('@')
}

fn quote(s: &str) -> String {
    if !needs_quotes(s) {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// Writes dense ARFF. The target column is moved to the end so that
/// `parse_arff` recovers the same table.
pub fn write_arff(table: &RawTable) -> String {
    let mut order = table.feature_columns();
    order.push(table.target);
    let mut out = String::new();
    out.push_str(&format!("@RELATION {}\n\n", quote(&table.relation)));
    for &j in &order {
        let col = &table.columns[j];
        let ty = match &col.kind {
            ColumnType::Numeric => "NUMERIC".to_string(),
            ColumnType::Nominal(cats) => format!(
                "{{{}}}",
                cats.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",")
            ),
        };
        out.push_str(&format!("@ATTRIBUTE {} {}\n", quote(&col.name), ty));
    }
    out.push_str("\n@DATA\n");
    for row in &table.rows {
        let cells: Vec<String> = order
            .iter()
            .map(|&j| match (&row[j], &table.columns[j].kind) {
                (Cell::Missing, _) => "?".to_string(),
                (Cell::Number(v), _) => format_number(*v),
                (Cell::Nominal(i), ColumnType::Nominal(cats)) => quote(&cats[*i]),
                (Cell::Nominal(i), ColumnType::Numeric) => i.to_string(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
