//! Reading a numeric column (and optional weights) from CSV or
//! whitespace-separated text.
//!
//! The first row is treated as a header when the selected column does not
//! parse as a number there. Lines that are empty or start with `#` are
//! skipped.

use std::io::Read;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Data {
    pub values: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

pub fn read_path(path: &Path, column: &str, weights_col: Option<&str>) -> Result<Data, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
    };
    parse_text(&text, column, weights_col)
}

fn split_rows(text: &str) -> Result<Vec<(usize, Vec<String>)>, CliError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let comma = lines.first().is_some_and(|(_, l)| l.contains(','));
    if !comma {
        return Ok(lines
            .into_iter()
            .map(|(i, l)| (i, l.split_whitespace().map(str::to_owned).collect()))
            .collect());
    }
    let body: String = lines.iter().map(|(_, l)| format!("{l}\n")).collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    reader
        .records()
        .zip(&lines)
        .map(|(rec, (line, _))| {
            rec.map(|r| (*line, r.iter().map(str::to_owned).collect()))
                .map_err(|e| CliError::Parse(format!("line {line}: {e}")))
        })
        .collect()
}

fn locate(spec: &str, header: Option<&[String]>) -> Result<usize, CliError> {
    if let Ok(pos) = spec.parse::<usize>() {
        return if pos == 0 {
            Err(CliError::Config("column positions start at 1".into()))
        } else {
            Ok(pos - 1)
        };
    }
    header
        .and_then(|h| h.iter().position(|name| name == spec))
        .ok_or_else(|| CliError::Config(format!("no column named '{spec}'")))
}

fn number(field: Option<&String>, line: usize, what: &str) -> Result<f64, CliError> {
    let field = field.ok_or_else(|| CliError::Parse(format!("line {line}: missing {what} column")))?;
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Parse(format!(
            "line {line}: '{field}' is not a finite number"
        ))),
    }
}

pub fn parse_text(text: &str, column: &str, weights_col: Option<&str>) -> Result<Data, CliError> {
    let rows = split_rows(text)?;
    let Some((_, first)) = rows.first() else {
        return Err(CliError::Parse("input contains no data".into()));
    };
    let probe = column.parse::<usize>().ok().filter(|&p| p > 0).map(|p| p - 1);
    let has_header = match probe {
        Some(c) => first.get(c).is_some_and(|f| f.parse::<f64>().is_err()),
        None => true,
    };
    let header = has_header.then_some(first.as_slice());
    let col = locate(column, header)?;
    let wcol = weights_col.map(|w| locate(w, header)).transpose()?;
    let body = &rows[usize::from(has_header)..];
    if body.is_empty() {
        return Err(CliError::Parse("input contains no data rows".into()));
    }

    let mut values = Vec::with_capacity(body.len());
    let mut weights = wcol.map(|_| Vec::with_capacity(body.len()));
    for (line, fields) in body {
        values.push(number(fields.get(col), *line, "data")?);
        if let (Some(c), Some(w)) = (wcol, weights.as_mut()) {
            w.push(number(fields.get(c), *line, "weights")?);
        }
    }
    Ok(Data { values, weights })
}
