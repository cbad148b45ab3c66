//! CSV ingestion of one numeric column.

use std::path::PathBuf;

use ngg_core::inference::DataSet;

use crate::error::{CliError, CliResult};

/// Smallest sample accepted after filtering.
pub const MIN_OBSERVATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl ColumnRef {
    /// Digits are read as a 0-based index unless the header has a column with
    /// that exact name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestionSpec {
    pub path: PathBuf,
    pub column: ColumnRef,
    pub delimiter: u8,
    pub header: bool,
    pub drop_nonpositive: bool,
}

#[derive(Debug)]
pub struct Ingested {
    pub data: DataSet,
    pub column_label: String,
    pub warnings: Vec<String>,
}

fn resolve_column(spec: &IngestionSpec, headers: Option<&csv::StringRecord>, width: usize) -> CliResult<(usize, String)> {
    let available = || match headers {
        Some(h) => h.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", "),
        None => format!("indices 0..{}", width.saturating_sub(1)),
    };
    if let Some(h) = headers {
        let name = match &spec.column {
            ColumnRef::Name(n) => n.clone(),
            ColumnRef::Index(i) => i.to_string(),
        };
        if let Some(i) = h.iter().position(|c| c.trim() == name) {
            return Ok((i, name));
        }
    }
    match &spec.column {
        ColumnRef::Index(i) if *i < width => {
            let label = headers.and_then(|h| h.get(*i)).map(str::to_string).unwrap_or_else(|| format!("column {i}"));
            Ok((*i, label))
        }
        ColumnRef::Index(i) => Err(CliError::Input(format!(
            "column index {i} not found; available columns: {}",
            available()
        ))),
        ColumnRef::Name(n) => Err(CliError::Input(format!(
            "column `{n}` not found; available columns: {}",
            available()
        ))),
    }
}

/// Reads the requested column, drops empty cells and (unless strict)
/// non-positive values with a counted warning.
pub fn load(spec: &IngestionSpec) -> CliResult<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(spec.header)
        .flexible(true)
        .from_path(&spec.path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", spec.path.display())))?;
    let headers = if spec.header {
        Some(reader.headers().map_err(CliError::input)?.clone())
    } else {
        None
    };
    let mut records = reader.records().peekable();
    let width = match (&headers, records.peek()) {
        (Some(h), _) => h.len(),
        (None, Some(Ok(r))) => r.len(),
        _ => 0,
    };
    let (col, column_label) = resolve_column(spec, headers.as_ref(), width)?;

    let mut values = Vec::new();
    let (mut empty, mut nonpositive) = (0usize, 0usize);
    for (row, rec) in records.enumerate() {
        let rec = rec.map_err(CliError::input)?;
        let line = row + 1 + usize::from(spec.header);
        let cell = rec.get(col).map(str::trim).unwrap_or("");
        if cell.is_empty() {
            empty += 1;
            continue;
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| CliError::Input(format!("line {line}: `{cell}` is not a number")))?;
        if !v.is_finite() {
            return Err(CliError::Input(format!("line {line}: non-finite value `{cell}`")));
        }
        if v <= 0.0 {
            if !spec.drop_nonpositive {
                return Err(CliError::Input(format!("line {line}: non-positive value {v} (strict mode)")));
            }
            nonpositive += 1;
            continue;
        }
        values.push(v);
    }
    let mut warnings = Vec::new();
    if empty > 0 {
        warnings.push(format!("skipped {empty} empty cells"));
    }
    if nonpositive > 0 {
        warnings.push(format!("dropped {nonpositive} non-positive observations"));
    }
    if values.len() < MIN_OBSERVATIONS {
        return Err(CliError::Input(format!(
            "{} usable observations in `{column_label}` after filtering; at least {MIN_OBSERVATIONS} required",
            values.len()
        )));
    }
    let data = DataSet::new(values, spec.path.display().to_string()).map_err(CliError::input)?;
    Ok(Ingested {
        data,
        column_label,
        warnings,
    })
}
