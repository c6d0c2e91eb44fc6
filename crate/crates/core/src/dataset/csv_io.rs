use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{Dataset, Label, LabeledInstance};
use crate::error::{AsgError, Result};

/// Token accepted (case-insensitively) for the novel label, alongside `0`.
pub const NOVEL_TOKEN: &str = "novel";

pub fn parse_label(cell: &str) -> Option<Label> {
    let cell = cell.trim();
    if cell.eq_ignore_ascii_case(NOVEL_TOKEN) {
        return Some(Label::Novel);
    }
    cell.parse::<usize>()
        .ok()
        .and_then(|v| Label::try_from(v).ok())
}

/// Reads a comma-separated file. `label_column` defaults to the last column.
///
/// A first row whose first cell is not numeric is treated as a header and
/// skipped. Row numbers in errors are 1-based file lines.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let ncol = record.len();
        let label_col = label_column.unwrap_or(ncol.saturating_sub(1));
        if label_col >= ncol {
            return Err(AsgError::Parse {
                row,
                message: format!("label column {label_col} but row has {ncol} columns"),
            });
        }
        if width.is_none() && features.is_empty() && is_header(&record, label_col) {
            continue;
        }
        match width {
            None => width = Some(ncol),
            Some(w) if w != ncol => {
                return Err(AsgError::dimension(
                    w,
                    ncol,
                    format!("column count at row {row}"),
                ));
            }
            _ => {}
        }
        let label = parse_label(&record[label_col]).ok_or_else(|| AsgError::Parse {
            row,
            message: format!("bad label {:?}", &record[label_col]),
        })?;
        let mut x = Vec::with_capacity(ncol - 1);
        for (j, cell) in record.iter().enumerate() {
            if j == label_col {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| AsgError::Parse {
                row,
                message: format!("column {j}: not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(AsgError::Parse {
                    row,
                    message: format!("column {j}: non-finite value"),
                });
            }
            x.push(v);
        }
        features.push(x);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(AsgError::EmptyInput(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    Dataset::from_parts(features, labels)
}

fn is_header(record: &csv::StringRecord, label_col: usize) -> bool {
    let first = &record[0];
    if first.parse::<f64>().is_ok() {
        return false;
    }
    !(label_col == 0 && parse_label(first).is_some())
}

/// Writes features followed by the label column, with a header row.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    let header: Vec<String> = (1..=data.dim())
        .map(|j| format!("x{j}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for LabeledInstance { features, label } in data.instances() {
        for v in features {
            write!(out, "{v},")?;
        }
        writeln!(out, "{label}")?;
    }
    out.flush()?;
    Ok(())
}
