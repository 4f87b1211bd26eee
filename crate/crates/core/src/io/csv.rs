//! Comma-separated feature matrices: one sample per line, optional header,
//! optional `label` column selected by header name.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::kernel::Dataset;

const LABEL: &str = "label";

pub fn parse(bytes: &[u8]) -> Result<Dataset> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(::csv::Trim::All)
        .from_reader(bytes);

    let mut label_col: Option<usize> = None;
    let mut width: Option<usize> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    let mut first = true;

    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            offset: e.position().map(|p| p.byte()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let offset = record.position().map(|p| p.byte()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            // A first line that does not parse as numbers is a header.
            if record.iter().any(|f| f.parse::<f64>().is_err()) {
                label_col = record.iter().position(|f| f.eq_ignore_ascii_case(LABEL));
                width = Some(record.len());
                continue;
            }
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                offset,
                message: format!("row {rows} has {} fields, expected {w}", record.len()),
            });
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_col {
                let l = field.parse::<u32>().map_err(|_| Error::Parse {
                    offset,
                    message: format!("row {rows}: label '{field}' is not a nonnegative integer"),
                })?;
                labels.push(l);
                continue;
            }
            let v = field.parse::<f64>().map_err(|_| Error::Parse {
                offset,
                message: format!("row {rows}, column {col}: '{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: rows, col });
            }
            features.push(v);
        }
        rows += 1;
    }

    if rows == 0 {
        return Err(Error::Parse {
            offset: 0,
            message: "no data rows".into(),
        });
    }
    let d = width.unwrap_or(0) - usize::from(label_col.is_some());
    Dataset::new(features, rows, d, label_col.map(|_| labels))
}

/// Header `x0,…,x{d−1}[,label]`; values use the shortest round-trip form.
pub fn write(dataset: &Dataset) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..dataset.d()).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    if dataset.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, row) in dataset.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").expect("writing to a String");
        }
        if let Some(l) = dataset.labels() {
            write!(out, ",{}", l[i]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}
