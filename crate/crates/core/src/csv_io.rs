//! CSV ingestion: a header row, one label column, every other column a numeric feature.

use std::io::Read;

use nalgebra::DMatrix;

use crate::data::{LabeledDataset, Targets, UnlabeledDataset};
use crate::error::{PearlError, Result};

/// Header names and parsed numeric rows. Row numbers in errors are 1-based data rows.
struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| PearlError::Csv { row: 0, msg: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| PearlError::Csv { row, msg: e.to_string() })?;
        let parsed = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| PearlError::Csv {
                        row,
                        msg: format!("cannot parse {:?} in column {:?}", cell, headers[c]),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(parsed);
    }
    Ok(Table { headers, rows })
}

fn feature_matrix(table: &Table, skip: Option<usize>) -> DMatrix<f64> {
    let cols: Vec<usize> = (0..table.headers.len()).filter(|&c| Some(c) != skip).collect();
    DMatrix::from_fn(table.rows.len(), cols.len(), |r, c| table.rows[r][cols[c]])
}

fn label_index(table: &Table, label: &str) -> Result<usize> {
    table
        .headers
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| PearlError::Csv { row: 0, msg: format!("no column named {label:?}") })
}

/// Labeled dataset from CSV. Class labels must be nonnegative integers; the class
/// count is one more than the largest label (at least 2).
pub fn read_labeled<R: Read>(reader: R, label: &str, classification: bool) -> Result<LabeledDataset> {
    let table = read_table(reader)?;
    let li = label_index(&table, label)?;
    let y: Vec<f64> = table.rows.iter().map(|r| r[li]).collect();
    let target = if classification {
        let labels = y
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(PearlError::Csv { row: i + 1, msg: format!("label {v} is not a class index") })
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        let n_classes = labels.iter().max().map_or(2, |m| (m + 1).max(2));
        Targets::classes(labels, n_classes)?
    } else {
        Targets::Real(y)
    };
    LabeledDataset::new(feature_matrix(&table, Some(li)), target)
}

/// Feature rows from CSV, dropping `label` when present.
pub fn read_features<R: Read>(reader: R, label: Option<&str>) -> Result<DMatrix<f64>> {
    let table = read_table(reader)?;
    let skip = label.and_then(|l| table.headers.iter().position(|h| h == l));
    Ok(feature_matrix(&table, skip))
}

pub fn read_unlabeled<R: Read>(reader: R, label: Option<&str>) -> Result<UnlabeledDataset> {
    UnlabeledDataset::new(read_features(reader, label)?)
}
