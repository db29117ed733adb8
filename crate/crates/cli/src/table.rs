//! CSV reading and writing. Numbers are written with 17 significant digits.

use std::path::Path;

use qudit_qmc::datasets::Dataset;

use crate::error::{CliError, Result};

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A header plus rows of string cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.column(name)
            .ok_or_else(|| CliError::input(format!("missing column {name:?}")))
    }

    pub fn floats(&self, col: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| parse_float(&r[col], i + 2))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| with_path(e, path))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| with_path(e, path))?;
        let header = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(|s| s.trim().to_string()).collect());
        }
        Ok(Table { header, rows })
    }
}

fn with_path(e: csv::Error, path: &Path) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        kind => CliError::input(format!("{}: {kind:?}", path.display())),
    }
}

fn parse_float(cell: &str, line: usize) -> Result<f64> {
    cell.parse()
        .map_err(|_| CliError::input(format!("line {line}: {cell:?} is not a number")))
}

fn parse_label(cell: &str, line: usize) -> Result<usize> {
    cell.parse()
        .map_err(|_| CliError::input(format!("line {line}: {cell:?} is not a class label")))
}

/// Feature columns are `x0, x1, ...`; an optional `label` column holds
/// classes. Any other column is ignored.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let table = Table::read(path)?;
    let mut cols = Vec::new();
    while let Some(c) = table.column(&format!("x{}", cols.len())) {
        cols.push(c);
    }
    if cols.is_empty() {
        return Err(CliError::input(format!("{}: no x0 column", path.display())));
    }
    if table.rows.is_empty() {
        return Err(CliError::input(format!("{}: no rows", path.display())));
    }
    let samples = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| cols.iter().map(|&c| parse_float(&r[c], i + 2)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let labels = match table.column("label") {
        Some(c) => Some(
            table
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| parse_label(&r[c], i + 2))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    Ok(Dataset::new(samples, labels)?)
}

/// Writes features, then `extra` columns, then the label if present.
pub fn dataset_table(data: &Dataset, extra: &[(&str, Vec<f64>)]) -> Table {
    let dim = data.input_dim();
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    header.extend(extra.iter().map(|(name, _)| name.to_string()));
    if data.labels.is_some() {
        header.push("label".into());
    }
    let mut table = Table::new(header);
    for (i, x) in data.samples.iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(|&v| fmt_num(v)).collect();
        row.extend(extra.iter().map(|(_, vals)| fmt_num(vals[i])));
        if let Some(l) = &data.labels {
            row.push(l[i].to_string());
        }
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::f64::consts::PI] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
    }
}
