use std::collections::BTreeSet;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Zero-based column index; negative-style "last column" is `Last`.
    Index(usize),
    Last,
    /// Column name from the header row.
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("last") {
            return Ok(LabelColumn::Last);
        }
        if s.is_empty() {
            return Err(Error::Config("empty label column".into()));
        }
        Ok(s.parse::<usize>()
            .map(LabelColumn::Index)
            .unwrap_or_else(|_| LabelColumn::Name(s.to_string())))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub label: Option<LabelColumn>,
}

/// Parsed dataset plus the data lines skipped for missing values.
#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub dataset: Dataset,
    pub header: Option<Vec<String>>,
    pub rejected_lines: Vec<usize>,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "na" | "NaN" | "nan")
}

/// Loads a comma-separated file of numeric features with an optional class
/// column. A header line is detected when the first row has a non-numeric
/// feature cell. Rows with missing cells are skipped and reported.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<CsvLoad> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(file);

    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, record.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(Error::Data(format!("{} is empty", path.display())));
    }
    let width = records[0].1.len();

    let first = &records[0].1;
    let index_hint = match &options.label {
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Last) => Some(width - 1),
        _ => None,
    };
    let has_header = matches!(options.label, Some(LabelColumn::Name(_)))
        || first
            .iter()
            .enumerate()
            .any(|(k, c)| Some(k) != index_hint && !is_missing(c) && c.parse::<f64>().is_err());
    let header = has_header.then(|| first.clone());
    let body = if has_header { &records[1..] } else { &records[..] };

    let label_col = match &options.label {
        None => None,
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Last) => Some(width - 1),
        Some(LabelColumn::Name(name)) => Some(
            header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::Config(format!("no column named '{name}'")))?,
        ),
    };
    if let Some(c) = label_col {
        if c >= width {
            return Err(Error::Config(format!(
                "label column {c} out of range for {width} columns"
            )));
        }
    }

    let mut values = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut rejected_lines = Vec::new();
    for (line, cells) in body {
        if cells.len() != width {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                message: format!("expected {width} fields, found {}", cells.len()),
            });
        }
        if cells.iter().any(|c| is_missing(c)) {
            rejected_lines.push(*line);
            continue;
        }
        for (k, cell) in cells.iter().enumerate() {
            if Some(k) == label_col {
                raw_labels.push(cell.clone());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                message: format!("column {k}: '{cell}' is not a number"),
            })?;
            values.push(v);
        }
    }
    let dim = width - usize::from(label_col.is_some());
    if values.is_empty() || dim == 0 {
        return Err(Error::Data(format!("{} has no usable data rows", path.display())));
    }

    let (labels, names) = match label_col {
        None => (None, None),
        Some(_) => {
            if let Ok(ids) = raw_labels
                .iter()
                .map(|l| l.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
            {
                (Some(ids), None)
            } else {
                let names: Vec<String> = raw_labels
                    .iter()
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let ids = raw_labels
                    .iter()
                    .map(|l| names.binary_search(l).expect("name collected above") as u32)
                    .collect();
                (Some(ids), Some(names))
            }
        }
    };
    let mut dataset = Dataset::from_flat(values, dim, labels)?;
    if let Some(names) = names {
        dataset = dataset.with_class_names(names);
    }
    Ok(CsvLoad {
        dataset,
        header,
        rejected_lines,
    })
}
