//! CSV ingestion and result serialization.
//!
//! Rows are observations and columns are variables. The first row is taken as
//! a header when any of its cells is not a finite number. Row numbers in
//! diagnostics are 1-based file records; column numbers are 1-based fields.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// A numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub header: Option<Vec<String>>,
    pub data: DenseMatrix,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_matrix(path: &Path) -> Result<CsvMatrix> {
    let mut text = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut text))
        .map_err(io_err(path))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Shape(msg) => Error::Shape(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse_cell(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses CSV bytes (LF or CRLF line endings).
pub fn parse_matrix(bytes: &[u8]) -> Result<CsvMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut header = None;
    let mut width = None;
    let mut rows = 0usize;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Shape(format!("row {row}: {e}")))?;
        if i == 0 && record.iter().any(|c| parse_cell(c).is_none()) {
            header = Some(record.iter().map(String::from).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| Error::NonNumeric {
                row,
                col: j + 1,
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Shape("no data rows".into()));
    }
    let cols = width.unwrap_or(0);
    let mut col_major = vec![0.0; rows * cols];
    for (idx, v) in values.into_iter().enumerate() {
        let (i, j) = (idx / cols, idx % cols);
        col_major[j * rows + i] = v;
    }
    Ok(CsvMatrix {
        header,
        data: DenseMatrix::from_col_major(rows, cols, col_major)?,
    })
}

/// Where the response comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSource {
    /// A separate single-column CSV.
    File(PathBuf),
    /// A column of the predictor file, by header name or 0-based index.
    Column(String),
}

/// Predictors and response ready for standardization.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    /// Predictor names, aligned with the columns of `x`.
    pub names: Option<Vec<String>>,
}

pub fn load_data(x_path: &Path, response: &ResponseSource) -> Result<LoadedData> {
    let table = read_matrix(x_path)?;
    match response {
        ResponseSource::File(y_path) => {
            let y = read_matrix(y_path)?;
            if y.data.cols() != 1 {
                return Err(Error::Shape(format!(
                    "{} has {} columns, expected a single response column",
                    y_path.display(),
                    y.data.cols()
                )));
            }
            if y.data.rows() != table.data.rows() {
                return Err(Error::Shape(format!(
                    "{} has {} rows but {} has {}",
                    y_path.display(),
                    y.data.rows(),
                    x_path.display(),
                    table.data.rows()
                )));
            }
            Ok(LoadedData {
                x: table.data,
                y: y.data.col(0).to_vec(),
                names: table.header,
            })
        }
        ResponseSource::Column(key) => {
            let cols = table.data.cols();
            let by_name = table
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|name| name == key));
            let j = match by_name {
                Some(j) => j,
                None => key.parse::<usize>().ok().filter(|&j| j < cols).ok_or_else(|| {
                    Error::invalid(format!("no column named or indexed {key:?} among {cols} columns"))
                })?,
            };
            if cols < 2 {
                return Err(Error::Shape(
                    "need at least one predictor besides the response column".into(),
                ));
            }
            let keep: Vec<usize> = (0..cols).filter(|&c| c != j).collect();
            Ok(LoadedData {
                y: table.data.col(j).to_vec(),
                x: table.data.select_columns(&keep),
                names: table.header.map(|h| keep.iter().map(|&c| h[c].clone()).collect()),
            })
        }
    }
}

/// One line of the ranked screening output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedRecord {
    pub rank: usize,
    /// 0-based predictor index.
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub score: f64,
    pub abs_score: f64,
}

pub fn ranked_records(selected: &[usize], scores: &[f64], names: Option<&[String]>) -> Vec<RankedRecord> {
    selected
        .iter()
        .enumerate()
        .map(|(r, &j)| RankedRecord {
            rank: r + 1,
            index: j,
            name: names.map(|n| n[j].clone()),
            score: scores[j],
            abs_score: scores[j].abs(),
        })
        .collect()
}

/// CSV with columns `rank,index[,name],score,abs_score`.
pub fn records_to_csv(records: &[RankedRecord], with_names: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank", "index"];
    if with_names {
        header.push("name");
    }
    header.extend(["score", "abs_score"]);
    let to_err = |e: csv::Error| Error::invalid(format!("csv output: {e}"));
    w.write_record(&header).map_err(to_err)?;
    for r in records {
        let mut row = vec![r.rank.to_string(), r.index.to_string()];
        if with_names {
            row.push(r.name.clone().unwrap_or_default());
        }
        row.push(r.score.to_string());
        row.push(r.abs_score.to_string());
        w.write_record(&row).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Writes `contents` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(io_err(p)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}
