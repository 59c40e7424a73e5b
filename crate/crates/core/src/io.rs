//! CSV ingestion and emission for distance matrices and point clouds.
//!
//! Matrix files are square tables with an optional leading header row of
//! point labels; cloud files are one coordinate row per point. Values use a
//! decimal point and fields are comma-separated.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::metric::{DistanceMatrix, PointCloud};

#[derive(Error, Debug)]
pub enum CsvError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Malformed(#[from] csv::Error),
    #[error("malformed CSV: field '{field}' at row {row} is not a number")]
    BadNumber { row: usize, field: String },
    #[error("malformed CSV: file is empty")]
    Empty,
}

fn parse_records<R: Read>(reader: R) -> Result<Vec<csv::StringRecord>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(records)
}

fn numeric_row(rec: &csv::StringRecord, row: usize) -> Result<Vec<f64>, CsvError> {
    rec.iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| CsvError::BadNumber {
                row,
                field: f.to_string(),
            })
        })
        .collect()
}

fn is_numeric(rec: &csv::StringRecord) -> bool {
    rec.iter().all(|f| f.parse::<f64>().is_ok())
}

/// Reads a square table with an optional label header. The first row is
/// treated as labels exactly when at least one of its fields does not parse
/// as a number. Squareness and metric invariants are left to validation.
pub fn read_matrix_table<R: Read>(
    reader: R,
) -> Result<(Vec<Vec<f64>>, Option<Vec<String>>), CsvError> {
    let records = parse_records(reader)?;
    let (labels, data_start) = if is_numeric(&records[0]) {
        (None, 0)
    } else {
        let labels: Vec<String> = records[0].iter().map(|s| s.to_string()).collect();
        (Some(labels), 1)
    };
    if records.len() == data_start {
        return Err(CsvError::Empty);
    }
    let mut rows = Vec::with_capacity(records.len() - data_start);
    for (idx, rec) in records[data_start..].iter().enumerate() {
        rows.push(numeric_row(rec, data_start + idx)?);
    }
    Ok((rows, labels))
}

pub fn read_matrix_csv(path: &Path) -> Result<(Vec<Vec<f64>>, Option<Vec<String>>), CsvError> {
    let file = std::fs::File::open(path).map_err(|source| CsvError::Read {
        path: path.display().to_string(),
        source,
    })?;
    read_matrix_table(std::io::BufReader::new(file))
}

/// Reads coordinate rows; a non-numeric first row is skipped as a header.
pub fn read_cloud_table<R: Read>(reader: R) -> Result<Vec<Vec<f64>>, CsvError> {
    let records = parse_records(reader)?;
    let data_start = usize::from(!is_numeric(&records[0]));
    if records.len() == data_start {
        return Err(CsvError::Empty);
    }
    records[data_start..]
        .iter()
        .enumerate()
        .map(|(idx, rec)| numeric_row(rec, data_start + idx))
        .collect()
}

pub fn read_cloud_csv(path: &Path) -> Result<Vec<Vec<f64>>, CsvError> {
    let file = std::fs::File::open(path).map_err(|source| CsvError::Read {
        path: path.display().to_string(),
        source,
    })?;
    read_cloud_table(std::io::BufReader::new(file))
}

/// Writes a matrix as CSV, emitting the label header when labels exist.
/// Values use the shortest decimal form that round-trips exactly.
pub fn write_matrix<W: Write>(w: W, d: &DistanceMatrix) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if let Some(labels) = d.labels() {
        out.write_record(labels)?;
    }
    for i in 0..d.n() {
        out.write_record(d.row(i).iter().map(|v| format!("{v}")))?;
    }
    out.flush()
}

pub fn write_matrix_csv(path: &Path, d: &DistanceMatrix) -> Result<(), CsvError> {
    let mut buf = Vec::new();
    write_matrix(&mut buf, d).expect("writing to memory cannot fail");
    std::fs::write(path, buf).map_err(|source| CsvError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_cloud<W: Write>(w: W, cloud: &PointCloud) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for i in 0..cloud.n() {
        out.write_record(cloud.point(i).iter().map(|v| format!("{v}")))?;
    }
    out.flush()
}

pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<(), CsvError> {
    let mut buf = Vec::new();
    write_cloud(&mut buf, cloud).expect("writing to memory cannot fail");
    std::fs::write(path, buf).map_err(|source| CsvError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;

    #[test]
    fn matrix_with_header_and_roundtrip() {
        let text = "a,b,c\n0,3,4\n3,0,5\n4,5,0\n";
        let (rows, labels) = read_matrix_table(text.as_bytes()).unwrap();
        assert_eq!(labels.as_deref().unwrap(), ["a", "b", "c"]);
        let m = validate_metric(rows, labels, 1e-9).unwrap();
        assert_eq!(m.label_of(2), "c");

        let mut out = Vec::new();
        write_matrix(&mut out, &m).unwrap();
        let (rows2, labels2) = read_matrix_table(out.as_slice()).unwrap();
        assert_eq!(rows2, m.to_rows());
        assert_eq!(labels2.as_deref().unwrap(), ["a", "b", "c"]);
    }

    #[test]
    fn matrix_without_header() {
        let text = "0,1\n1,0\n";
        let (rows, labels) = read_matrix_table(text.as_bytes()).unwrap();
        assert!(labels.is_none());
        assert_eq!(rows, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn mixed_garbage_is_malformed() {
        let text = "0,1\n1,zzz\n";
        assert!(matches!(
            read_matrix_table(text.as_bytes()),
            Err(CsvError::BadNumber { row: 1, .. })
        ));
    }

    #[test]
    fn empty_input_is_malformed() {
        assert!(matches!(read_matrix_table(&b""[..]), Err(CsvError::Empty)));
        let header_only = "a,b\n";
        assert!(matches!(
            read_matrix_table(header_only.as_bytes()),
            Err(CsvError::Empty)
        ));
    }

    #[test]
    fn cloud_rows_parse() {
        let text = "x,y\n0,0\n1,0.5\n";
        let rows = read_cloud_table(text.as_bytes()).unwrap();
        assert_eq!(rows, vec![vec![0.0, 0.0], vec![1.0, 0.5]]);
    }
}
