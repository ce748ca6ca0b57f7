//! CSV ingestion and output files.
//!
//! Point files hold one point per row. Coreset files hold
//! `weight,coord_1,...,coord_d` rows under a header. Files are written to a
//! temporary sibling first and renamed into place.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use owcoreset::{Dataset, WeightedCoreset, WeightedPoints};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot open {path}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path}: file contains no data rows")]
    Empty { path: PathBuf },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("cannot write {path}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn open(path: &Path) -> Result<csv::Reader<File>, IoError> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IoError::Open {
            path: path.to_path_buf(),
            source: e.into(),
        })
}

/// Numeric rows of a CSV file with 1-based row numbers; a first row whose
/// first field is not a number is taken as a header and skipped.
fn numeric_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>, IoError> {
    let mut rows = Vec::new();
    for (i, rec) in open(path)?.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| IoError::Row {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if row == 1 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let mut values = Vec::with_capacity(rec.len());
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| IoError::Row {
                path: path.to_path_buf(),
                row,
                message: format!("column {}: {field:?} is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(IoError::Row {
                    path: path.to_path_buf(),
                    row,
                    message: format!("column {}: non-finite value {field}", col + 1),
                });
            }
            values.push(v);
        }
        rows.push((row, values));
    }
    if rows.is_empty() {
        return Err(IoError::Empty {
            path: path.to_path_buf(),
        });
    }
    let dim = rows[0].1.len();
    if let Some((row, r)) = rows.iter().find(|(_, r)| r.len() != dim) {
        return Err(IoError::Row {
            path: path.to_path_buf(),
            row: *row,
            message: format!("expected {dim} columns, found {}", r.len()),
        });
    }
    Ok(rows)
}

/// Read a point file; the dimension is taken from the first data row.
pub fn ingest_csv(path: &Path) -> Result<Dataset, IoError> {
    let rows = numeric_rows(path)?;
    let dim = rows[0].1.len();
    let coords: Vec<f64> = rows.into_iter().flat_map(|(_, r)| r).collect();
    Dataset::from_flat(dim, coords).map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Read a coreset file written by [`write_coreset`].
pub fn read_coreset(path: &Path) -> Result<WeightedCoreset, IoError> {
    let rows = numeric_rows(path)?;
    let dim = rows[0].1.len().saturating_sub(1);
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut weights = Vec::with_capacity(rows.len());
    for (row, r) in rows {
        let w = r[0];
        if !(w >= 1.0 && w.fract() == 0.0 && w < u64::MAX as f64) {
            return Err(IoError::Row {
                path: path.to_path_buf(),
                row,
                message: format!("weight {w} is not a positive integer"),
            });
        }
        weights.push(w as u64);
        coords.extend_from_slice(&r[1..]);
    }
    WeightedCoreset::new(dim, coords, weights).map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Non-increasing rank weights, one value per row (first column).
pub fn read_weights(path: &Path) -> Result<Vec<f64>, IoError> {
    Ok(numeric_rows(path)?.into_iter().map(|(_, r)| r[0]).collect())
}

/// Write `path` through a temporary sibling renamed on success.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(err)
}

fn write_row(w: &mut dyn Write, values: impl Iterator<Item = String>) -> std::io::Result<()> {
    let line: Vec<String> = values.collect();
    writeln!(w, "{}", line.join(","))
}

/// Points as CSV rows; floats use the shortest round-trip formatting.
pub fn write_points<D: WeightedPoints + ?Sized>(path: &Path, data: &D) -> Result<(), IoError> {
    write_atomic(path, |w| {
        for i in 0..data.len() {
            for _ in 0..data.weight(i) {
                write_row(w, data.point(i).iter().map(|v| v.to_string()))?;
            }
        }
        Ok(())
    })
}

pub fn write_coreset(path: &Path, coreset: &WeightedCoreset) -> Result<(), IoError> {
    write_atomic(path, |w| {
        let header = std::iter::once("weight".to_string())
            .chain((1..=coreset.dim()).map(|j| format!("coord_{j}")));
        write_row(w, header)?;
        for i in 0..coreset.len() {
            let row = std::iter::once(coreset.weight(i).to_string())
                .chain(coreset.point(i).iter().map(|v| v.to_string()));
            write_row(w, row)?;
        }
        Ok(())
    })
}
