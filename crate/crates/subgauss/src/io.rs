//! Import/export of matrices and point sets.
//!
//! Formats are deliberately bare: numeric CSV (one row per line, comma
//! separated) and a small binary layout — magic `SGMX` (u32 LE), row count
//! (u64 LE), column count (u64 LE), then row-major f64 LE values.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

const MAGIC: u32 = 0x5347_4d58; // "SGMX"

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path} line {line}: cannot parse {token:?} as a number")]
    BadNumber { path: String, line: usize, token: String },
    #[error("{path}: rows have inconsistent lengths ({first} vs {other})")]
    RaggedRows { path: String, first: usize, other: usize },
    #[error("{path}: empty matrix")]
    Empty { path: String },
    #[error("{path}: bad magic {magic:#x}")]
    BadMagic { path: String, magic: u32 },
    #[error("{path}: truncated payload")]
    Truncated { path: String },
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File { path: path.display().to_string(), source }
}

/// Write one row per line, full f64 round-trip precision.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), IoError> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}

/// Read a numeric CSV into a dense matrix.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, IoError> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| IoError::BadNumber {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    token: tok.to_string(),
                })
            })
            .collect();
        rows.push(row?);
    }
    let first = rows.first().ok_or_else(|| IoError::Empty { path: path.display().to_string() })?.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != first) {
        return Err(IoError::RaggedRows {
            path: path.display().to_string(),
            first,
            other: bad.len(),
        });
    }
    let nrows = rows.len();
    Ok(DMatrix::from_fn(nrows, first, |i, j| rows[i][j]))
}

/// Points for finite sets: one point per CSV row.
pub fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let m = read_matrix_csv(path)?;
    Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
}

/// Binary export: magic, rows, cols, row-major f64, all little endian.
pub fn write_matrix_bin(path: &Path, m: &DMatrix<f64>) -> Result<(), IoError> {
    let mut f = std::fs::File::create(path).map_err(|e| file_err(path, e))?;
    let mut buf = Vec::with_capacity(20 + 8 * m.len());
    buf.extend_from_slice(&MAGIC.to_le_bytes());
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    f.write_all(&buf).map_err(|e| file_err(path, e))
}

pub fn read_matrix_bin(path: &Path) -> Result<DMatrix<f64>, IoError> {
    let mut f = std::fs::File::open(path).map_err(|e| file_err(path, e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| file_err(path, e))?;
    let p = path.display().to_string();
    if buf.len() < 20 {
        return Err(IoError::Truncated { path: p });
    }
    let magic = u32::from_le_bytes(buf[0..4].try_into().unwrap());
    if magic != MAGIC {
        return Err(IoError::BadMagic { path: p, magic });
    }
    let rows = u64::from_le_bytes(buf[4..12].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(buf[12..20].try_into().unwrap()) as usize;
    let need = 20 + 8 * rows * cols;
    if buf.len() < need {
        return Err(IoError::Truncated { path: p });
    }
    let mut values = Vec::with_capacity(rows * cols);
    for k in 0..rows * cols {
        let off = 20 + 8 * k;
        values.push(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| values[i * cols + j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("subgauss_io_tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn csv_errors_are_specific() {
        let p = tmp("bad.csv");
        std::fs::write(&p, "1.0,2.0\n3.0,oops\n").unwrap();
        assert!(matches!(read_matrix_csv(&p), Err(IoError::BadNumber { line: 2, .. })));
        std::fs::write(&p, "1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(read_matrix_csv(&p), Err(IoError::RaggedRows { .. })));
        std::fs::write(&p, "\n").unwrap();
        assert!(matches!(read_matrix_csv(&p), Err(IoError::Empty { .. })));
    }

    #[test]
    fn bin_magic_is_checked() {
        let p = tmp("bad.bin");
        std::fs::write(&p, b"NOTMAGICXXXXXXXXXXXXXXXX").unwrap();
        assert!(matches!(read_matrix_bin(&p), Err(IoError::BadMagic { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trips_preserve_values(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in 0u64..1000,
        ) {
            let spec = crate::ensembles::EnsembleSpec::gaussian(rows, cols);
            let m = crate::ensembles::sample_matrix(&spec, seed);
            let pc = tmp(&format!("rt_{rows}_{cols}_{seed}.csv"));
            write_matrix_csv(&pc, &m).unwrap();
            prop_assert_eq!(read_matrix_csv(&pc).unwrap(), m.clone());
            let pb = tmp(&format!("rt_{rows}_{cols}_{seed}.bin"));
            write_matrix_bin(&pb, &m).unwrap();
            prop_assert_eq!(read_matrix_bin(&pb).unwrap(), m);
        }
    }
}
