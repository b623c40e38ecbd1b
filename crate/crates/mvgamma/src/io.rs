//! Matrix text format and CSV sample tables.
//!
//! Matrix files: first line the dimension p, then p whitespace-separated
//! rows of p decimal entries. Writers emit 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::density::SampleTable;
use crate::error::{Error, Result};
use crate::linalg::CovMatrix;

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut tokens = text.split_whitespace();
    let p: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
    if p == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let mut entries = Vec::with_capacity(p * p);
    for tok in tokens.by_ref().take(p * p) {
        entries.push(
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad entry '{tok}': {e}")))?,
        );
    }
    if entries.len() != p * p {
        return Err(Error::Parse(format!(
            "expected {} entries for a {p}x{p} matrix, found {}",
            p * p,
            entries.len()
        )));
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing data after matrix entries".into()));
    }
    Ok(DMatrix::from_row_slice(p, p, &entries))
}

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn read_cov_matrix(path: &Path) -> Result<CovMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    CovMatrix::new(parse_matrix(&text)?)
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

/// Writes a sample table as CSV with header x1..xp.
pub fn write_sample_csv(path: &Path, table: &SampleTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    let header: Vec<String> = (1..=table.dim()).map(|j| format!("x{j}")).collect();
    w.write_record(&header).map_err(io_err)?;
    for row in table.rows() {
        let rec: Vec<String> = row.iter().map(|v| format!("{:.16e}", v)).collect();
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sample_csv(path: &Path) -> Result<SampleTable> {
    let mut r = csv::Reader::from_path(path).map_err(io_err)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let row: Result<Vec<f64>> = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad CSV value '{s}': {e}")))
            })
            .collect();
        rows.push(row?);
    }
    SampleTable::new(rows)
}

fn io_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 2.0]);
        let text = format_matrix(&m);
        let back = parse_matrix(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1.0 0.1\n0.1").is_err());
        assert!(parse_matrix("2\n1.0 x\n0.1 1.0").is_err());
        assert!(parse_matrix("1\n1.0 2.0").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("mvgamma_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.csv");
        let table = SampleTable::new(vec![vec![1.0, 2.0], vec![0.5, 0.25]]).unwrap();
        write_sample_csv(&path, &table).unwrap();
        let back = read_sample_csv(&path).unwrap();
        assert_eq!(table, back);
    }
}
