use std::path::Path;

use serde::Serialize;

use crate::divergence::{estimate_renyi_divergence_with, DivergenceParams};
use crate::error::{Error, Result};
use crate::numerics::{NeighborBackend, PointSet};

/// Reads a CSV with one point per row. A first row that does not parse as
/// numbers is treated as a header.
pub fn read_points_csv(path: &Path) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Config(format!("{}: row {}: {e}", path.display(), i + 1))),
        }
    }
    PointSet::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub alpha: f64,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    pub estimate: f64,
    /// Zero neighbor distances replaced by the guard value.
    pub guarded: usize,
}

/// `D̂α(p‖q)` for samples of `p` in `x_path` and of `q` in `y_path`.
pub fn estimate_files(x_path: &Path, y_path: &Path, alpha: f64, k: usize) -> Result<EstimateReport> {
    let params = DivergenceParams::new(alpha, k)?;
    let x = read_points_csv(x_path)?;
    let y = read_points_csv(y_path)?;
    let est = estimate_renyi_divergence_with(&x, &y, &params, NeighborBackend::Auto)?;
    Ok(EstimateReport { alpha, k, n: x.n(), m: y.n(), dim: x.d(), estimate: est.value, guarded: est.guarded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        std::fs::write(&a, "x,y\n0,0\n1,0\n0,1\n1,1\n2,2\n").unwrap();
        std::fs::write(&b, "0.5,0.5\n1.5,0.5\n0.5,1.5\n3,3\n").unwrap();
        let pa = read_points_csv(&a).unwrap();
        assert_eq!((pa.n(), pa.d()), (5, 2));
        let report = estimate_files(&a, &b, 0.5, 2).unwrap();
        assert!(report.estimate.is_finite());
        assert_eq!(report.m, 4);
    }

    #[test]
    fn bad_rows_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "1,2\n3,x\n").unwrap();
        assert!(read_points_csv(&a).is_err());
        std::fs::write(&a, "1,2\n3\n").unwrap();
        assert!(read_points_csv(&a).is_err());
    }
}
