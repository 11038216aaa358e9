use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// A non-empty set of `n` finite points in `d` dimensions, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Array2<f64>,
}

impl PointSet {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 {
            return Err(Error::InsufficientSamples { needed: 1, available: 0 });
        }
        if d == 0 {
            return Err(Error::param("point dimension must be >= 1"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point set"));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            flat.extend_from_slice(row);
        }
        let arr = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::param(e.to_string()))?;
        Self::new(arr)
    }

    /// One-dimensional points.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        let arr = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .map_err(|e| Error::param(e.to_string()))?;
        Self::new(arr)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn d(&self) -> usize {
        self.points.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.points
    }
}

/// Euclidean distance, summing squared differences in dimension order.
#[inline]
pub fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc.sqrt()
}

/// `n × m` matrix of Euclidean distances between rows of `a` and rows of `b`.
pub fn pairwise_distances(a: &PointSet, b: &PointSet) -> Result<Array2<f64>> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch { expected: a.d(), found: b.d() });
    }
    let mut out = Array2::zeros((a.n(), b.n()));
    for (i, ra) in a.points.rows().into_iter().enumerate() {
        for (j, rb) in b.points.rows().into_iter().enumerate() {
            out[[i, j]] = euclidean(ra, rb);
        }
    }
    Ok(out)
}
