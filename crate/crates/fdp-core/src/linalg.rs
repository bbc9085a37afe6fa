//! Dense matrices and a Householder-QR least-squares solver.
//!
//! Everything in this crate works at desk scale (tens of samples, tens of
//! features), so the matrix type is a plain row-major `Vec<f64>` with no
//! attempt at blocking or SIMD.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("least-squares system needs at least {cols} rows, got {rows}")]
    Underdetermined { rows: usize, cols: usize },
    #[error("design matrix is rank deficient or ill conditioned (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from row slices; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch { expected: cols, actual: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch { expected: rows * cols, actual: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares solution together with a cheap conditioning estimate
/// (ratio of the largest to smallest |R| diagonal of the QR factor).
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub condition: f64,
}

/// Solves `min ||A x - b||_2` by Householder QR, without an intercept
/// column (callers append one themselves if they want it).
///
/// `max_condition` bounds the accepted R-diagonal ratio; anything above it
/// (or an exactly zero pivot) is reported as rank deficient.
pub fn least_squares(a: &Matrix, b: &[f64], max_condition: f64) -> Result<LeastSquares, LinalgError> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(LinalgError::DimensionMismatch { expected: m, actual: b.len() });
    }
    if m < n {
        return Err(LinalgError::Underdetermined { rows: m, cols: n });
    }

    let mut r = a.clone();
    let mut rhs = b.to_vec();

    // Householder triangularization applied in place; the reflectors are
    // applied to the right-hand side as they are formed.
    for k in 0..n {
        let mut norm = 0.0f64;
        for i in k..m {
            norm = norm.hypot(r.get(i, k));
        }
        if norm == 0.0 {
            return Err(LinalgError::RankDeficient { condition: f64::INFINITY });
        }
        let alpha = if r.get(k, k) >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 > 0.0 {
            for j in k..n {
                let mut s = 0.0;
                for (t, vi) in v.iter().enumerate() {
                    s += vi * r.get(k + t, j);
                }
                let factor = 2.0 * s / vnorm2;
                for (t, vi) in v.iter().enumerate() {
                    let cur = r.get(k + t, j);
                    r.set(k + t, j, cur - factor * vi);
                }
            }
            let mut s = 0.0;
            for (t, vi) in v.iter().enumerate() {
                s += vi * rhs[k + t];
            }
            let factor = 2.0 * s / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                rhs[k + t] -= factor * vi;
            }
        }
        r.set(k, k, alpha);
    }

    let diag: Vec<f64> = (0..n).map(|k| r.get(k, k).abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0f64, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if dmin == 0.0 { f64::INFINITY } else { dmax / dmin };
    if !condition.is_finite() || condition > max_condition {
        return Err(LinalgError::RankDeficient { condition });
    }

    // Back substitution on the upper-triangular factor.
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= r.get(k, j) * x[j];
        }
        x[k] = s / r.get(k, k);
    }

    Ok(LeastSquares { coefficients: x, condition })
}
