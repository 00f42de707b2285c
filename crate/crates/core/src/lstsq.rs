//! Dense linear least squares by Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative size below which a diagonal entry of `R` counts as zero.
const RANK_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub coeffs: Vec<f64>,
    /// Largest absolute pointwise residual of the fitted model.
    pub max_residual: f64,
}

/// Solves `min ||A x - b||_2` for a row-major `rows x cols` design matrix.
///
/// Columns are scaled to unit norm before the factorization so that bases
/// with very different magnitudes (e.g. powers of `1/kappa`) stay well posed.
pub fn solve(design: &[f64], rows: usize, cols: usize, rhs: &[f64]) -> Result<LeastSquaresFit> {
    if rows < cols {
        return Err(Error::RankDeficient(format!(
            "{rows} samples for {cols} unknowns"
        )));
    }
    if design.len() != rows * cols || rhs.len() != rows {
        return Err(Error::Dimension {
            expected: rows * cols,
            got: design.len(),
        });
    }
    let mut a = DMatrix::from_row_slice(rows, cols, design);
    let mut scales = Vec::with_capacity(cols);
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::RankDeficient("zero or non-finite basis column".into()));
        }
        col /= norm;
        scales.push(norm);
    }
    let b = DVector::from_column_slice(rhs);
    let qr = a.clone().qr();
    let r = qr.r();
    let largest = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(i) = r
        .diagonal()
        .iter()
        .position(|v| v.abs() <= RANK_TOLERANCE * largest)
    {
        return Err(Error::RankDeficient(format!("pivot {i} vanishes")));
    }
    let qtb = qr.q().transpose() * &b;
    let y = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    let fitted = &a * &y;
    let max_residual = (fitted - &b).amax();
    let coeffs = y.iter().zip(&scales).map(|(v, s)| v / s).collect();
    Ok(LeastSquaresFit {
        coeffs,
        max_residual,
    })
}
