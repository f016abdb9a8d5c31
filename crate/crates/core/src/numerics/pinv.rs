use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::svd::svd_truncated;

/// Relative singular-value cutoff used when callers have no preference.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Moore-Penrose pseudoinverse via the thin SVD. Singular values below
/// `rcond · σ_max` are treated as zero.
pub fn pseudoinverse(m: &Matrix, rcond: f64) -> Result<Matrix> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("pseudoinverse of an empty matrix"));
    }
    if rcond.is_nan() || rcond < 0.0 {
        return Err(Error::invalid("rcond must be nonnegative"));
    }
    let svd = svd_truncated(m, rows.min(cols))?;
    let cutoff = rcond * svd.singular_values[0];
    let mut out = Matrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s == 0.0 || s <= cutoff {
            continue;
        }
        let inv = 1.0 / s;
        for i in 0..cols {
            let vi = svd.right[(i, k)] * inv;
            if vi == 0.0 {
                continue;
            }
            for (o, j) in out.row_mut(i).iter_mut().zip(0..rows) {
                *o += vi * svd.left[(j, k)];
            }
        }
    }
    Ok(out)
}
