use crate::error::{Error, Result};
use crate::matrix::Matrix;

const SYMMETRY_TOL: f64 = 1e-10;

/// Solves `m · z = rhs` for symmetric positive-definite `m` by Cholesky
/// factorization. `rhs` may have any number of columns, including zero.
pub fn spd_solve(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::invalid("spd_solve needs a square matrix"));
    }
    if rhs.rows() != n {
        return Err(Error::invalid("right-hand side has the wrong number of rows"));
    }
    let scale = m.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if libm::fabs(m[(i, j)] - m[(j, i)]) > SYMMETRY_TOL * scale {
                return Err(Error::invalid("matrix is not symmetric"));
            }
        }
    }

    let l = cholesky_factor(m)?;

    let mut z = rhs.clone();
    for c in 0..rhs.cols() {
        // forward: L w = b
        for i in 0..n {
            let mut s = z[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * z[(k, c)];
            }
            z[(i, c)] = s / l[(i, i)];
        }
        // backward: Lᵀ z = w
        for i in (0..n).rev() {
            let mut s = z[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)] * z[(k, c)];
            }
            z[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(z)
}

/// `log det m` for symmetric positive-definite `m`.
pub fn spd_log_det(m: &Matrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::invalid("spd_log_det needs a square matrix"));
    }
    let l = cholesky_factor(m)?;
    Ok(2.0 * (0..m.rows()).map(|i| libm::log(l[(i, i)])).sum::<f64>())
}

/// Lower-triangular `L` with `m = L Lᵀ`. Only the lower triangle of `m` is read.
fn cholesky_factor(m: &Matrix) -> Result<Matrix> {
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = libm::sqrt(d);
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}
