use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};

const MAX_SWEEPS: usize = 80;

/// Top singular triplets of a matrix: `m ≈ left · diag(σ) · rightᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    /// `rows x r`, orthonormal columns.
    pub left: Matrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `cols x r`, orthonormal columns.
    pub right: Matrix,
}

impl SvdResult {
    /// `left · diag(σ) · rightᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.left.clone();
        for i in 0..scaled.rows() {
            for (v, s) in scaled.row_mut(i).iter_mut().zip(&self.singular_values) {
                *v *= s;
            }
        }
        scaled.matmul(&self.right.transpose())
    }
}

/// Truncated SVD by one-sided (Hestenes) Jacobi rotations.
///
/// The rotations act on whichever orientation has `min(rows, cols)` columns,
/// so the work per sweep is `O(min² · max)`. Singular vectors belonging to
/// numerically zero singular values are completed to an orthonormal set.
pub fn svd_truncated(m: &Matrix, r: usize) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    let max = rows.min(cols);
    if r == 0 || r > max {
        return Err(Error::InvalidRank { rank: r, max });
    }
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }

    if rows >= cols {
        // m V = U Σ
        let (u, sigma, v) = one_sided_jacobi(m.columns(), rows, r);
        Ok(SvdResult {
            left: Matrix::from_columns(rows, &u),
            singular_values: sigma,
            right: Matrix::from_columns(cols, &v),
        })
    } else {
        // mᵀ V = U Σ, so m = V Σ Uᵀ
        let columns: Vec<Vec<f64>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
        let (u, sigma, v) = one_sided_jacobi(columns, cols, r);
        Ok(SvdResult {
            left: Matrix::from_columns(rows, &v),
            singular_values: sigma,
            right: Matrix::from_columns(cols, &u),
        })
    }
}

/// Orthogonalizes the columns `a` (each of length `len`). Returns the top `r`
/// normalized columns, their norms and the matching columns of the
/// accumulated rotation.
fn one_sided_jacobi(mut a: Vec<Vec<f64>>, len: usize, r: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let k = a.len();
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (len.max(k) as f64);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let (lo, hi) = a.split_at_mut(j);
                let (ai, aj) = (&mut lo[i], &mut hi[0]);
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for (x, y) in ai.iter().zip(aj.iter()) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || libm::fabs(gamma) <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = sign(zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(ai, aj, c, s);
                let (lo, hi) = v.split_at_mut(j);
                rotate(&mut lo[i], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // stable sort keeps lower indices first on ties
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(core::cmp::Ordering::Equal));
    order.truncate(r);

    let sigma_max = order.first().map_or(0.0, |&i| norms[i]);
    let zero_cut = sigma_max * f64::EPSILON * (len.max(k) as f64);
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut sigma = Vec::with_capacity(r);
    for &idx in &order {
        let s = norms[idx];
        if s > zero_cut && s > 0.0 {
            u.push(a[idx].iter().map(|x| x / s).collect());
            sigma.push(s);
        } else {
            u.push(vec![0.0; len]);
            sigma.push(0.0);
        }
    }
    orthonormalize_columns(&mut u, len);
    let vr = order.iter().map(|&i| v[i].clone()).collect();
    (u, sigma, vr)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}

/// Re-orthonormalizes columns in place with twice-applied modified
/// Gram-Schmidt. Columns that collapse (zero or dependent) are replaced by the
/// first canonical vector that is independent of the ones before it.
pub(crate) fn orthonormalize_columns(cols: &mut [Vec<f64>], len: usize) {
    let mut next_canonical = 0usize;
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        let original = norm(col);
        project_out(col, done);
        let mut nrm = norm(col);
        if original == 0.0 || nrm <= 1e-8 * original {
            loop {
                assert!(next_canonical < len, "cannot complete an orthonormal set");
                col.iter_mut().for_each(|x| *x = 0.0);
                col[next_canonical] = 1.0;
                next_canonical += 1;
                project_out(col, done);
                nrm = norm(col);
                if nrm > 1e-8 {
                    break;
                }
            }
        }
        col.iter_mut().for_each(|x| *x /= nrm);
    }
}

fn project_out(col: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let d = dot(q, col);
            col.iter_mut().zip(q).for_each(|(x, qi)| *x -= d * qi);
        }
    }
}
