//! Brute-force reference computations for tests.
//!
//! Everything here works on plain `Vec<Vec<f64>>` row lists and shares no
//! code with the `sensorplace` kernels it is used to check.

#![allow(clippy::needless_range_loop)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rows = Vec<Vec<f64>>;

/// Seeded standard-normal matrix.
pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Rows {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

pub fn transpose(a: &Rows) -> Rows {
    let (m, n) = (a.len(), a.first().map_or(0, Vec::len));
    (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let inner = b.len();
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            (0..n).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect()
        })
        .collect()
}

pub fn frobenius(a: &Rows) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sub(a: &Rows, b: &Rows) -> Rows {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect()
}

/// Cyclic two-sided Jacobi eigensolver for a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as columns of the second result.
pub fn sym_eigen(a: &Rows) -> (Vec<f64>, Rows) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|k| order.iter().map(|&i| v[k][i]).collect()).collect();
    (values, vectors)
}

/// Singular values as square roots of the eigenvalues of `mᵀm` (descending).
pub fn singular_values_gram(m: &Rows) -> Vec<f64> {
    let gram = matmul(&transpose(m), m);
    sym_eigen(&gram).0.into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

/// Best rank-`r` approximation `m V_r V_rᵀ` using the eigenvectors of `mᵀm`.
pub fn best_rank_approx(m: &Rows, r: usize) -> Rows {
    let gram = matmul(&transpose(m), m);
    let (_, vecs) = sym_eigen(&gram);
    let n = gram.len();
    let vr: Rows = (0..n).map(|i| vecs[i][..r].to_vec()).collect();
    matmul(&matmul(m, &vr), &transpose(&vr))
}

/// Norm of each column of `m` after projecting out the span of the
/// `selected` columns. Orthonormalizes the selected set with twice-applied
/// classical Gram-Schmidt.
pub fn residual_norms(m: &Rows, selected: &[usize]) -> Vec<f64> {
    let cols = transpose(m);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &s in selected {
        let mut v = cols[s].clone();
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= d * qi);
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-13 {
            basis.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    cols.iter()
        .map(|c| {
            let mut v = c.clone();
            for _ in 0..2 {
                for q in &basis {
                    let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q).for_each(|(x, qi)| *x -= d * qi);
                }
            }
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &Rows) -> f64 {
    let n = a.len();
    let mut a = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// `-log det(diag(S)^-2 + ΦᵀΦ/η²)` for the rows `basis[gamma]`, evaluated by
/// Gaussian elimination.
pub fn prior_log_det_objective(basis: &Rows, gamma: &[usize], prior_std: &[f64], noise: f64) -> f64 {
    let r = prior_std.len();
    let mut m: Rows = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        1.0 / (prior_std[i] * prior_std[i])
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    for &g in gamma {
        for i in 0..r {
            for j in 0..r {
                m[i][j] += basis[g][i] * basis[g][j] / (noise * noise);
            }
        }
    }
    -det(&m).ln()
}

/// `log det(ΦᵀΦ)` for `Φ = basis[gamma]`.
pub fn gram_log_det(basis: &Rows, gamma: &[usize]) -> f64 {
    let phi: Rows = gamma.iter().map(|&g| basis[g].clone()).collect();
    det(&matmul(&transpose(&phi), &phi)).ln()
}

/// Crossing-number point-in-polygon test (W. R. Franklin's PNPOLY).
/// Boundary handling is unspecified; callers avoid boundary points.
pub fn pnpoly(vertices: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = vertices[i];
        let (xj, yj) = vertices[j];
        if ((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi) {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// RMSE over every entry of every snapshot, written as a plain double loop.
pub fn rmse_naive(truth: &Rows, estimate: &Rows) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (t, e) in truth.iter().zip(estimate) {
        for (a, b) in t.iter().zip(e) {
            total += (a - b) * (a - b);
            count += 1;
        }
    }
    (total / count as f64).sqrt()
}

/// Every `k`-subset of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let (vals, _) = sym_eigen(&vec![vec![1.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(vals, vec![3.0, 1.0]);
    }

    #[test]
    fn eigen_reconstructs() {
        let b = gaussian(5, 5, 1);
        let a = matmul(&transpose(&b), &b);
        let (vals, vecs) = sym_eigen(&a);
        let d: Rows = (0..5)
            .map(|i| (0..5).map(|j| if i == j { vals[i] } else { 0.0 }).collect())
            .collect();
        let back = matmul(&matmul(&vecs, &d), &transpose(&vecs));
        assert!(frobenius(&sub(&back, &a)) < 1e-10 * frobenius(&a));
    }

    #[test]
    fn det_small() {
        assert!((det(&vec![vec![2.0, 1.0], vec![1.0, 3.0]]) - 5.0).abs() < 1e-14);
        assert_eq!(subsets(4, 2).len(), 6);
    }

    #[test]
    fn pnpoly_square() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!(pnpoly(&sq, 0.5, 0.5));
        assert!(!pnpoly(&sq, 1.5, 0.5));
    }
}
