use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Pivot order and the residual norm each pivot had when it was chosen.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PivotTrace {
    pub pivots: Vec<usize>,
    /// Unmodified residual norm of the chosen column at selection time.
    pub step_norms: Vec<f64>,
}

/// Hook that rewrites the pivot criterion before each selection.
///
/// Arguments: step index, current residual norms of every column, columns
/// selected so far, and the criterion buffer (pre-filled with the residual
/// norms) to rewrite in place. Entries for already-selected columns are
/// ignored. Setting an entry to `f64::INFINITY` forces that column.
pub type NormModifier<'a> = dyn FnMut(usize, &[f64], &[usize], &mut [f64]) + 'a;

/// A downdated norm this far below its last recomputed value is recomputed
/// from the residual column.
const RECOMPUTE_RATIO: f64 = 1e-6;

/// Greedy column-pivoted QR.
///
/// Each step picks the unselected column with the largest (modified)
/// residual norm, lowest index on ties, then removes that column's residual
/// direction from every remaining column. Without a modifier this is plain
/// Businger-Golub pivoting and never fails; once the columns are exhausted
/// the zero-norm ties resolve to the lowest remaining index.
///
/// With a modifier, a step where every remaining criterion is zero while
/// some residual is not is reported as [`Error::InfeasibleConstraint`] with
/// the partial trace attached.
pub fn qr_pivot_greedy(m: &Matrix, p: usize, mut modifier: Option<&mut NormModifier<'_>>) -> Result<PivotTrace> {
    let (rows, cols) = m.shape();
    if p == 0 || p > cols {
        return Err(Error::InvalidCount { count: p, limit: cols });
    }
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }

    // column-major residuals
    let mut residual: Vec<Vec<f64>> = m.columns();
    let mut norm2: Vec<f64> = residual.iter().map(|c| dot(c, c)).collect();
    let mut reference2 = norm2.clone();
    let mut selected = Vec::with_capacity(p);
    let mut is_selected = alloc::vec![false; cols];
    let mut step_norms = Vec::with_capacity(p);
    let mut norms = alloc::vec![0.0; cols];
    let mut criterion = alloc::vec![0.0; cols];

    for step in 0..p {
        for (n, &n2) in norms.iter_mut().zip(&norm2) {
            *n = libm::sqrt(n2.max(0.0));
        }
        criterion.copy_from_slice(&norms);
        if let Some(modify) = modifier.as_deref_mut() {
            modify(step, &norms, &selected, &mut criterion);
        }

        let mut best: Option<usize> = None;
        for j in (0..cols).filter(|&j| !is_selected[j]) {
            if best.is_none_or(|b| criterion[j] > criterion[b]) {
                best = Some(j);
            }
        }
        let best = best.expect("p <= cols leaves a candidate");

        if modifier.is_some() {
            let all_zero = (0..cols).filter(|&j| !is_selected[j]).all(|j| criterion[j] == 0.0);
            let some_residual = (0..cols).filter(|&j| !is_selected[j]).any(|j| norms[j] > 0.0);
            if all_zero && some_residual {
                return Err(Error::InfeasibleConstraint {
                    reason: alloc::format!("no admissible candidate remains at step {step}"),
                    partial: Some(Box::new(PivotTrace {
                        pivots: selected,
                        step_norms,
                    })),
                });
            }
        }

        let chosen_norm = norms[best];
        selected.push(best);
        is_selected[best] = true;
        step_norms.push(chosen_norm);
        if chosen_norm == 0.0 || rows == 0 {
            continue;
        }

        let q: Vec<f64> = residual[best].iter().map(|x| x / chosen_norm).collect();
        for j in 0..cols {
            if is_selected[j] {
                continue;
            }
            let col = &mut residual[j];
            let d = dot(&q, col);
            if d != 0.0 {
                col.iter_mut().zip(&q).for_each(|(x, qi)| *x -= d * qi);
                norm2[j] -= d * d;
            }
            if norm2[j] <= RECOMPUTE_RATIO * RECOMPUTE_RATIO * reference2[j] {
                norm2[j] = dot(col, col);
                reference2[j] = norm2[j];
            }
        }
    }

    Ok(PivotTrace {
        pivots: selected,
        step_norms,
    })
}
