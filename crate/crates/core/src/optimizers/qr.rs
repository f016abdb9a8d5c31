use alloc::vec::Vec;

use super::{CostMap, SensorSelection};
use crate::basis::BasisModes;
use crate::error::{Error, Result};
use crate::numerics::{qr_pivot_greedy, NormModifier, PivotTrace};

/// Step norms below this fraction of the first one mark an exhausted basis.
const RANK_TOL: f64 = 1e-12;

pub(crate) fn check_count(basis: &BasisModes, p: usize) -> Result<()> {
    let n = basis.n_states();
    if p == 0 || p > n {
        return Err(Error::InvalidCount { count: p, limit: n });
    }
    Ok(())
}

/// Runs the pivoting kernel on `Ψᵀ` for `steps` pivots.
pub(crate) fn pivot_basis(
    basis: &BasisModes,
    steps: usize,
    modifier: Option<&mut NormModifier<'_>>,
) -> Result<PivotTrace> {
    qr_pivot_greedy(&basis.modes().transpose(), steps, modifier)
}

/// Wraps a trace, marking pivots past the numerical rank of the basis.
pub(crate) fn selection_from_trace(basis: &BasisModes, trace: PivotTrace) -> SensorSelection {
    let first = trace.step_norms.first().copied().unwrap_or(0.0);
    let ranked = trace
        .step_norms
        .iter()
        .take(basis.rank())
        .take_while(|&&s| s > RANK_TOL * first)
        .count();
    SensorSelection::from_parts(trace.pivots, ranked, trace.step_norms)
}

/// First `p` pivots of QR on `Ψᵀ`. Pivots beyond the basis rank are kept but
/// reported as unranked.
pub fn qr_select(basis: &BasisModes, p: usize) -> Result<SensorSelection> {
    check_count(basis, p)?;
    qr_order(basis, p)
}

/// QR pivot order of the given length (up to the full `n`).
pub(crate) fn qr_order(basis: &BasisModes, steps: usize) -> Result<SensorSelection> {
    Ok(selection_from_trace(basis, pivot_basis(basis, steps, None)?))
}

/// QR with the pivot criterion `residual norm - cost`.
pub fn ccqr_select(basis: &BasisModes, p: usize, costs: &CostMap) -> Result<SensorSelection> {
    check_count(basis, p)?;
    ccqr_order(basis, p, costs)
}

pub(crate) fn ccqr_order(basis: &BasisModes, steps: usize, costs: &CostMap) -> Result<SensorSelection> {
    if costs.len() != basis.n_states() {
        return Err(Error::invalid(alloc::format!(
            "cost map has {} entries for {} states",
            costs.len(),
            basis.n_states()
        )));
    }
    let cost: Vec<f64> = costs.as_slice().to_vec();
    let mut subtract_cost = |_: usize, _: &[f64], _: &[usize], criterion: &mut [f64]| {
        criterion.iter_mut().zip(&cost).for_each(|(c, k)| *c -= k);
    };
    let trace = pivot_basis(basis, steps, Some(&mut subtract_cost))?;
    Ok(selection_from_trace(basis, trace))
}
