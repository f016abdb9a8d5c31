use alloc::format;
use alloc::vec::Vec;

use super::qr::{check_count, pivot_basis, selection_from_trace};
use super::SensorSelection;
use crate::basis::BasisModes;
use crate::constraints::{ConstraintMode, ConstraintSpec, GridGeometry};
use crate::error::{Error, Result};

/// Constraint-aware QR.
///
/// Pivoting is capped at the basis rank: past it the residual is round-off
/// and the constraint bookkeeping would only be steering noise.
pub fn gqr_select(
    basis: &BasisModes,
    p: usize,
    spec: &ConstraintSpec,
    predetermined: Option<&[usize]>,
) -> Result<SensorSelection> {
    let plan = Plan::new(basis, p, spec, predetermined)?;
    let trace = pivot_basis(basis, p, Some(&mut plan.modifier()))?;
    plan.validate(&trace.pivots)?;
    Ok(selection_from_trace(basis, trace))
}

/// Constrained picks for the first `p` steps, then plain pivoting until
/// `steps` pivots exist.
pub(crate) fn gqr_order(
    basis: &BasisModes,
    p: usize,
    steps: usize,
    spec: &ConstraintSpec,
    predetermined: Option<&[usize]>,
) -> Result<SensorSelection> {
    let plan = Plan::new(basis, p, spec, predetermined)?;
    let mut constrained = plan.modifier();
    let mut modifier = |step: usize, norms: &[f64], selected: &[usize], criterion: &mut [f64]| {
        if step < p {
            constrained(step, norms, selected, criterion);
        }
    };
    let trace = pivot_basis(basis, steps.max(p), Some(&mut modifier))?;
    plan.validate(&trace.pivots[..p])?;
    Ok(selection_from_trace(basis, trace))
}

struct Plan<'a> {
    p: usize,
    n: usize,
    in_region: Vec<bool>,
    mode: ConstraintMode,
    forced: Vec<usize>,
    geometry: Option<&'a GridGeometry>,
}

impl<'a> Plan<'a> {
    fn new(basis: &BasisModes, p: usize, spec: &'a ConstraintSpec, predetermined: Option<&[usize]>) -> Result<Self> {
        check_count(basis, p)?;
        let n = basis.n_states();
        let r = basis.rank();
        if p > r {
            return Err(Error::InvalidCount { count: p, limit: r });
        }

        let mut in_region = alloc::vec![false; n];
        for &i in &spec.idx_constrained {
            if i >= n {
                return Err(Error::invalid(format!("constrained index {i} is out of range 0..{n}")));
            }
            in_region[i] = true;
        }
        let n_in = in_region.iter().filter(|&&b| b).count();
        let n_out = n - n_in;

        let mut forced = Vec::new();
        let mut geometry = None;
        match spec.mode {
            ConstraintMode::MaxN { s } => {
                if n_out + s.min(n_in) < p {
                    return Err(Error::infeasible(format!(
                        "only {} admissible locations for {p} sensors with at most {s} in the region",
                        n_out + s.min(n_in)
                    )));
                }
            }
            ConstraintMode::ExactN { s } => {
                if s > p {
                    return Err(Error::infeasible(format!(
                        "{s} sensors in the region exceed the total of {p}"
                    )));
                }
                if n_in < s {
                    return Err(Error::infeasible(format!(
                        "region has {n_in} locations, fewer than {s}"
                    )));
                }
                if n_out < p - s {
                    return Err(Error::infeasible(format!(
                        "{n_out} locations outside the region cannot hold {} sensors",
                        p - s
                    )));
                }
            }
            ConstraintMode::Predetermined { s } => {
                let list = predetermined.unwrap_or(&spec.idx_constrained);
                if list.len() != s {
                    return Err(Error::infeasible(format!(
                        "{s} predetermined sensors requested but {} given",
                        list.len()
                    )));
                }
                if s > p {
                    return Err(Error::infeasible(format!(
                        "{s} predetermined sensors exceed the total of {p}"
                    )));
                }
                SensorSelection::new(list.to_vec(), n)?;
                forced = list.to_vec();
            }
            ConstraintMode::Distance { d } => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::invalid(format!(
                        "minimum distance {d} must be finite and nonnegative"
                    )));
                }
                let g = spec
                    .geometry
                    .as_ref()
                    .ok_or_else(|| Error::invalid("distance constraint needs a geometry"))?;
                g.check_states(n)?;
                geometry = Some(g);
            }
        }

        Ok(Plan {
            p,
            n,
            in_region,
            mode: spec.mode.clone(),
            forced,
            geometry,
        })
    }

    fn modifier(&self) -> impl FnMut(usize, &[f64], &[usize], &mut [f64]) + '_ {
        let mut blocked = alloc::vec![false; self.n];
        let mut seen = 0;
        move |step, _norms, selected, criterion| match self.mode {
            ConstraintMode::MaxN { s } | ConstraintMode::ExactN { s } => {
                let placed = selected.iter().filter(|&&i| self.in_region[i]).count();
                if placed >= s {
                    for (c, _) in criterion.iter_mut().zip(&self.in_region).filter(|(_, &r)| r) {
                        *c = 0.0;
                    }
                }
                if matches!(self.mode, ConstraintMode::ExactN { .. }) && self.p - step <= s.saturating_sub(placed) {
                    for (c, _) in criterion.iter_mut().zip(&self.in_region).filter(|(_, &r)| !r) {
                        *c = 0.0;
                    }
                }
            }
            ConstraintMode::Predetermined { .. } => {
                if let Some(&i) = self.forced.get(step) {
                    criterion[i] = f64::INFINITY;
                }
            }
            ConstraintMode::Distance { d } => {
                let g = self.geometry.expect("checked in Plan::new");
                for &i in &selected[seen..] {
                    let pi = g.point(i);
                    for (j, b) in blocked.iter_mut().enumerate() {
                        if !*b && pi.distance(&g.point(j)) < d {
                            *b = true;
                        }
                    }
                }
                seen = selected.len();
                for (c, _) in criterion.iter_mut().zip(&blocked).filter(|(_, &b)| b) {
                    *c = 0.0;
                }
            }
        }
    }

    /// Mode postconditions, checked on the constrained picks.
    fn validate(&self, picks: &[usize]) -> Result<()> {
        let placed = picks.iter().filter(|&&i| self.in_region[i]).count();
        match self.mode {
            ConstraintMode::MaxN { s } if placed > s => Err(Error::infeasible(format!(
                "{placed} sensors landed in the region, more than {s}"
            ))),
            ConstraintMode::ExactN { s } if placed != s => Err(Error::infeasible(format!(
                "{placed} sensors landed in the region instead of {s}"
            ))),
            ConstraintMode::Predetermined { .. } if picks[..self.forced.len()] != self.forced[..] => {
                Err(Error::infeasible("predetermined sensors were not placed first"))
            }
            ConstraintMode::Distance { d } => {
                let g = self.geometry.expect("checked in Plan::new");
                for (k, &i) in picks.iter().enumerate() {
                    for &j in &picks[..k] {
                        if g.distance(i, j) < d {
                            return Err(Error::infeasible(format!("sensors {j} and {i} are closer than {d}")));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
