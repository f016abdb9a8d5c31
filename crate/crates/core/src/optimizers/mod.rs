//! Sensor selection.
//!
//! The QR family (QR, CCQR, GQR) runs greedy column-pivoted QR on `Ψᵀ`, whose
//! columns are the candidate locations; the variants differ only in how the
//! pivot criterion is modified. TPGR greedily minimizes a two-point
//! expansion of the prior-regularized log-determinant.

mod gqr;
mod qr;
mod tpgr;

use alloc::vec::Vec;

pub use gqr::gqr_select;
pub use qr::{ccqr_select, qr_select};
pub use tpgr::{exact_objective, tpgr_select};

pub(crate) use gqr::gqr_order;
pub(crate) use qr::{ccqr_order, qr_order};
pub(crate) use tpgr::EnergyModel;

use crate::error::{Error, Result};

/// Ordered, duplicate-free list of selected state indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorSelection {
    indices: Vec<usize>,
    ranked: usize,
    step_scores: Vec<f64>,
}

impl SensorSelection {
    /// Validates uniqueness and bounds against `n` states. All entries are
    /// considered ranked.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = alloc::vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::invalid(alloc::format!(
                    "sensor index {i} is out of range 0..{n}"
                )));
            }
            if seen[i] {
                return Err(Error::invalid(alloc::format!("sensor index {i} appears twice")));
            }
            seen[i] = true;
        }
        let ranked = indices.len();
        let step_scores = alloc::vec![f64::NAN; ranked];
        Ok(SensorSelection {
            indices,
            ranked,
            step_scores,
        })
    }

    pub(crate) fn from_parts(indices: Vec<usize>, ranked: usize, step_scores: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), step_scores.len());
        let ranked = ranked.min(indices.len());
        SensorSelection {
            indices,
            ranked,
            step_scores,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Leading entries that carry a meaningful rank. For QR beyond the basis
    /// rank the remaining pivots are picked from round-off and are unranked.
    pub fn ranked(&self) -> usize {
        self.ranked
    }

    pub fn is_fully_ranked(&self) -> bool {
        self.ranked == self.indices.len()
    }

    /// Per-step selection score: the residual norm for the QR family, the
    /// energy increment for TPGR. `NaN` when built from a plain list.
    pub fn step_scores(&self) -> &[f64] {
        &self.step_scores
    }

    /// First `p` entries.
    pub fn prefix(&self, p: usize) -> SensorSelection {
        let p = p.min(self.len());
        SensorSelection {
            indices: self.indices[..p].to_vec(),
            ranked: self.ranked.min(p),
            step_scores: self.step_scores[..p].to_vec(),
        }
    }
}

/// Nonnegative per-location placement cost, in residual-norm units.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMap {
    cost: Vec<f64>,
}

impl CostMap {
    pub fn new(cost: Vec<f64>) -> Result<Self> {
        if let Some(c) = cost.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::invalid(alloc::format!(
                "cost {c} is not a finite nonnegative value"
            )));
        }
        Ok(CostMap { cost })
    }

    pub fn zeros(n: usize) -> Self {
        CostMap {
            cost: alloc::vec![0.0; n],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cost
    }

    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }
}
