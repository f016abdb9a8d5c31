use alloc::vec::Vec;

use super::qr::check_count;
use super::SensorSelection;
use crate::basis::{BasisModes, GaussianPrior};
use crate::error::Result;
use crate::matrix::dot;
use crate::numerics::spd_log_det;

/// Prior-whitened sensor rows `v_i = S ⊙ β_i / η` and their one-point energies.
pub(crate) struct EnergyModel {
    v: Vec<Vec<f64>>,
    a: Vec<f64>,
    h: Vec<f64>,
}

impl EnergyModel {
    pub(crate) fn new(basis: &BasisModes, prior: &GaussianPrior) -> Result<Self> {
        prior.check_rank(basis.rank())?;
        let s = prior.prior_std();
        let eta = prior.noise();
        let v: Vec<Vec<f64>> = (0..basis.n_states())
            .map(|i| basis.row(i).iter().zip(s).map(|(b, sk)| sk * b / eta).collect())
            .collect();
        let a: Vec<f64> = v.iter().map(|vi| dot(vi, vi)).collect();
        let h = a.iter().map(|&ai| -libm::log1p(ai)).collect();
        Ok(EnergyModel { v, a, h })
    }

    pub(crate) fn n(&self) -> usize {
        self.h.len()
    }

    /// One-point energies `h_i = -log(1 + ‖v_i‖²)`.
    pub(crate) fn h(&self) -> &[f64] {
        &self.h
    }

    /// Pair term `J(i, j) = -log(1 - (v_i·v_j)² / ((1 + a_i)(1 + a_j)))`.
    ///
    /// Nonnegative: it is the information lost to redundancy between the two
    /// sensors, zero exactly when their rows are orthogonal.
    pub(crate) fn pair(&self, i: usize, j: usize) -> f64 {
        let c = dot(&self.v[i], &self.v[j]);
        let x = c * c / ((1.0 + self.a[i]) * (1.0 + self.a[j]));
        -libm::log1p(-x)
    }

    /// `Σ_{j ∈ refs, j ≠ i} J(i, j)` for every location.
    pub(crate) fn accumulated(&self, refs: &[usize]) -> Vec<f64> {
        let mut acc = alloc::vec![0.0; self.n()];
        for &j in refs {
            for (i, a) in acc.iter_mut().enumerate() {
                if i != j {
                    *a += self.pair(i, j);
                }
            }
        }
        acc
    }
}

/// Two-point greedy selection: each step adds the location minimizing
/// `h_i + Σ_{j placed} J(i, j)`, lowest index on ties.
///
/// The step score is that minimized energy increment.
pub fn tpgr_select(basis: &BasisModes, p: usize, prior: &GaussianPrior) -> Result<SensorSelection> {
    check_count(basis, p)?;
    let model = EnergyModel::new(basis, prior)?;
    let n = model.n();
    let mut acc = alloc::vec![0.0; n];
    let mut taken = alloc::vec![false; n];
    let mut picks = Vec::with_capacity(p);
    let mut scores = Vec::with_capacity(p);

    for _ in 0..p {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !taken[i]) {
            let e = model.h[i] + acc[i];
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((i, e));
            }
        }
        let (k, e) = best.expect("p <= n leaves a candidate");
        taken[k] = true;
        picks.push(k);
        scores.push(e);
        for i in (0..n).filter(|&i| !taken[i]) {
            acc[i] += model.pair(i, k);
        }
    }
    Ok(SensorSelection::from_parts(picks, p, scores))
}

/// `-log det(S⁻² + ΦᵀΦ/η²)` with `Φ` the basis rows at `gamma`, by direct
/// Cholesky evaluation. The empty selection gives `2 Σ log S_k`.
pub fn exact_objective(basis: &BasisModes, gamma: &SensorSelection, prior: &GaussianPrior) -> Result<f64> {
    prior.check_rank(basis.rank())?;
    SensorSelection::new(gamma.indices().to_vec(), basis.n_states())?;
    let r = basis.rank();
    let phi = basis.modes().select_rows(gamma.indices());
    let eta2 = prior.noise() * prior.noise();
    let mut m = phi.t_matmul(&phi).scaled(1.0 / eta2);
    for (k, s) in prior.prior_std().iter().enumerate() {
        m[(k, k)] += 1.0 / (s * s);
    }
    debug_assert_eq!(m.shape(), (r, r));
    Ok(-spd_log_det(&m)?)
}
