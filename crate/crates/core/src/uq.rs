//! Noise-induced reconstruction uncertainty and energy landscapes.

use alloc::vec::Vec;

use crate::basis::{BasisModes, GaussianPrior};
use crate::error::{Error, Result};
use crate::matrix::norm;
use crate::optimizers::{EnergyModel, SensorSelection};
use crate::reconstruct::ReconstructionMatrix;

/// Per-location standard deviation of the reconstruction error, in field units.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyMap {
    pub sigma: Vec<f64>,
}

/// `σ_i = η ‖(Ψ A)_{i,·}‖` for i.i.d. sensor noise of standard deviation `η`.
///
/// This is the square root of the diagonal of the error covariance
/// `Ψ A (η² I) Aᵀ Ψᵀ`, formed one row at a time so the `n × n` covariance
/// never exists.
pub fn uncertainty_heatmap(basis: &BasisModes, rm: &ReconstructionMatrix, eta: f64) -> Result<UncertaintyMap> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(alloc::format!("noise level {eta} must be positive")));
    }
    let a = rm.a_matrix();
    if a.rows() != basis.rank() {
        return Err(Error::invalid("reconstruction matrix does not match the basis rank"));
    }
    let p = a.cols();
    let mut row = alloc::vec![0.0; p];
    let sigma = (0..basis.n_states())
        .map(|i| {
            row.iter_mut().for_each(|v| *v = 0.0);
            for (k, &psi) in basis.row(i).iter().enumerate() {
                if psi != 0.0 {
                    row.iter_mut().zip(a.row(k)).for_each(|(v, akj)| *v += psi * akj);
                }
            }
            eta * norm(&row)
        })
        .collect();
    Ok(UncertaintyMap { sigma })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyKind {
    OnePoint,
    TwoPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyLandscape {
    pub values: Vec<f64>,
    pub kind: EnergyKind,
    pub reference_sensors: Option<SensorSelection>,
}

/// One-point energy `h_i = -log(1 + ‖S β_i‖² / η²)` at every location.
pub fn one_pt_energy_landscape(basis: &BasisModes, prior: &GaussianPrior) -> Result<EnergyLandscape> {
    let model = EnergyModel::new(basis, prior)?;
    Ok(EnergyLandscape {
        values: model.h().to_vec(),
        kind: EnergyKind::OnePoint,
        reference_sensors: None,
    })
}

/// Summed pair interaction with the reference sensors at every location.
/// A reference sensor's own entry omits its self-interaction.
pub fn two_pt_energy_landscape(
    basis: &BasisModes,
    prior: &GaussianPrior,
    reference: &SensorSelection,
) -> Result<EnergyLandscape> {
    if reference.is_empty() {
        return Err(Error::invalid(
            "two-point landscape needs at least one reference sensor",
        ));
    }
    SensorSelection::new(reference.indices().to_vec(), basis.n_states())?;
    let model = EnergyModel::new(basis, prior)?;
    Ok(EnergyLandscape {
        values: model.accumulated(reference.indices()),
        kind: EnergyKind::TwoPoint,
        reference_sensors: Some(reference.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::fit_custom;
    use crate::matrix::Matrix;
    use crate::reconstruct::build_ls;
    use alloc::vec;

    #[test]
    fn two_pixel_hand_case() {
        let b = fit_custom(Matrix::from_rows(&[[1.0], [2.0]]).unwrap()).unwrap();
        let rm = build_ls(&b, &SensorSelection::new(vec![0], 2).unwrap()).unwrap();
        let s = uncertainty_heatmap(&b, &rm, 0.1).unwrap().sigma;
        assert!((s[0] - 0.1).abs() < 1e-15 && (s[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_row_has_zero_energy() {
        let b = fit_custom(Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]).unwrap()).unwrap();
        let prior = GaussianPrior::flat(2, 1.0, 1.0).unwrap();
        let h = one_pt_energy_landscape(&b, &prior).unwrap().values;
        assert_eq!(h[1], 0.0);
        assert!((h[0] + libm::log(2.0)).abs() < 1e-15);
    }

    #[test]
    fn self_term_excluded() {
        let b = fit_custom(Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap()).unwrap();
        let prior = GaussianPrior::flat(2, 1.0, 1.0).unwrap();
        let l = two_pt_energy_landscape(&b, &prior, &SensorSelection::new(vec![0], 3).unwrap()).unwrap();
        assert_eq!(l.values[0], 0.0);
        assert_eq!(l.values[1], 0.0);
        assert!(l.values[2] > 0.0);
        let empty = SensorSelection::new(vec![], 3).unwrap();
        assert!(two_pt_energy_landscape(&b, &prior, &empty).is_err());
    }
}
