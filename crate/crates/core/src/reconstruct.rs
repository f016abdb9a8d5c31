//! Full-state reconstruction from sparse measurements.
//!
//! Both estimators are linear maps `â = A y` from the `p` sensor readings to
//! the `r` mode coefficients, with `x̂ = Ψ â`. When the basis was fitted on
//! centered data, the stored mean is subtracted from the readings and added
//! back to the state.

use alloc::vec::Vec;

use crate::basis::{BasisModes, GaussianPrior, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{pseudoinverse, spd_solve, DEFAULT_RCOND};
use crate::optimizers::SensorSelection;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Pseudoinverse least squares.
    Ls,
    /// Least squares regularized by a Gaussian prior on the coefficients.
    Rls,
}

/// The `r × p` map from readings to coefficients, tied to its sensors.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionMatrix {
    a_matrix: Matrix,
    method: Method,
    prior: Option<GaussianPrior>,
    sensors: Vec<usize>,
}

impl ReconstructionMatrix {
    pub fn a_matrix(&self) -> &Matrix {
        &self.a_matrix
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn prior(&self) -> Option<&GaussianPrior> {
        self.prior.as_ref()
    }

    pub fn sensors(&self) -> &[usize] {
        &self.sensors
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub coefficients: Vec<f64>,
    pub state: Vec<f64>,
}

fn sensor_rows(basis: &BasisModes, gamma: &SensorSelection) -> Result<Matrix> {
    SensorSelection::new(gamma.indices().to_vec(), basis.n_states())?;
    Ok(basis.modes().select_rows(gamma.indices()))
}

/// `A = (𝕊Ψ)⁺`.
pub fn build_ls(basis: &BasisModes, gamma: &SensorSelection) -> Result<ReconstructionMatrix> {
    if gamma.is_empty() {
        return Err(Error::invalid("least squares needs at least one sensor"));
    }
    let phi = sensor_rows(basis, gamma)?;
    Ok(ReconstructionMatrix {
        a_matrix: pseudoinverse(&phi, DEFAULT_RCOND)?,
        method: Method::Ls,
        prior: None,
        sensors: gamma.indices().to_vec(),
    })
}

/// `A = (S⁻² + ΦᵀΦ/η²)⁻¹ Φᵀ/η²` with `Φ = 𝕊Ψ`. Defined for any number of
/// sensors, including none.
pub fn build_rls(basis: &BasisModes, gamma: &SensorSelection, prior: &GaussianPrior) -> Result<ReconstructionMatrix> {
    prior.check_rank(basis.rank())?;
    let phi = sensor_rows(basis, gamma)?;
    let inv_eta2 = 1.0 / (prior.noise() * prior.noise());
    let mut m = phi.t_matmul(&phi).scaled(inv_eta2);
    for (k, s) in prior.prior_std().iter().enumerate() {
        m[(k, k)] += 1.0 / (s * s);
    }
    let a_matrix = spd_solve(&m, &phi.transpose().scaled(inv_eta2))?;
    Ok(ReconstructionMatrix {
        a_matrix,
        method: Method::Rls,
        prior: Some(prior.clone()),
        sensors: gamma.indices().to_vec(),
    })
}

/// Estimates coefficients and the full state from readings at the sensors.
pub fn predict(rm: &ReconstructionMatrix, basis: &BasisModes, y: &[f64]) -> Result<Reconstruction> {
    let p = rm.sensors.len();
    if y.len() != p {
        return Err(Error::InvalidMeasurement {
            expected: p,
            got: y.len(),
        });
    }
    if rm.a_matrix.rows() != basis.rank() {
        return Err(Error::invalid("reconstruction matrix does not match the basis rank"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("measurements must be finite"));
    }
    let centered: Vec<f64> = match basis.mean() {
        Some(mean) => y.iter().zip(&rm.sensors).map(|(v, &i)| v - mean[i]).collect(),
        None => y.to_vec(),
    };
    let coefficients = rm.a_matrix.matvec(&centered);
    let mut state = basis.modes().matvec(&coefficients);
    if let Some(mean) = basis.mean() {
        state.iter_mut().zip(mean).for_each(|(x, m)| *x += m);
    }
    Ok(Reconstruction { coefficients, state })
}

/// Root mean square error over every entry of every test snapshot, with
/// each snapshot measured exactly at the sensors.
pub fn score_rmse(basis: &BasisModes, rm: &ReconstructionMatrix, test: &SnapshotMatrix) -> Result<f64> {
    if test.n_states() != basis.n_states() {
        return Err(Error::InvalidMeasurement {
            expected: basis.n_states(),
            got: test.n_states(),
        });
    }
    let mut sum = 0.0;
    for k in 0..test.n_snapshots() {
        let x = test.snapshot(k);
        let y: Vec<f64> = rm.sensors.iter().map(|&i| x[i]).collect();
        let est = predict(rm, basis, &y)?;
        sum += est.state.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(libm::sqrt(sum / (test.n_snapshots() * test.n_states()) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::fit_custom;
    use alloc::vec;

    fn sel(i: &[usize], n: usize) -> SensorSelection {
        SensorSelection::new(i.to_vec(), n).unwrap()
    }

    #[test]
    fn identity_ls() {
        let b = fit_custom(Matrix::identity(2)).unwrap();
        let rm = build_ls(&b, &sel(&[0, 1], 2)).unwrap();
        assert_eq!(rm.a_matrix(), &Matrix::identity(2));
        assert_eq!(predict(&rm, &b, &[1.0, 2.0]).unwrap().state, vec![1.0, 2.0]);
    }

    #[test]
    fn scalar_rls() {
        let b = fit_custom(Matrix::from_rows(&[[1.0]]).unwrap()).unwrap();
        let rm = build_rls(&b, &sel(&[0], 1), &GaussianPrior::new(vec![0.7], 0.7).unwrap()).unwrap();
        assert!((rm.a_matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        let rm = build_ls(
            &fit_custom(Matrix::from_rows(&[[2.0]]).unwrap()).unwrap(),
            &sel(&[0], 1),
        )
        .unwrap();
        assert!((rm.a_matrix()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rls_without_sensors_returns_prior_mean() {
        let b = fit_custom(Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap()).unwrap();
        let rm = build_rls(&b, &sel(&[], 3), &GaussianPrior::flat(2, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(rm.a_matrix().shape(), (2, 0));
        let out = predict(&rm, &b, &[]).unwrap();
        assert_eq!(out.state, vec![0.0; 3]);
        assert!(build_ls(&b, &sel(&[], 3)).is_err());
    }

    #[test]
    fn measurement_length_checked() {
        let b = fit_custom(Matrix::identity(2)).unwrap();
        let rm = build_ls(&b, &sel(&[0, 1], 2)).unwrap();
        assert_eq!(
            predict(&rm, &b, &[1.0]),
            Err(Error::InvalidMeasurement { expected: 2, got: 1 })
        );
    }

    #[test]
    fn zero_test_scores_zero() {
        let b = fit_custom(Matrix::identity(3)).unwrap();
        let rm = build_ls(&b, &sel(&[2, 0, 1], 3)).unwrap();
        let test = SnapshotMatrix::new(Matrix::zeros(4, 3)).unwrap();
        assert_eq!(score_rmse(&b, &rm, &test).unwrap(), 0.0);
    }
}
