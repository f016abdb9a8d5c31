//! Bases fitted to training snapshots, and the coefficient priors derived
//! from them.
//!
//! Snapshots are stored one per row (`N x n`). A basis is an `n x r` mode
//! matrix `Ψ` so that a state is approximated as `x ≈ mean + Ψ a`; the mean
//! is only present when centering was requested.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{orthonormalize_columns, svd_truncated};

/// Training data: `N` snapshots of an `n`-dimensional state, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotMatrix {
    data: Matrix,
}

impl SnapshotMatrix {
    pub fn new(data: Matrix) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::invalid(
                "snapshot matrix needs at least one snapshot and one state",
            ));
        }
        if !data.is_finite() {
            return Err(Error::invalid("snapshot matrix has non-finite entries"));
        }
        Ok(SnapshotMatrix { data })
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.rows()
    }

    pub fn n_states(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn snapshot(&self, k: usize) -> &[f64] {
        self.data.row(k)
    }

    /// Per-state mean over snapshots.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.n_snapshots() as f64;
        (0..self.n_states())
            .map(|j| (0..self.n_snapshots()).map(|k| self.data[(k, j)]).sum::<f64>() / n)
            .collect()
    }

    /// Copy with `mean` subtracted from every snapshot.
    pub fn centered(&self, mean: &[f64]) -> SnapshotMatrix {
        let data = Matrix::from_fn(self.n_snapshots(), self.n_states(), |k, j| self.data[(k, j)] - mean[j]);
        SnapshotMatrix { data }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Identity,
    Svd,
    RandomProjection,
    Custom,
}

/// Fitted `n x r` mode matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisModes {
    modes: Matrix,
    kind: BasisKind,
    singular_values: Option<Vec<f64>>,
    mean: Option<Vec<f64>>,
}

impl BasisModes {
    pub fn modes(&self) -> &Matrix {
        &self.modes
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n_states(&self) -> usize {
        self.modes.rows()
    }

    pub fn rank(&self) -> usize {
        self.modes.cols()
    }

    /// Present only for SVD bases.
    pub fn singular_values(&self) -> Option<&[f64]> {
        self.singular_values.as_deref()
    }

    /// Snapshot mean removed before fitting, if centering was enabled.
    pub fn mean(&self) -> Option<&[f64]> {
        self.mean.as_deref()
    }

    /// Mode coefficients of state `i`, i.e. row `i` of `Ψ`.
    pub fn row(&self, i: usize) -> &[f64] {
        self.modes.row(i)
    }
}

/// Diagonal Gaussian prior on the mode coefficients plus the sensor noise
/// level. Both are standard deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPrior {
    prior_std: Vec<f64>,
    noise: f64,
}

impl GaussianPrior {
    pub fn new(prior_std: Vec<f64>, noise: f64) -> Result<Self> {
        if prior_std.is_empty() {
            return Err(Error::DegeneratePrior("prior has no entries".into()));
        }
        if let Some((k, s)) = prior_std
            .iter()
            .enumerate()
            .find(|(_, s)| !(**s > 0.0 && s.is_finite()))
        {
            return Err(Error::DegeneratePrior(format!(
                "prior std {s} at mode {k} is not positive"
            )));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::DegeneratePrior(format!("noise {noise} is not positive")));
        }
        Ok(GaussianPrior { prior_std, noise })
    }

    /// Isotropic prior `scale · I`.
    pub fn flat(r: usize, scale: f64, noise: f64) -> Result<Self> {
        GaussianPrior::new(alloc::vec![scale; r], noise)
    }

    pub fn prior_std(&self) -> &[f64] {
        &self.prior_std
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn rank(&self) -> usize {
        self.prior_std.len()
    }

    /// Same prior with a different noise level.
    pub fn with_noise(&self, noise: f64) -> Result<Self> {
        GaussianPrior::new(self.prior_std.clone(), noise)
    }

    pub(crate) fn check_rank(&self, r: usize) -> Result<()> {
        if self.rank() != r {
            return Err(Error::DegeneratePrior(format!(
                "prior has {} entries but the basis has {r} modes",
                self.rank()
            )));
        }
        Ok(())
    }
}

/// The identity basis: every state is its own mode.
pub fn fit_identity(x: &SnapshotMatrix) -> BasisModes {
    BasisModes {
        modes: Matrix::identity(x.n_states()),
        kind: BasisKind::Identity,
        singular_values: None,
        mean: None,
    }
}

/// Options for [`fit_svd`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SvdOptions {
    /// Subtract the snapshot mean before the decomposition.
    pub center: bool,
    /// Use a seeded randomized range finder instead of the exact SVD.
    pub randomized_seed: Option<u64>,
}

const RANDOMIZED_OVERSAMPLE: usize = 10;
const RANDOMIZED_POWER_ITERS: usize = 2;

/// Top-`r` right singular vectors of the `N x n` snapshot matrix.
pub fn fit_svd(x: &SnapshotMatrix, r: usize, options: &SvdOptions) -> Result<BasisModes> {
    let max = x.n_snapshots().min(x.n_states());
    if r == 0 || r > max {
        return Err(Error::InvalidRank { rank: r, max });
    }
    let mean = options.center.then(|| x.mean());
    let centered;
    let data = match &mean {
        Some(m) => {
            centered = x.centered(m);
            &centered
        }
        None => x,
    };
    let (modes, singular_values) = match options.randomized_seed {
        None => {
            let svd = svd_truncated(data.data(), r)?;
            (svd.right, svd.singular_values)
        }
        Some(seed) => randomized_right_modes(data.data(), r, seed)?,
    };
    Ok(BasisModes {
        modes,
        kind: BasisKind::Svd,
        singular_values: Some(singular_values),
        mean,
    })
}

/// Randomized range finder with power iterations, followed by an exact SVD
/// of the small projected matrix.
fn randomized_right_modes(x: &Matrix, r: usize, seed: u64) -> Result<(Matrix, Vec<f64>)> {
    let (rows, cols) = x.shape();
    let k = (r + RANDOMIZED_OVERSAMPLE).min(rows.min(cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Matrix::from_fn(cols, k, |_, _| StandardNormal.sample(&mut rng));
    let orth = |m: Matrix| {
        let mut c = m.columns();
        orthonormalize_columns(&mut c, m.rows());
        Matrix::from_columns(m.rows(), &c)
    };
    let mut q = orth(x.matmul(&omega));
    for _ in 0..RANDOMIZED_POWER_ITERS {
        let z = orth(x.t_matmul(&q));
        q = orth(x.matmul(&z));
    }
    let small = q.t_matmul(x);
    let svd = svd_truncated(&small, r)?;
    Ok((svd.right, svd.singular_values))
}

/// `n x r` matrix of i.i.d. standard normal draws scaled by `1/√r`.
pub fn fit_random_projection(n: usize, r: usize, seed: u64) -> Result<BasisModes> {
    if r == 0 || r > n {
        return Err(Error::InvalidRank { rank: r, max: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / libm::sqrt(r as f64);
    let modes = Matrix::from_fn(n, r, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * scale
    });
    Ok(BasisModes {
        modes,
        kind: BasisKind::RandomProjection,
        singular_values: None,
        mean: None,
    })
}

const CUSTOM_RCOND: f64 = 1e-10;

/// User-supplied modes, stored verbatim (no orthonormalization).
pub fn fit_custom(modes: Matrix) -> Result<BasisModes> {
    let (n, r) = modes.shape();
    if r == 0 || r > n {
        return Err(Error::InvalidRank { rank: r, max: n });
    }
    if !modes.is_finite() {
        return Err(Error::invalid("custom modes have non-finite entries"));
    }
    let sv = svd_truncated(&modes, r)?.singular_values;
    let smax = sv[0];
    if smax == 0.0 || sv[r - 1] <= CUSTOM_RCOND * smax {
        return Err(Error::RankDeficientBasis);
    }
    Ok(BasisModes {
        modes,
        kind: BasisKind::Custom,
        singular_values: None,
        mean: None,
    })
}

/// Prior std `S_k = σ_k / √N` from the top-`r` singular values of the data.
pub fn decreasing_prior(x: &SnapshotMatrix, r: usize, noise: f64) -> Result<GaussianPrior> {
    let max = x.n_snapshots().min(x.n_states());
    if r == 0 || r > max {
        return Err(Error::InvalidRank { rank: r, max });
    }
    let sv = svd_truncated(x.data(), r)?.singular_values;
    prior_from_singular_values(&sv, x.n_snapshots(), noise)
}

/// Decreasing prior from already computed singular values.
pub fn prior_from_singular_values(sv: &[f64], n_snapshots: usize, noise: f64) -> Result<GaussianPrior> {
    if let Some(k) = sv.iter().position(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::DegeneratePrior(format!("singular value {k} is zero")));
    }
    let root_n = libm::sqrt(n_snapshots as f64);
    GaussianPrior::new(sv.iter().map(|s| s / root_n).collect(), noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn snapshots(rows: &[&[f64]]) -> SnapshotMatrix {
        SnapshotMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn identity_basis() {
        let x = snapshots(&[&[1.0, 2.0, 3.0]]);
        let b = fit_identity(&x);
        assert_eq!(b.modes(), &Matrix::identity(3));
        let one = fit_identity(&snapshots(&[&[5.0]]));
        assert_eq!(one.modes().as_slice(), &[1.0]);
    }

    #[test]
    fn rank_one_data() {
        // four identical rows equal to a unit vector
        let v = [0.0, 0.6, 0.0, 0.8];
        let x = snapshots(&[&v, &v, &v, &v]);
        let b = fit_svd(&x, 1, &SvdOptions::default()).unwrap();
        assert!((b.singular_values().unwrap()[0] - 2.0).abs() < 1e-14);
        let mode = b.modes().column(0);
        let sign = mode[1].signum();
        for (m, e) in mode.iter().zip(&v) {
            assert!((m * sign - e).abs() < 1e-14);
        }
        let prior = decreasing_prior(&x, 1, 0.1).unwrap();
        assert!((prior.prior_std()[0] - 1.0).abs() < 1e-14);
        assert_eq!(prior.noise(), 0.1);
    }

    #[test]
    fn identity_data_gives_unit_singular_values() {
        let x = SnapshotMatrix::new(Matrix::identity(4)).unwrap();
        let b = fit_svd(&x, 4, &SvdOptions::default()).unwrap();
        assert!(b.singular_values().unwrap().iter().all(|s| (s - 1.0).abs() < 1e-14));
        // a signed permutation: every column has exactly one ±1
        for j in 0..4 {
            let c = b.modes().column(j);
            assert_eq!(c.iter().filter(|v| (libm::fabs(**v) - 1.0).abs() < 1e-12).count(), 1);
        }
    }

    #[test]
    fn zero_singular_value_is_degenerate_prior() {
        let v = [1.0, 0.0];
        let x = snapshots(&[&v, &v]);
        assert!(matches!(decreasing_prior(&x, 2, 1.0), Err(Error::DegeneratePrior(_))));
    }

    #[test]
    fn custom_rejects_duplicate_columns() {
        let m = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [0.0, 0.0]]).unwrap();
        assert_eq!(fit_custom(m), Err(Error::RankDeficientBasis));
        let ok = fit_custom(Matrix::identity(3)).unwrap();
        assert_eq!(ok.kind(), BasisKind::Custom);
    }

    #[test]
    fn random_projection_is_seeded() {
        let a = fit_random_projection(20, 5, 7).unwrap();
        let b = fit_random_projection(20, 5, 7).unwrap();
        let c = fit_random_projection(20, 5, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(matches!(fit_random_projection(3, 4, 0), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn prior_validation() {
        assert!(GaussianPrior::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(GaussianPrior::new(vec![1.0], 0.0).is_err());
        let flat = GaussianPrior::flat(100, 1000.0, 1.0).unwrap();
        assert_eq!(flat.rank(), 100);
        assert!(flat.prior_std().iter().all(|&s| s == 1000.0));
    }

    #[test]
    fn centering_stores_mean() {
        let x = snapshots(&[&[1.0, 2.0], &[3.0, 2.0], &[2.0, 5.0]]);
        let b = fit_svd(
            &x,
            1,
            &SvdOptions {
                center: true,
                randomized_seed: None,
            },
        )
        .unwrap();
        assert_eq!(b.mean().unwrap(), &[2.0, 3.0]);
    }
}
