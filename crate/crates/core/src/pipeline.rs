//! Model facade: fit a basis, place sensors, then reconstruct, score and
//! quantify uncertainty through the fitted model.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::basis::{
    fit_custom, fit_identity, fit_random_projection, fit_svd, prior_from_singular_values, BasisModes, GaussianPrior,
    SnapshotMatrix, SvdOptions,
};
use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::optimizers::{ccqr_order, gqr_order, qr_order, tpgr_select, CostMap, SensorSelection};
use crate::reconstruct::{build_ls, build_rls, predict, score_rmse, Method, Reconstruction, ReconstructionMatrix};
use crate::uq::{
    one_pt_energy_landscape, two_pt_energy_landscape, uncertainty_heatmap, EnergyLandscape, UncertaintyMap,
};

/// Prior scale used for regularized reconstruction when none is given.
pub const DEFAULT_PRIOR_SCALE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub enum BasisConfig {
    Identity,
    Svd {
        r: usize,
        center: bool,
        randomized_seed: Option<u64>,
    },
    RandomProjection {
        r: usize,
        seed: u64,
    },
    Custom(Matrix),
}

impl BasisConfig {
    pub fn fit(&self, train: &SnapshotMatrix) -> Result<BasisModes> {
        match self {
            BasisConfig::Identity => Ok(fit_identity(train)),
            BasisConfig::Svd {
                r,
                center,
                randomized_seed,
            } => fit_svd(
                train,
                *r,
                &SvdOptions {
                    center: *center,
                    randomized_seed: *randomized_seed,
                },
            ),
            BasisConfig::RandomProjection { r, seed } => fit_random_projection(train.n_states(), *r, *seed),
            BasisConfig::Custom(modes) => {
                if modes.rows() != train.n_states() {
                    return Err(Error::invalid(alloc::format!(
                        "custom modes have {} rows but snapshots have {} states",
                        modes.rows(),
                        train.n_states()
                    )));
                }
                fit_custom(modes.clone())
            }
        }
    }
}

/// How the coefficient prior is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorConfig {
    /// `scale` for every mode.
    Flat {
        scale: f64,
    },
    /// Training singular values over `√N`; needs an SVD basis.
    Decreasing,
    Explicit(Vec<f64>),
}

impl PriorConfig {
    /// The prior for `basis`, fitted on `n_snapshots` training snapshots.
    pub fn resolve(&self, basis: &BasisModes, n_snapshots: usize, noise: f64) -> Result<GaussianPrior> {
        let prior = match self {
            PriorConfig::Flat { scale } => GaussianPrior::flat(basis.rank(), *scale, noise)?,
            PriorConfig::Decreasing => {
                let sv = basis
                    .singular_values()
                    .ok_or_else(|| Error::DegeneratePrior("a decreasing prior needs a basis fitted by SVD".into()))?;
                prior_from_singular_values(sv, n_snapshots, noise)?
            }
            PriorConfig::Explicit(s) => GaussianPrior::new(s.clone(), noise)?,
        };
        prior.check_rank(basis.rank())?;
        Ok(prior)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptimizerConfig {
    Qr,
    Ccqr {
        costs: CostMap,
    },
    Gqr {
        spec: ConstraintSpec,
        predetermined: Option<Vec<usize>>,
    },
    Tpgr {
        prior: PriorConfig,
        noise: f64,
    },
}

impl OptimizerConfig {
    fn is_qr_family(&self) -> bool {
        !matches!(self, OptimizerConfig::Tpgr { .. })
    }

    /// Selection of `p` sensors plus the longest ordering the optimizer can
    /// rank (`steps` pivots for the QR family, `p` for TPGR).
    fn run(&self, basis: &BasisModes, n_snapshots: usize, p: usize, steps: usize) -> Result<SensorSelection> {
        let n = basis.n_states();
        if p == 0 || p > n {
            return Err(Error::InvalidCount { count: p, limit: n });
        }
        let steps = steps.clamp(p, n);
        match self {
            OptimizerConfig::Qr => qr_order(basis, steps),
            OptimizerConfig::Ccqr { costs } => ccqr_order(basis, steps, costs),
            OptimizerConfig::Gqr { spec, predetermined } => gqr_order(basis, p, steps, spec, predetermined.as_deref()),
            OptimizerConfig::Tpgr { prior, noise } => {
                let prior = prior.resolve(basis, n_snapshots, *noise)?;
                tpgr_select(basis, p, &prior)
            }
        }
    }
}

/// Non-fatal conditions a caller may want to surface.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// More sensors than the basis can rank; the tail was picked from round-off.
    UnrankedSensors { ranked: usize, requested: usize },
    /// Regularized reconstruction fell back to the flat default prior.
    DefaultPrior { scale: f64 },
    /// Least squares on fewer independent sensor rows than modes.
    RankDeficientLeastSquares { sensors: usize, rank: usize },
}

impl core::fmt::Display for Warning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Warning::UnrankedSensors { ranked, requested } => write!(
                f,
                "only {ranked} of {requested} sensors are ranked by the basis; the rest were chosen from round-off"
            ),
            Warning::DefaultPrior { scale } => {
                write!(
                    f,
                    "no prior given for regularized reconstruction; using a flat prior of {scale}"
                )
            }
            Warning::RankDeficientLeastSquares { sensors, rank } => write!(
                f,
                "least squares with {sensors} sensors cannot determine {rank} modes; using the minimum-norm solution"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsporModel {
    basis: BasisConfig,
    optimizer: OptimizerConfig,
    n_sensors: usize,
    fitted: Option<FittedModel>,
}

impl SsporModel {
    pub fn new(basis: BasisConfig, optimizer: OptimizerConfig, n_sensors: usize) -> Self {
        SsporModel {
            basis,
            optimizer,
            n_sensors,
            fitted: None,
        }
    }

    pub fn basis_config(&self) -> &BasisConfig {
        &self.basis
    }

    pub fn optimizer_config(&self) -> &OptimizerConfig {
        &self.optimizer
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    /// Fits the basis and places the sensors, replacing any earlier fit. A
    /// failed fit leaves the model unfitted.
    pub fn fit(&mut self, train: &SnapshotMatrix) -> Result<&FittedModel> {
        self.fitted = None;
        let basis = self.basis.fit(train)?;
        let n = basis.n_states();
        let all = self.optimizer.run(&basis, train.n_snapshots(), self.n_sensors, n)?;
        let selected = all.prefix(self.n_sensors);
        let mut warnings = Vec::new();
        if !selected.is_fully_ranked() {
            warnings.push(Warning::UnrankedSensors {
                ranked: selected.ranked(),
                requested: selected.len(),
            });
        }
        Ok(self.fitted.insert(FittedModel {
            basis,
            n_snapshots: train.n_snapshots(),
            all,
            selected,
            warnings,
        }))
    }

    pub fn fitted(&self) -> Result<&FittedModel> {
        self.fitted.as_ref().ok_or(Error::NotFitted)
    }

    pub fn get_all_sensors(&self) -> Result<&SensorSelection> {
        Ok(self.fitted()?.all_sensors())
    }

    pub fn get_selected_sensors(&self) -> Result<&SensorSelection> {
        Ok(self.fitted()?.selected_sensors())
    }
}

/// A basis together with the sensors placed on it.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel {
    basis: BasisModes,
    n_snapshots: usize,
    all: SensorSelection,
    selected: SensorSelection,
    warnings: Vec<Warning>,
}

impl FittedModel {
    pub fn basis(&self) -> &BasisModes {
        &self.basis
    }

    /// Training snapshot count, needed to scale a decreasing prior.
    pub fn n_snapshots(&self) -> usize {
        self.n_snapshots
    }

    /// Full pivot order for the QR family, the `p` greedy picks for TPGR.
    pub fn all_sensors(&self) -> &SensorSelection {
        &self.all
    }

    pub fn selected_sensors(&self) -> &SensorSelection {
        &self.selected
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn prior(&self, config: &PriorConfig, noise: f64) -> Result<GaussianPrior> {
        config.resolve(&self.basis, self.n_snapshots, noise)
    }

    /// Reconstruction matrix for the selected sensors. Regularized
    /// reconstruction without a prior uses a flat prior of
    /// [`DEFAULT_PRIOR_SCALE`] and the given noise, and says so.
    pub fn reconstruction_matrix(
        &self,
        method: Method,
        prior: Option<&GaussianPrior>,
        noise: f64,
    ) -> Result<(ReconstructionMatrix, Vec<Warning>)> {
        let mut warnings = Vec::new();
        let rm = match method {
            Method::Ls => {
                let rm = build_ls(&self.basis, &self.selected)?;
                let rank = crate::numerics::svd_truncated(
                    &self.basis.modes().select_rows(self.selected.indices()),
                    self.selected.len().min(self.basis.rank()),
                )?
                .singular_values;
                let smax = rank.first().copied().unwrap_or(0.0);
                let rank = rank
                    .iter()
                    .filter(|&&s| s > crate::numerics::DEFAULT_RCOND * smax)
                    .count();
                if rank < self.basis.rank() {
                    warnings.push(Warning::RankDeficientLeastSquares {
                        sensors: self.selected.len(),
                        rank: self.basis.rank(),
                    });
                }
                rm
            }
            Method::Rls => {
                let default;
                let prior = match prior {
                    Some(p) => p,
                    None => {
                        default = GaussianPrior::flat(self.basis.rank(), DEFAULT_PRIOR_SCALE, noise)?;
                        warnings.push(Warning::DefaultPrior {
                            scale: DEFAULT_PRIOR_SCALE,
                        });
                        &default
                    }
                };
                build_rls(&self.basis, &self.selected, prior)?
            }
        };
        Ok((rm, warnings))
    }

    pub fn predict(&self, rm: &ReconstructionMatrix, y: &[f64]) -> Result<Reconstruction> {
        self.check_matrix(rm)?;
        predict(rm, &self.basis, y)
    }

    /// RMSE on an explicit test set.
    pub fn score(&self, rm: &ReconstructionMatrix, test: &SnapshotMatrix) -> Result<f64> {
        self.check_matrix(rm)?;
        score_rmse(&self.basis, rm, test)
    }

    pub fn std(&self, rm: &ReconstructionMatrix, noise: f64) -> Result<UncertaintyMap> {
        self.check_matrix(rm)?;
        uncertainty_heatmap(&self.basis, rm, noise)
    }

    pub fn one_pt_energy_landscape(&self, prior: &GaussianPrior) -> Result<EnergyLandscape> {
        one_pt_energy_landscape(&self.basis, prior)
    }

    /// Two-point landscape against `reference`, or the selected sensors.
    pub fn two_pt_energy_landscape(
        &self,
        prior: &GaussianPrior,
        reference: Option<&SensorSelection>,
    ) -> Result<EnergyLandscape> {
        two_pt_energy_landscape(&self.basis, prior, reference.unwrap_or(&self.selected))
    }

    fn check_matrix(&self, rm: &ReconstructionMatrix) -> Result<()> {
        if rm.sensors() != self.selected.indices() {
            return Err(Error::invalid("reconstruction matrix was built for different sensors"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmsePoint {
    pub p: usize,
    pub rmse_ls: f64,
    pub rmse_rls: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RmseCurve {
    pub points: Vec<RmsePoint>,
}

/// Measurement noise injected into the test readings of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseInjection {
    /// Noise standard deviation.
    pub eta: f64,
    /// Seed of the noise generator, independent of any basis seed.
    pub seed: u64,
}

/// Test RMSE of LS and RLS reconstruction for each sensor count.
///
/// The basis is fitted once. Greedy optimizers nest, so QR, CCQR and TPGR
/// place sensors once for the largest `p`; GQR constraints depend on `p` and
/// are rerun per point. The QR family is limited to `p <= r`. Noise for
/// count `p` comes from its own stream of the seeded generator, so a point's
/// value does not depend on which other counts are in the sweep.
pub fn rmse_curve(
    template: &SsporModel,
    train: &SnapshotMatrix,
    test: &SnapshotMatrix,
    p_values: &[usize],
    prior: &PriorConfig,
    noise: Option<NoiseInjection>,
) -> Result<RmseCurve> {
    if p_values.is_empty() {
        return Err(Error::invalid("sweep needs at least one sensor count"));
    }
    if p_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sensor counts must be strictly increasing"));
    }
    if test.n_states() != train.n_states() {
        return Err(Error::InvalidMeasurement {
            expected: train.n_states(),
            got: test.n_states(),
        });
    }
    let normal = match noise {
        Some(NoiseInjection { eta, .. }) => {
            Some(Normal::new(0.0, eta).map_err(|_| Error::invalid(alloc::format!("noise level {eta} is invalid")))?)
        }
        None => None,
    };

    let basis = template.basis.fit(train)?;
    let r = basis.rank();
    let optimizer = &template.optimizer;
    let at = |p: usize| move |e: Error| Error::AtSensorCount { p, source: Box::new(e) };

    let p_max = *p_values.last().expect("nonempty");
    let nested = match optimizer {
        OptimizerConfig::Gqr { .. } => None,
        _ => Some(
            optimizer
                .run(&basis, train.n_snapshots(), p_max, p_max)
                .map_err(at(p_max))?,
        ),
    };

    let mut points = Vec::with_capacity(p_values.len());
    for &p in p_values {
        if optimizer.is_qr_family() && p > r {
            return Err(at(p)(Error::InvalidCount { count: p, limit: r }));
        }
        let selection = match &nested {
            Some(all) => all.prefix(p),
            None => optimizer.run(&basis, train.n_snapshots(), p, p).map_err(at(p))?,
        };
        let gaussian = prior
            .resolve(&basis, train.n_snapshots(), noise.map_or(1.0, |n| n.eta))
            .map_err(at(p))?;
        let ls = build_ls(&basis, &selection).map_err(at(p))?;
        let rls = build_rls(&basis, &selection, &gaussian).map_err(at(p))?;

        let mut rng = noise.map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
            rng.set_stream(p as u64);
            rng
        });
        let (mut sum_ls, mut sum_rls) = (0.0, 0.0);
        let mut y = alloc::vec![0.0; p];
        for k in 0..test.n_snapshots() {
            let x = test.snapshot(k);
            for (v, &i) in y.iter_mut().zip(selection.indices()) {
                *v = x[i];
                if let (Some(rng), Some(normal)) = (rng.as_mut(), normal.as_ref()) {
                    *v += normal.sample(rng);
                }
            }
            let err = |rm: &ReconstructionMatrix| -> Result<f64> {
                let est = predict(rm, &basis, &y)?;
                Ok(est.state.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum())
            };
            sum_ls += err(&ls).map_err(at(p))?;
            sum_rls += err(&rls).map_err(at(p))?;
        }
        let count = (test.n_snapshots() * test.n_states()) as f64;
        points.push(RmsePoint {
            p,
            rmse_ls: libm::sqrt(sum_ls / count),
            rmse_rls: libm::sqrt(sum_rls / count),
        });
    }
    Ok(RmseCurve { points })
}
