//! Sparse sensor placement for linear field reconstruction.
//!
//! Given snapshots of a high-dimensional field, this crate fits a low-rank
//! basis, selects a small set of measurement locations, reconstructs the full
//! field from noisy point measurements and reports how measurement noise
//! propagates into the reconstruction.
//!
//! The pieces, bottom-up:
//!
//! * [`numerics`]: dense kernels (Jacobi SVD, greedy column-pivoted QR with a
//!   norm-modifier hook, Cholesky solve, pseudoinverse).
//! * [`basis`]: identity, truncated SVD, random projection and custom bases,
//!   plus the data-driven "decreasing" prior.
//! * [`constraints`]: constraint regions (built-in shapes and an expression
//!   language) over image grids and point clouds.
//! * [`optimizers`]: QR, cost-weighted CCQR, constrained GQR and the
//!   two-point greedy TPGR selector.
//! * [`reconstruct`]: least-squares and regularized least-squares
//!   reconstruction matrices, prediction and RMSE scoring.
//! * [`uq`]: uncertainty heatmaps and one-/two-point energy landscapes.
//! * [`pipeline`]: the model facade tying everything together, and RMSE
//!   sweeps over the number of sensors.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod constraints;
mod error;
mod matrix;
pub mod numerics;
pub mod optimizers;
pub mod pipeline;
pub mod reconstruct;
pub mod synthetic;
pub mod uq;

pub use basis::{BasisKind, BasisModes, GaussianPrior, SnapshotMatrix};
pub use constraints::{ConstraintMode, ConstraintRegion, ConstraintSpec, GridGeometry, Loc, Point, Shape};
pub use error::{Error, ParseError, Result};
pub use matrix::Matrix;
pub use numerics::{PivotTrace, SvdResult};
pub use optimizers::{CostMap, SensorSelection};
pub use pipeline::{BasisConfig, FittedModel, OptimizerConfig, PriorConfig, RmseCurve, RmsePoint, SsporModel, Warning};
pub use reconstruct::{Method, Reconstruction, ReconstructionMatrix};
pub use uq::{EnergyKind, EnergyLandscape, UncertaintyMap};
