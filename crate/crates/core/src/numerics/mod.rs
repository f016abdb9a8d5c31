//! Dense linear-algebra kernels.

mod cholesky;
mod pinv;
mod qr;
mod svd;

pub use cholesky::{spd_log_det, spd_solve};
pub use pinv::{pseudoinverse, DEFAULT_RCOND};
pub use qr::{qr_pivot_greedy, NormModifier, PivotTrace};
pub use svd::{svd_truncated, SvdResult};

pub(crate) use svd::orthonormalize_columns;
