use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::numerics::PivotTrace;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rank {rank} is out of range 1..={max}")]
    InvalidRank { rank: usize, max: usize },

    #[error("sensor count {count} is out of range (limit {limit})")]
    InvalidCount { count: usize, limit: usize },

    /// A hard constraint cannot be met. When the failure happens mid-run the
    /// pivots chosen so far are attached.
    #[error("constraint is infeasible: {reason}")]
    InfeasibleConstraint {
        reason: String,
        partial: Option<Box<PivotTrace>>,
    },

    #[error("matrix is not positive definite (nonpositive pivot at {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("custom basis is rank deficient")]
    RankDeficientBasis,

    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    #[error("point has {got} coordinates but the region needs {expected}")]
    InvalidPoint { expected: usize, got: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },

    #[error("expected {expected} measurements, got {got}")]
    InvalidMeasurement { expected: usize, got: usize },

    #[error("model has not been fitted")]
    NotFitted,

    /// A failure inside a sweep, tagged with the sensor count that caused it.
    #[error("at p = {p}: {source}")]
    AtSensorCount { p: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn infeasible(reason: impl Into<String>) -> Self {
        Error::InfeasibleConstraint {
            reason: reason.into(),
            partial: None,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Syntax error in a constraint expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    /// Human readable names of the tokens that would have been accepted.
    pub expected: Vec<&'static str>,
    /// What was actually found (`end of input` at EOF).
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: found {}, expected ",
            self.offset, self.found
        )?;
        for (i, e) in self.expected.iter().enumerate() {
            if i > 0 {
                f.write_str(if i + 1 == self.expected.len() { " or " } else { ", " })?;
            }
            f.write_str(e)?;
        }
        Ok(())
    }
}

impl core::error::Error for ParseError {}
