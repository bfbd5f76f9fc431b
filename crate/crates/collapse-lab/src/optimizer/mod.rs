//! Derivative-free minimization and the numeric maximum-likelihood path.
//!
//! Two minimizers cover the smooth families: golden-section search for one
//! free parameter and Nelder-Mead simplex descent for two. [`numeric_mle`]
//! wires either one to a family's negative mean log-likelihood through a
//! log-reparameterization of positive coordinates, and serves as the
//! independent oracle against the closed-form estimators.

mod golden;
mod nelder_mead;
mod numeric_fit;

use crate::core::FamilyId;
use thiserror::Error;

pub use golden::minimize_scalar;
pub use nelder_mead::{minimize_simplex, SimplexOutcome};
pub use numeric_fit::{numeric_mle, Bounds, SCALAR_TOL, SIMPLEX_MAX_ITER, SIMPLEX_TOL};

/// Failures of the minimizers and the numeric fitting path.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("objective returned a non-finite value: {value}")]
    NonFiniteObjective { value: f64 },
    #[error("invalid bracket: need lo < hi, got [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTol(f64),
    #[error("invalid bound pair: need lower < upper, got ({lower}, {upper})")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("invalid initial point: {0}")]
    InvalidInit(String),
    #[error("cannot fit an empty dataset")]
    EmptyData,
    #[error("{family} has no smooth search parameterization; use the exact fit")]
    NoSearchParameterization { family: FamilyId },
}
