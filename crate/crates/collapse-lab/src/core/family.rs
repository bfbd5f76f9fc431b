//! The family contract implemented by every density family in the crate.

use super::dataset::{Dataset, Sample};
use super::param::{CoordTransform, FamilyId, ParamPoint};
use super::stream::RandomStream;
use thiserror::Error;

/// Parameter-domain violations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("{family}: parameter out of domain: {detail}")]
    OutOfDomain { family: FamilyId, detail: String },
    #[error("parameter point of family {got} handed to {expected}")]
    FamilyMismatch { expected: FamilyId, got: FamilyId },
    #[error("{family}: expected {expected} coordinates, got {got}")]
    CoordCount {
        family: FamilyId,
        expected: usize,
        got: usize,
    },
}

/// Maximum-likelihood fitting failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MleError {
    #[error("cannot fit an empty dataset")]
    EmptyDataset,
    #[error("sample {value} lies outside the family support")]
    OutOfSupport { value: f64 },
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
}

/// A parametric density family: validation, evaluation, sampling, exact
/// fitting, and the divergences used as collapse metrics.
///
/// All methods are pure given their arguments; sampling draws only from the
/// passed stream, so implementations are freely shareable across threads.
pub trait Family: Send + Sync {
    fn id(&self) -> FamilyId;

    /// Checks that `theta` belongs to this family's parameter domain.
    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError>;

    /// Log density at `x`; `-inf` off the support.
    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64;

    /// Appends `n` i.i.d. draws from the density at `theta` to `out`.
    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    );

    /// `n` i.i.d. draws from the density at `theta`.
    fn sample(&self, theta: &ParamPoint, stream: &mut RandomStream, n: usize) -> Vec<Sample> {
        let mut out = Vec::with_capacity(n);
        self.sample_into(theta, stream, n, &mut out);
        out
    }

    /// Closed-form (or breakpoint-enumeration) maximum-likelihood estimate
    /// over the pooled dataset.
    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError>;

    /// Negative mean log-likelihood objective over `values`, as a closure
    /// suitable for derivative-free minimization.
    ///
    /// The default sums `log_pdf` sample by sample; families override it to
    /// hoist sufficient statistics out of the evaluation loop. Either form
    /// computes the same function of `theta`.
    fn nll_objective<'a>(&'a self, values: &'a [f64]) -> Box<dyn Fn(&ParamPoint) -> f64 + 'a> {
        Box::new(move |theta| {
            let total: f64 = values.iter().map(|&x| self.log_pdf(theta, x)).sum();
            -total / values.len() as f64
        })
    }

    /// Search-space transforms for the numeric fitting path, or `None` for
    /// families whose likelihood is not smooth in the parameters.
    fn coord_transforms(&self) -> Option<&'static [CoordTransform]>;

    /// Distance between two parameter points, when meaningful.
    fn param_error(&self, a: &ParamPoint, b: &ParamPoint) -> Option<f64> {
        Some(a.euclidean(b))
    }

    /// Total variation distance between the densities at `a` and `b`.
    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64;

    /// `KL(a || b)`; `+inf` when the support of `a` is not covered by `b`.
    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64;
}
