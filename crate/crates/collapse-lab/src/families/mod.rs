//! Smooth benchmark families with closed-form fits and divergences.
//!
//! Three scalar-observation families live here: a two-parameter Gaussian,
//! a one-parameter Exponential, and a one-parameter power family on the
//! unit interval. Each implements the [`Family`](crate::core::Family)
//! contract plus [`SmoothFamily`] for analytic derivatives, and the module
//! adds numeric total-variation distances, quadrature oracles, and
//! Monte-Carlo audits of the score and information identities.

mod audit;
mod exponential;
mod gaussian;
mod power_beta;
pub mod quadrature;
mod smooth;

pub use audit::{
    audit_fisher_hessian, audit_score_mean, AuditEntry, AuditError, AuditReport, ScaledFisherInfo,
    ABSOLUTE_SLACK, MIN_AUDIT_DRAWS,
};
pub use exponential::Exponential;
pub use gaussian::Gaussian;
pub use power_beta::PowerBeta;
pub use smooth::{
    density_mass, kl_numeric, tv_numeric, IntegrationPlan, SmoothFamily, DEFAULT_TV_TOL,
};
