//! Monte-Carlo audits of the score and information identities.
//!
//! For a regular family, the score has mean zero under the model, and the
//! mean of the negated log-density Hessian equals the Fisher information.
//! Each audit draws samples from the checked parameter point, forms the
//! per-entry Monte-Carlo mean, and passes when every entry sits within four
//! standard errors of its target (plus a tiny absolute slack, see
//! [`ABSOLUTE_SLACK`]).

use super::smooth::SmoothFamily;
use crate::core::{
    CoordTransform, Dataset, Family, FamilyError, FamilyId, MleError, ParamPoint, RandomStream,
    Sample,
};
use thiserror::Error;

/// Minimum draw count for a meaningful audit.
pub const MIN_AUDIT_DRAWS: usize = 1_000;

/// Absolute slack added to the four-standard-error acceptance band.
///
/// The Hessian entries of the one-parameter families do not depend on the
/// sample, so their Monte-Carlo scatter is exactly zero and the standard
/// error cannot absorb the rounding drift of a long summation; the slack
/// covers that drift without affecting any statistically meaningful gap.
pub const ABSOLUTE_SLACK: f64 = 1e-9;

/// Audit invocation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error(transparent)]
    InvalidParams(#[from] FamilyError),
    #[error("audit needs at least {MIN_AUDIT_DRAWS} draws, got {got}")]
    TooFewDraws { got: usize },
}

/// One audited scalar: a score coordinate or an information-matrix entry.
#[derive(Debug, Clone)]
pub struct AuditEntry {
    pub label: String,
    pub estimate: f64,
    pub target: f64,
    pub std_error: f64,
    pub pass: bool,
}

/// Outcome of one Monte-Carlo audit.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub family: FamilyId,
    pub theta: Vec<f64>,
    pub draws: usize,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

fn acceptance_band(target: f64, std_error: f64) -> f64 {
    4.0 * std_error + ABSOLUTE_SLACK * target.abs().max(1.0)
}

fn entry(label: String, sum: f64, sum_sq: f64, m: usize, target: f64) -> AuditEntry {
    let m = m as f64;
    let estimate = sum / m;
    let variance = (sum_sq / m - estimate * estimate).max(0.0);
    let std_error = (variance / m).sqrt();
    let pass = (estimate - target).abs() <= acceptance_band(target, std_error);
    AuditEntry {
        label,
        estimate,
        target,
        std_error,
        pass,
    }
}

fn check_draw_count(m: usize) -> Result<(), AuditError> {
    if m < MIN_AUDIT_DRAWS {
        return Err(AuditError::TooFewDraws { got: m });
    }
    Ok(())
}

/// Checks that the score averages to zero over `m` draws from the model.
pub fn audit_score_mean(
    family: &dyn SmoothFamily,
    theta: &ParamPoint,
    m: usize,
    stream: &mut RandomStream,
) -> Result<AuditReport, AuditError> {
    family.validate(theta)?;
    check_draw_count(m)?;
    let k = family.param_count();
    let mut sums = vec![0.0; k];
    let mut sums_sq = vec![0.0; k];
    let mut score = vec![0.0; k];
    for sample in family.sample(theta, stream, m) {
        family.score(theta, sample.value(), &mut score);
        for i in 0..k {
            sums[i] += score[i];
            sums_sq[i] += score[i] * score[i];
        }
    }
    let entries = (0..k)
        .map(|i| entry(format!("score[{i}]"), sums[i], sums_sq[i], m, 0.0))
        .collect();
    Ok(AuditReport {
        family: family.id(),
        theta: theta.coords().to_vec(),
        draws: m,
        entries,
    })
}

/// Checks that the mean negated log-density Hessian over `m` draws matches
/// the closed-form Fisher information, entry by entry.
pub fn audit_fisher_hessian(
    family: &dyn SmoothFamily,
    theta: &ParamPoint,
    m: usize,
    stream: &mut RandomStream,
) -> Result<AuditReport, AuditError> {
    family.validate(theta)?;
    check_draw_count(m)?;
    let k = family.param_count();
    let info = family.fisher_info(theta);
    let mut sums = vec![0.0; k * k];
    let mut sums_sq = vec![0.0; k * k];
    let mut hessian = vec![0.0; k * k];
    for sample in family.sample(theta, stream, m) {
        family.log_pdf_hessian(theta, sample.value(), &mut hessian);
        for (i, h) in hessian.iter().enumerate() {
            sums[i] += -h;
            sums_sq[i] += h * h;
        }
    }
    let entries = (0..k * k)
        .map(|i| {
            let (row, col) = (i / k, i % k);
            entry(
                format!("-hessian[{row}][{col}]"),
                sums[i],
                sums_sq[i],
                m,
                info[i],
            )
        })
        .collect();
    Ok(AuditReport {
        family: family.id(),
        theta: theta.coords().to_vec(),
        draws: m,
        entries,
    })
}

/// Wrapper that scales the reported Fisher information of an inner family.
///
/// Negative control for [`audit_fisher_hessian`]: with a scale away from 1
/// the audit must fail, demonstrating that it can detect a wrong
/// information matrix. Everything else delegates unchanged.
#[derive(Debug, Clone, Copy)]
pub struct ScaledFisherInfo<F> {
    pub inner: F,
    pub scale: f64,
}

impl<F: SmoothFamily> Family for ScaledFisherInfo<F> {
    fn id(&self) -> FamilyId {
        self.inner.id()
    }

    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError> {
        self.inner.validate(theta)
    }

    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64 {
        self.inner.log_pdf(theta, x)
    }

    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    ) {
        self.inner.sample_into(theta, stream, n, out)
    }

    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError> {
        self.inner.exact_mle(data)
    }

    fn coord_transforms(&self) -> Option<&'static [CoordTransform]> {
        self.inner.coord_transforms()
    }

    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        self.inner.tv(a, b)
    }

    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        self.inner.kl(a, b)
    }
}

impl<F: SmoothFamily> SmoothFamily for ScaledFisherInfo<F> {
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    fn score(&self, theta: &ParamPoint, x: f64, out: &mut [f64]) {
        self.inner.score(theta, x, out)
    }

    fn log_pdf_hessian(&self, theta: &ParamPoint, x: f64, out: &mut [f64]) {
        self.inner.log_pdf_hessian(theta, x, out)
    }

    fn fisher_info(&self, theta: &ParamPoint) -> Vec<f64> {
        self.inner
            .fisher_info(theta)
            .iter()
            .map(|v| v * self.scale)
            .collect()
    }

    fn integration_plan(
        &self,
        thetas: &[&ParamPoint],
        tail_budget: f64,
    ) -> super::smooth::IntegrationPlan {
        self.inner.integration_plan(thetas, tail_budget)
    }
}
