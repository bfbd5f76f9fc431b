//! Shared derivative interface for the smooth families, plus the numeric
//! total-variation distance built on it.
//!
//! Beyond the base [`Family`] contract, the Monte-Carlo audits need the
//! analytic score and Hessian of the log-density and the closed-form Fisher
//! information, and the numeric metrics need to know where essentially all
//! of each density's mass lives. Both concerns live in [`SmoothFamily`].

use super::quadrature::adaptive_simpson;
use crate::core::{Family, ParamPoint};

/// Absolute tolerance used when the generic [`Family::tv`] entry point for
/// a smooth family falls back to quadrature.
pub const DEFAULT_TV_TOL: f64 = 1e-9;

/// Integration window for a set of densities from one family.
///
/// `lo`/`hi` bound the integration variable. With `log_substitution` the
/// variable is `u = log x` and integrands carry the `e^u` Jacobian, which
/// removes the `x -> 0` boundary singularity of power-law densities with
/// shape below one.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationPlan {
    pub lo: f64,
    pub hi: f64,
    pub log_substitution: bool,
}

/// Analytic derivative information for a smooth family with scalar
/// observations.
///
/// Matrix outputs are row-major with side length [`param_count`]
/// (`param_count`): the Gaussian fills 4 entries, the one-parameter
/// families fill 1.
///
/// [`param_count`]: SmoothFamily::param_count
pub trait SmoothFamily: Family {
    /// Number of free parameters.
    fn param_count(&self) -> usize;

    /// Writes the gradient of the log-density in the parameters into `out`
    /// (length [`param_count`](SmoothFamily::param_count)).
    fn score(&self, theta: &ParamPoint, x: f64, out: &mut [f64]);

    /// Writes the symmetric Hessian of the log-density in the parameters
    /// into `out` (row-major, `param_count²` entries).
    fn log_pdf_hessian(&self, theta: &ParamPoint, x: f64, out: &mut [f64]);

    /// Closed-form Fisher information matrix (row-major, `param_count²`
    /// entries).
    fn fisher_info(&self, theta: &ParamPoint) -> Vec<f64>;

    /// Integration window containing all but at most `tail_budget` of the
    /// mass of every density in `thetas`.
    fn integration_plan(&self, thetas: &[&ParamPoint], tail_budget: f64) -> IntegrationPlan;
}

/// Evaluates the density at `theta` in the plan's integration variable.
fn density_at(family: &dyn SmoothFamily, theta: &ParamPoint, plan: &IntegrationPlan, v: f64) -> f64 {
    if plan.log_substitution {
        let x = v.exp();
        family.log_pdf(theta, x).exp() * x
    } else {
        family.log_pdf(theta, v).exp()
    }
}

/// Numeric total-variation distance `½∫|p_a − p_b|` with absolute error at
/// most `tol`.
///
/// A tenth of the tolerance is budgeted for the mass truncated outside the
/// family's integration window; the quadrature consumes the rest.
pub fn tv_numeric(family: &dyn SmoothFamily, a: &ParamPoint, b: &ParamPoint, tol: f64) -> f64 {
    let plan = family.integration_plan(&[a, b], 0.1 * tol);
    let integrand =
        |v: f64| (density_at(family, a, &plan, v) - density_at(family, b, &plan, v)).abs();
    let raw = 0.5 * adaptive_simpson(&integrand, plan.lo, plan.hi, 0.8 * tol);
    raw.clamp(0.0, 1.0)
}

/// Quadrature estimate of `KL(p_a || p_b)`.
///
/// Used as an independent oracle for the closed-form divergences and for
/// Fisher-information spot checks; the closed forms are what the engine
/// consumes.
pub fn kl_numeric(family: &dyn SmoothFamily, a: &ParamPoint, b: &ParamPoint, tol: f64) -> f64 {
    let plan = family.integration_plan(&[a, b], 0.1 * tol);
    let integrand = |v: f64| {
        let x = if plan.log_substitution { v.exp() } else { v };
        let la = family.log_pdf(a, x);
        if la == f64::NEG_INFINITY {
            return 0.0;
        }
        let lb = family.log_pdf(b, x);
        let jac = if plan.log_substitution { x } else { 1.0 };
        la.exp() * (la - lb) * jac
    };
    adaptive_simpson(&integrand, plan.lo, plan.hi, 0.8 * tol)
}

/// Quadrature of the density itself over its integration window; 1 for any
/// in-domain parameter point, up to the tolerance.
pub fn density_mass(family: &dyn SmoothFamily, theta: &ParamPoint, tol: f64) -> f64 {
    let plan = family.integration_plan(&[theta], 0.1 * tol);
    let integrand = |v: f64| density_at(family, theta, &plan, v);
    adaptive_simpson(&integrand, plan.lo, plan.hi, 0.8 * tol)
}
