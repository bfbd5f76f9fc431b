//! Exponential family with a single rate parameter.

use super::smooth::{tv_numeric, IntegrationPlan, SmoothFamily, DEFAULT_TV_TOL};
use crate::core::{
    CoordTransform, Dataset, Family, FamilyError, FamilyId, MleError, ParamPoint, RandomStream,
    Sample,
};

const TRANSFORMS: [CoordTransform; 1] = [CoordTransform::LogPositive];

/// Exponential family with parameter vector `(lambda)`, `lambda > 0`, and
/// density `lambda * exp(-lambda x)` on `[0, inf)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exponential;

impl Exponential {
    /// Builds a validated rate parameter point.
    pub fn params(lambda: f64) -> Result<ParamPoint, FamilyError> {
        let theta = ParamPoint::new(FamilyId::Exponential, vec![lambda]).map_err(|e| {
            FamilyError::OutOfDomain {
                family: FamilyId::Exponential,
                detail: e.to_string(),
            }
        })?;
        Exponential.validate(&theta)?;
        Ok(theta)
    }

    fn rate(theta: &ParamPoint) -> f64 {
        theta.coord(0)
    }
}

impl Family for Exponential {
    fn id(&self) -> FamilyId {
        FamilyId::Exponential
    }

    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError> {
        if theta.family() != FamilyId::Exponential {
            return Err(FamilyError::FamilyMismatch {
                expected: FamilyId::Exponential,
                got: theta.family(),
            });
        }
        if theta.dim() != 1 {
            return Err(FamilyError::CoordCount {
                family: FamilyId::Exponential,
                expected: 1,
                got: theta.dim(),
            });
        }
        let lambda = Self::rate(theta);
        if lambda <= 0.0 {
            return Err(FamilyError::OutOfDomain {
                family: FamilyId::Exponential,
                detail: format!("lambda must be positive, got {lambda}"),
            });
        }
        Ok(())
    }

    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let lambda = Self::rate(theta);
        lambda.ln() - lambda * x
    }

    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    ) {
        let lambda = Self::rate(theta);
        out.reserve(n);
        for _ in 0..n {
            let x = -stream.next_open01().ln() / lambda;
            out.push(Sample::new(x).expect("inverse-CDF draw from an open uniform is finite"));
        }
    }

    /// Reciprocal of the sample mean.
    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        if let Some(bad) = data.iter_values().find(|&x| x <= 0.0) {
            return Err(MleError::OutOfSupport { value: bad });
        }
        let mean = data.iter_values().sum::<f64>() / data.len() as f64;
        Ok(ParamPoint::new(FamilyId::Exponential, vec![1.0 / mean])
            .expect("reciprocal of a positive mean is finite"))
    }

    fn nll_objective<'a>(&'a self, values: &'a [f64]) -> Box<dyn Fn(&ParamPoint) -> f64 + 'a> {
        if values.iter().any(|&x| x < 0.0) {
            return Box::new(|_| f64::INFINITY);
        }
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        Box::new(move |theta| {
            let lambda = Self::rate(theta);
            lambda * mean - lambda.ln()
        })
    }

    fn coord_transforms(&self) -> Option<&'static [CoordTransform]> {
        Some(&TRANSFORMS)
    }

    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        tv_numeric(self, a, b, DEFAULT_TV_TOL)
    }

    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        let l0 = Self::rate(a);
        let l1 = Self::rate(b);
        (l0 / l1).ln() + l1 / l0 - 1.0
    }
}

impl SmoothFamily for Exponential {
    fn param_count(&self) -> usize {
        1
    }

    fn score(&self, theta: &ParamPoint, x: f64, out: &mut [f64]) {
        out[0] = 1.0 / Self::rate(theta) - x;
    }

    fn log_pdf_hessian(&self, theta: &ParamPoint, _x: f64, out: &mut [f64]) {
        let lambda = Self::rate(theta);
        out[0] = -1.0 / (lambda * lambda);
    }

    fn fisher_info(&self, theta: &ParamPoint) -> Vec<f64> {
        let lambda = Self::rate(theta);
        vec![1.0 / (lambda * lambda)]
    }

    /// Fifty mean lifetimes of the slowest-decaying density leave tail mass
    /// below `e^-50 ~ 2e-22`, far inside every tolerance used here.
    fn integration_plan(&self, thetas: &[&ParamPoint], _tail_budget: f64) -> IntegrationPlan {
        let min_rate = thetas
            .iter()
            .map(|t| Self::rate(t))
            .fold(f64::INFINITY, f64::min);
        IntegrationPlan {
            lo: 0.0,
            hi: 50.0 / min_rate,
            log_substitution: false,
        }
    }
}
