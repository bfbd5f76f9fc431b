//! One-parameter power family on the unit interval: density
//! `theta * x^(theta - 1)` on `(0, 1)`.

use super::smooth::{tv_numeric, IntegrationPlan, SmoothFamily, DEFAULT_TV_TOL};
use crate::core::{
    CoordTransform, Dataset, Family, FamilyError, FamilyId, MleError, ParamPoint, RandomStream,
    Sample,
};

const TRANSFORMS: [CoordTransform; 1] = [CoordTransform::LogPositive];

/// Power family with parameter vector `(theta)`, `theta > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PowerBeta;

impl PowerBeta {
    /// Builds a validated shape parameter point.
    pub fn params(theta: f64) -> Result<ParamPoint, FamilyError> {
        let point = ParamPoint::new(FamilyId::PowerBeta, vec![theta]).map_err(|e| {
            FamilyError::OutOfDomain {
                family: FamilyId::PowerBeta,
                detail: e.to_string(),
            }
        })?;
        PowerBeta.validate(&point)?;
        Ok(point)
    }

    fn shape(theta: &ParamPoint) -> f64 {
        theta.coord(0)
    }
}

impl Family for PowerBeta {
    fn id(&self) -> FamilyId {
        FamilyId::PowerBeta
    }

    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError> {
        if theta.family() != FamilyId::PowerBeta {
            return Err(FamilyError::FamilyMismatch {
                expected: FamilyId::PowerBeta,
                got: theta.family(),
            });
        }
        if theta.dim() != 1 {
            return Err(FamilyError::CoordCount {
                family: FamilyId::PowerBeta,
                expected: 1,
                got: theta.dim(),
            });
        }
        let shape = Self::shape(theta);
        if shape <= 0.0 {
            return Err(FamilyError::OutOfDomain {
                family: FamilyId::PowerBeta,
                detail: format!("shape must be positive, got {shape}"),
            });
        }
        Ok(())
    }

    /// The support is the open interval: a sample exactly on 0 or 1 is off
    /// support, matching the rejection in [`Family::exact_mle`]. Tiny
    /// interior samples keep their true log, which small shapes produce in
    /// bulk and the likelihood genuinely depends on.
    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64 {
        if !(0.0 < x && x < 1.0) {
            return f64::NEG_INFINITY;
        }
        let shape = Self::shape(theta);
        shape.ln() + (shape - 1.0) * x.ln()
    }

    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    ) {
        let inv_shape = 1.0 / Self::shape(theta);
        out.reserve(n);
        for _ in 0..n {
            let x = stream.next_open01().powf(inv_shape);
            out.push(Sample::new(x).expect("power of an open uniform draw is finite"));
        }
    }

    /// Sample count divided by the negated sum of log samples.
    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        if let Some(bad) = data.iter_values().find(|&x| x <= 0.0 || x >= 1.0) {
            return Err(MleError::OutOfSupport { value: bad });
        }
        let log_sum: f64 = data.iter_values().map(f64::ln).sum();
        let shape = -(data.len() as f64) / log_sum;
        Ok(ParamPoint::new(FamilyId::PowerBeta, vec![shape])
            .expect("log samples in the open unit interval sum to a negative finite value"))
    }

    fn nll_objective<'a>(&'a self, values: &'a [f64]) -> Box<dyn Fn(&ParamPoint) -> f64 + 'a> {
        if values.iter().any(|&x| !(0.0 < x && x < 1.0)) {
            return Box::new(|_| f64::INFINITY);
        }
        let mean_log = values.iter().map(|x| x.ln()).sum::<f64>() / values.len().max(1) as f64;
        Box::new(move |theta| {
            let shape = Self::shape(theta);
            -(shape.ln() + (shape - 1.0) * mean_log)
        })
    }

    fn coord_transforms(&self) -> Option<&'static [CoordTransform]> {
        Some(&TRANSFORMS)
    }

    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        tv_numeric(self, a, b, DEFAULT_TV_TOL)
    }

    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        let t0 = Self::shape(a);
        let t1 = Self::shape(b);
        (t0 / t1).ln() + t1 / t0 - 1.0
    }
}

impl SmoothFamily for PowerBeta {
    fn param_count(&self) -> usize {
        1
    }

    fn score(&self, theta: &ParamPoint, x: f64, out: &mut [f64]) {
        out[0] = 1.0 / Self::shape(theta) + x.ln();
    }

    fn log_pdf_hessian(&self, theta: &ParamPoint, _x: f64, out: &mut [f64]) {
        let shape = Self::shape(theta);
        out[0] = -1.0 / (shape * shape);
    }

    fn fisher_info(&self, theta: &ParamPoint) -> Vec<f64> {
        let shape = Self::shape(theta);
        vec![1.0 / (shape * shape)]
    }

    /// Integrates in `u = log x`: the transformed density `theta * e^(theta u)`
    /// is bounded and smooth, so the `x -> 0` singularity of small shapes
    /// never reaches the integrator. The lower limit keeps the truncated
    /// mass `e^(theta u)` of the smallest shape under the budget.
    fn integration_plan(&self, thetas: &[&ParamPoint], tail_budget: f64) -> IntegrationPlan {
        let min_shape = thetas
            .iter()
            .map(|t| Self::shape(t))
            .fold(f64::INFINITY, f64::min);
        IntegrationPlan {
            lo: tail_budget.ln() / min_shape - 2.0,
            hi: 0.0,
            log_substitution: true,
        }
    }
}
