//! Numeric maximum likelihood through coordinate transforms.

use super::golden::minimize_scalar;
use super::nelder_mead::minimize_simplex;
use super::OptimizerError;
use crate::core::{CoordTransform, Dataset, Family, ParamPoint};

/// Scalar search tolerance on the transformed coordinate.
pub const SCALAR_TOL: f64 = 1e-10;

/// Simplex diameter tolerance in transformed coordinates.
pub const SIMPLEX_TOL: f64 = 1e-8;

/// Simplex iteration cap.
pub const SIMPLEX_MAX_ITER: usize = 10_000;

/// Default domain window for a positive coordinate searched in log space.
const POSITIVE_LO: f64 = 1e-8;
const POSITIVE_HI: f64 = 1e8;

/// Default window for an unbounded coordinate.
const UNBOUNDED: f64 = 1e8;

/// Box search bounds in the family's parameter domain.
///
/// The search itself runs in transformed coordinates; each pair maps
/// through the coordinate's transform, so a positive coordinate's
/// `(lower, upper)` becomes `(log lower, log upper)` for the line search.
#[derive(Debug, Clone)]
pub struct Bounds {
    pairs: Vec<(f64, f64)>,
}

impl Bounds {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, OptimizerError> {
        for &(lower, upper) in &pairs {
            if !(lower < upper) {
                return Err(OptimizerError::InvalidBounds { lower, upper });
            }
        }
        Ok(Bounds { pairs })
    }

    /// Wide default window per coordinate of `family`'s search space.
    pub fn default_for(family: &dyn Family) -> Result<Self, OptimizerError> {
        let transforms =
            family
                .coord_transforms()
                .ok_or(OptimizerError::NoSearchParameterization {
                    family: family.id(),
                })?;
        let pairs = transforms
            .iter()
            .map(|t| match t {
                CoordTransform::Identity => (-UNBOUNDED, UNBOUNDED),
                CoordTransform::LogPositive => (POSITIVE_LO, POSITIVE_HI),
            })
            .collect();
        Ok(Bounds { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }
}

/// Fits `family` to the pooled dataset by minimizing the negative mean
/// log-likelihood over `bounds`, searching transformed coordinates.
///
/// One free parameter goes through golden-section search over the whole
/// transformed window; two go through Nelder-Mead warm-started at `init`.
/// Coordinates are projected onto the transformed window before each
/// evaluation, so the returned point always lies inside the family domain.
pub fn numeric_mle(
    family: &dyn Family,
    data: &Dataset,
    init: &ParamPoint,
    bounds: &Bounds,
) -> Result<ParamPoint, OptimizerError> {
    let transforms = family
        .coord_transforms()
        .ok_or(OptimizerError::NoSearchParameterization {
            family: family.id(),
        })?;
    family
        .validate(init)
        .map_err(|e| OptimizerError::InvalidInit(e.to_string()))?;
    if data.is_empty() {
        return Err(OptimizerError::EmptyData);
    }
    let dim = transforms.len();
    assert_eq!(
        bounds.pairs().len(),
        dim,
        "bounds must match the family's parameter count"
    );
    let window: Vec<(f64, f64)> = transforms
        .iter()
        .zip(bounds.pairs())
        .map(|(t, &(lo, hi))| (t.apply(lo), t.apply(hi)))
        .collect();

    let values = data.values_vec();
    let objective = family.nll_objective(&values);
    let family_id = family.id();
    let to_domain = |z: &[f64]| -> Vec<f64> {
        transforms
            .iter()
            .zip(z)
            .zip(&window)
            .map(|((t, &zi), &(lo, hi))| t.invert(zi.clamp(lo, hi)))
            .collect()
    };
    let transformed_objective = |z: &[f64]| -> f64 {
        match ParamPoint::new(family_id, to_domain(z)) {
            Ok(theta) => objective(&theta),
            Err(_) => f64::INFINITY,
        }
    };

    let best_z = if dim == 1 {
        let f = |z: f64| transformed_objective(&[z]);
        let (z, _) = minimize_scalar(&f, window[0].0, window[0].1, SCALAR_TOL)?;
        vec![z]
    } else {
        let z0: Vec<f64> = transforms
            .iter()
            .zip(init.coords())
            .zip(&window)
            .map(|((t, &c), &(lo, hi))| t.apply(c).clamp(lo, hi))
            .collect();
        let out = minimize_simplex(&transformed_objective, &z0, SIMPLEX_TOL, SIMPLEX_MAX_ITER)?;
        out.x
    };
    ParamPoint::new(family_id, to_domain(&best_z))
        .map_err(|_| OptimizerError::NonFiniteObjective { value: f64::NAN })
}
